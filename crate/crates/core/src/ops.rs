//! Update operations on a (forest, geometric rank, smooth rank) triple.
//!
//! Insertion attaches the new point under a fresh path whose length is the
//! largest rank it can take without breaking separation. Deletion lowers the
//! point's geometric rank one step at a time, repairing the forest and the
//! smooth ranks after each step, then removes the isolated leaf and restores
//! maximality by promoting maximal well-spread groups level by level.
//!
//! Every "arbitrary" choice is fixed: children are taken in the forest's
//! canonical order, groups are built greedily in ascending label order, and
//! the representative of a group is its least label.

use std::fmt;

use crate::error::{Error, Result};
use crate::forest::{LeveledForest, NodeId};
use crate::metric::{pow2, MetricUniverse, PointId, PointKey};
use crate::ranks::RankFunction;

/// One smooth-rank change of a pre-existing point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankChange {
    pub point: PointId,
    pub old: u32,
    pub new: u32,
}

/// Smooth-rank changes caused by one top-level operation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SmoothRankDelta {
    pub raised: Vec<RankChange>,
    pub lowered: Vec<RankChange>,
    /// Deleted point with its smooth rank before the deletion.
    pub removed: Option<(PointId, u32)>,
    /// Inserted point with its new smooth rank.
    pub inserted: Option<(PointId, u32)>,
}

/// Number of points whose smooth rank crosses a level in each direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelCrossings {
    /// Points with old rank `>= h` that were removed or dropped below `h`.
    pub down: usize,
    /// Surviving points with old rank `< h` that now reach `h`.
    pub up: usize,
}

impl SmoothRankDelta {
    /// Diff two smooth rank functions. `removed` is the deleted point, if
    /// any; a point present only in `after` is recorded as inserted.
    pub fn between(
        before: &RankFunction,
        after: &RankFunction,
        removed: Option<PointKey>,
        u: &MetricUniverse,
    ) -> Self {
        let mut delta = SmoothRankDelta::default();
        for (p, old) in before.iter() {
            if Some(p) == removed {
                delta.removed = Some((u.label(p).clone(), old));
                continue;
            }
            let Some(new) = after.get(p) else { continue };
            let change = RankChange {
                point: u.label(p).clone(),
                old,
                new,
            };
            if new > old {
                delta.raised.push(change);
            } else if new < old {
                delta.lowered.push(change);
            }
        }
        for (p, new) in after.iter() {
            if !before.contains(p) {
                delta.inserted = Some((u.label(p).clone(), new));
            }
        }
        delta.raised.sort_by(|a, b| a.point.cmp(&b.point));
        delta.lowered.sort_by(|a, b| a.point.cmp(&b.point));
        delta
    }

    /// True when no pre-existing point changed its smooth rank.
    pub fn preserves_existing(&self) -> bool {
        self.raised.is_empty() && self.lowered.is_empty()
    }

    pub fn crossings(&self, h: u32) -> LevelCrossings {
        let down = self
            .lowered
            .iter()
            .filter(|c| c.old >= h && c.new < h)
            .count()
            + usize::from(self.removed.as_ref().is_some_and(|(_, old)| *old >= h));
        let up = self
            .raised
            .iter()
            .filter(|c| c.old < h && c.new >= h)
            .count();
        LevelCrossings { down, up }
    }

    /// Largest downward and upward crossing counts over levels `1..=max_level`.
    pub fn max_crossings(&self, max_level: u32) -> LevelCrossings {
        (1..=max_level).fold(LevelCrossings::default(), |acc, h| {
            let c = self.crossings(h);
            LevelCrossings {
                down: acc.down.max(c.down),
                up: acc.up.max(c.up),
            }
        })
    }
}

impl fmt::Display for SmoothRankDelta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for c in &self.raised {
            parts.push(format!("{}:{}->{}", c.point, c.old, c.new));
        }
        for c in &self.lowered {
            parts.push(format!("{}:{}->{}", c.point, c.old, c.new));
        }
        if let Some((p, r)) = &self.removed {
            parts.push(format!("-{p}:{r}"));
        }
        if let Some((p, r)) = &self.inserted {
            parts.push(format!("+{p}:{r}"));
        }
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A leveled forest with its geometric and smooth rank functions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleState {
    forest: LeveledForest,
    xi_g: RankFunction,
    xi_s: RankFunction,
}

impl TripleState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Assemble a state from parts without checking it; audit it with
    /// [`crate::forest::check_valid_triple`].
    pub fn from_parts(forest: LeveledForest, xi_g: RankFunction, xi_s: RankFunction) -> Self {
        Self { forest, xi_g, xi_s }
    }

    pub fn forest(&self) -> &LeveledForest {
        &self.forest
    }

    pub fn geometric(&self) -> &RankFunction {
        &self.xi_g
    }

    pub fn smooth(&self) -> &RankFunction {
        &self.xi_s
    }

    pub fn len(&self) -> usize {
        self.xi_g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_g.is_empty()
    }

    pub fn contains(&self, p: PointKey) -> bool {
        self.xi_g.contains(p)
    }

    /// Active points sorted by label.
    pub fn points_by_label(&self, u: &MetricUniverse) -> Vec<PointKey> {
        let mut keys = self.xi_g.domain().to_vec();
        keys.sort_by(|&a, &b| u.cmp_labels(a, b));
        keys
    }

    /// Rank a new point would receive: the largest `i <= cap` such that
    /// `d(q, p) >= 2^min(i, rank(p))` for every active `p`.
    pub fn insertion_rank(&self, q: PointKey, u: &MetricUniverse) -> u32 {
        let cap = u.rank_cap();
        (0..=cap)
            .rev()
            .find(|&i| {
                self.xi_g
                    .iter()
                    .all(|(p, r)| u.distance(q, p) >= pow2(i.min(r)))
            })
            .unwrap_or(0)
    }

    /// Insert `q`. Pre-existing ranks are untouched.
    pub fn insert(&mut self, q: PointKey, u: &MetricUniverse) -> Result<SmoothRankDelta> {
        if self.contains(q) {
            return Err(Error::State(format!("{} is already active", u.label(q))));
        }
        let delta = u.delta() as f64;
        for &p in self.xi_g.domain() {
            let d = u.distance(q, p);
            if d < 1.0 {
                return Err(Error::Input(format!(
                    "d({}, {}) = {d} is below the minimum distance 1",
                    u.label(q),
                    u.label(p)
                )));
            }
            if d > delta {
                return Err(Error::Input(format!(
                    "d({}, {}) = {d} exceeds delta {}",
                    u.label(q),
                    u.label(p),
                    u.delta()
                )));
            }
        }
        let rank = self.insertion_rank(q, u);
        self.forest.add_leaf_with_path(q, rank)?;
        self.xi_g.set(q, rank);
        self.xi_s.set(q, rank);
        Ok(SmoothRankDelta {
            inserted: Some((u.label(q).clone(), rank)),
            ..SmoothRankDelta::default()
        })
    }

    /// The unique leaf below `v` whose smooth rank reaches `h(v)`.
    fn smooth_holder(&self, v: NodeId, u: &MetricUniverse) -> Result<PointKey> {
        let h = self.forest.height(v)?;
        let holders: Vec<_> = self
            .forest
            .subtree_leaves(v)
            .into_iter()
            .filter(|&p| self.xi_s.rank(p) >= h)
            .collect();
        match holders[..] {
            [p] => Ok(p),
            _ => Err(Error::State(format!(
                "{v} has {} smooth holders {:?}; not a valid triple",
                holders.len(),
                holders
                    .iter()
                    .map(|&p| u.label(p).as_str())
                    .collect::<Vec<_>>()
            ))),
        }
    }

    /// Lower the geometric rank of `q` by one and repair the forest and the
    /// smooth ranks. Maximality is not required and may be lost.
    pub fn rank_decrease(&mut self, q: PointKey, u: &MetricUniverse) -> Result<SmoothRankDelta> {
        let before = self.xi_s.clone();
        self.rank_decrease_step(q, u)?;
        Ok(SmoothRankDelta::between(&before, &self.xi_s, None, u))
    }

    fn rank_decrease_step(&mut self, q: PointKey, u: &MetricUniverse) -> Result<()> {
        let g = self
            .xi_g
            .get(q)
            .ok_or_else(|| Error::State(format!("{} is not active", u.label(q))))?;
        if g == 0 {
            return Err(Error::State(format!(
                "cannot decrease the rank of {}: it is already 0",
                u.label(q)
            )));
        }
        let lower = self.forest.ancestor_at_height(q, g - 1)?;
        let upper = self.forest.ancestor_at_height(q, g)?;
        let holder = self.smooth_holder(upper, u)?;

        if self.forest.children(upper)?.len() == 1 {
            self.forest.detach_edge(lower, upper, true)?;
            self.xi_s.set(holder, g - 1);
        } else {
            let sibling = self
                .forest
                .ordered_children(upper, u)?
                .into_iter()
                .find(|&c| c != lower)
                .expect("at least two children");
            let holder_leaf = self.forest.leaf(holder).expect("holder is a leaf");
            let replacement = if self.forest.in_subtree(holder_leaf, lower) {
                Some(self.smooth_holder(sibling, u)?)
            } else {
                None
            };
            self.forest.detach_edge(lower, upper, false)?;
            if let Some(replacement) = replacement {
                let old = self.xi_s.rank(holder);
                self.xi_s.set(holder, g - 1);
                self.xi_s.set(replacement, old);
            }
        }
        self.xi_g.set(q, g - 1);
        Ok(())
    }

    /// Remove `q` without restoring maximality: lower its geometric rank to
    /// zero, then drop its isolated leaf. Other geometric ranks are unchanged.
    pub fn delete_without_maximality(
        &mut self,
        q: PointKey,
        u: &MetricUniverse,
    ) -> Result<SmoothRankDelta> {
        let before = self.xi_s.clone();
        let mut next = self.clone();
        next.delete_without_maximality_in_place(q, u)?;
        *self = next;
        Ok(SmoothRankDelta::between(&before, &self.xi_s, Some(q), u))
    }

    fn delete_without_maximality_in_place(
        &mut self,
        q: PointKey,
        u: &MetricUniverse,
    ) -> Result<()> {
        let g = self
            .xi_g
            .get(q)
            .ok_or_else(|| Error::State(format!("{} is not active", u.label(q))))?;
        for _ in 0..g {
            self.rank_decrease_step(q, u)?;
        }
        self.forest.remove_isolated_leaf(q)?;
        self.xi_g.remove(q);
        self.xi_s.remove(q);
        Ok(())
    }

    /// Check the preconditions of [`TripleState::group_increase`].
    fn check_group(&self, group: &[PointKey], h: u32, u: &MetricUniverse) -> Result<()> {
        let (near, far) = (pow2(h + 1), pow2(h + 2));
        for (i, &q) in group.iter().enumerate() {
            match self.xi_g.get(q) {
                Some(r) if r == h => {}
                Some(r) => {
                    return Err(Error::Input(format!(
                        "{} has geometric rank {r}, expected {h}",
                        u.label(q)
                    )))
                }
                None => return Err(Error::State(format!("{} is not active", u.label(q)))),
            }
            for &other in &group[..i] {
                if other == q {
                    return Err(Error::Input(format!("{} listed twice", u.label(q))));
                }
                let d = u.distance(q, other);
                if d < near || d >= far {
                    return Err(Error::Input(format!(
                        "group pair ({}, {}) at distance {d} outside [{near}, {far})",
                        u.label(other),
                        u.label(q)
                    )));
                }
            }
            for (p, r) in self.xi_g.iter() {
                if group.contains(&p) {
                    continue;
                }
                let d = u.distance(q, p);
                if d < pow2((h + 1).min(r)) {
                    return Err(Error::Input(format!(
                        "group member {} is too close to outsider {} (d = {d})",
                        u.label(q),
                        u.label(p)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Promote every point of `group` from geometric rank `h` to `h + 1`
    /// under one new root; one smooth rank rises from `h` to `h + 1`.
    pub fn group_increase(
        &mut self,
        group: &[PointKey],
        h: u32,
        u: &MetricUniverse,
    ) -> Result<SmoothRankDelta> {
        let before = self.xi_s.clone();
        self.group_increase_in_place(group, h, u)?;
        Ok(SmoothRankDelta::between(&before, &self.xi_s, None, u))
    }

    fn group_increase_in_place(
        &mut self,
        group: &[PointKey],
        h: u32,
        u: &MetricUniverse,
    ) -> Result<()> {
        if group.is_empty() {
            return Ok(());
        }
        self.check_group(group, h, u)?;
        let mut members = group.to_vec();
        members.sort_by(|&a, &b| u.cmp_labels(a, b));
        let mut roots = Vec::with_capacity(members.len());
        for &q in &members {
            let root = self
                .forest
                .root_of(self.forest.leaf(q).expect("active points are leaves"))?;
            if self.forest.height(root)? != h {
                return Err(Error::State(format!(
                    "root above {} has height {}, expected {h}",
                    u.label(q),
                    self.forest.height(root)?
                )));
            }
            roots.push(root);
        }
        // representative: least label
        let holder = self.smooth_holder(roots[0], u)?;
        if self.xi_s.rank(holder) != h {
            return Err(Error::State(format!(
                "smooth holder {} of a height-{h} root has rank {}",
                u.label(holder),
                self.xi_s.rank(holder)
            )));
        }
        self.forest.attach_new_parent(&roots)?;
        for &q in &members {
            self.xi_g.set(q, h + 1);
        }
        self.xi_s.set(holder, h + 1);
        Ok(())
    }

    /// Greedy maximal group at level `h`: points of geometric rank `h` in
    /// ascending label order, each admitted when it stays `2^(h+1)` away
    /// from admitted members and `2^min(h+1, rank(p))` away from every other
    /// active `p`.
    pub fn maximal_group(&self, h: u32, u: &MetricUniverse) -> Vec<PointKey> {
        let mut candidates: Vec<_> = self
            .xi_g
            .iter()
            .filter(|&(_, r)| r == h)
            .map(|(p, _)| p)
            .collect();
        candidates.sort_by(|&a, &b| u.cmp_labels(a, b));
        let spread = pow2(h + 1);
        let mut group: Vec<PointKey> = Vec::new();
        for c in candidates {
            let admissible = self.xi_g.iter().all(|(p, r)| {
                if p == c {
                    return true;
                }
                let d = u.distance(c, p);
                if group.contains(&p) {
                    d >= spread
                } else {
                    d >= pow2((h + 1).min(r))
                }
            });
            if admissible {
                group.push(c);
            }
        }
        group
    }

    /// Delete `q` and restore maximality. The state is left unchanged on
    /// error.
    pub fn delete(&mut self, q: PointKey, u: &MetricUniverse) -> Result<SmoothRankDelta> {
        if !self.contains(q) {
            return Err(Error::State(format!("{} is not active", u.label(q))));
        }
        let before = self.xi_s.clone();
        let mut next = self.clone();
        next.delete_without_maximality_in_place(q, u)?;
        for level in 0..u.rank_cap() {
            let group = next.maximal_group(level, u);
            next.group_increase_in_place(&group, level, u)?;
        }
        *self = next;
        Ok(SmoothRankDelta::between(&before, &self.xi_s, Some(q), u))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{check_valid_triple, subtree_diameter_bound_check};
    use crate::ranks::{check_maximality, check_separation, has_cap_witness};

    fn line(points: &[(&str, f64)], delta: u64) -> (MetricUniverse, Vec<PointKey>) {
        let mut u = MetricUniverse::euclidean(1, delta).unwrap();
        let keys = points
            .iter()
            .map(|&(id, x)| u.add_point(id.into(), vec![x]).unwrap())
            .collect();
        (u, keys)
    }

    fn ranks(s: &TripleState, xi: &RankFunction, u: &MetricUniverse) -> Vec<(String, u32)> {
        s.points_by_label(u)
            .into_iter()
            .map(|p| (u.label(p).to_string(), xi.rank(p)))
            .collect()
    }

    fn pairs(v: &[(&str, u32)]) -> Vec<(String, u32)> {
        v.iter().map(|&(s, r)| (s.to_string(), r)).collect()
    }

    fn assert_top_level_valid(s: &TripleState, u: &MetricUniverse) {
        let report = check_valid_triple(s.forest(), s.geometric(), s.smooth(), u);
        assert!(report.is_valid(), "{report}");
        assert!(check_separation(s.geometric(), u).is_empty());
        assert!(check_maximality(s.geometric(), u).is_empty());
        assert!(has_cap_witness(s.geometric(), u.rank_cap()));
        assert!(subtree_diameter_bound_check(s.forest(), s.geometric(), u).is_valid());
    }

    fn worked() -> (MetricUniverse, Vec<PointKey>, TripleState) {
        let (u, k) = line(&[("p1", 0.0), ("p2", 1.0), ("p3", 4.0)], 8);
        let mut s = TripleState::new();
        for &p in &k {
            s.insert(p, &u).unwrap();
        }
        (u, k, s)
    }

    #[test]
    fn worked_insertions() {
        let (u, k) = line(&[("p1", 0.0), ("p2", 1.0), ("p3", 4.0)], 8);
        let mut s = TripleState::new();
        assert_eq!(s.insertion_rank(k[0], &u), 4);
        let d = s.insert(k[0], &u).unwrap();
        assert!(d.preserves_existing());
        assert_eq!(d.inserted, Some(("p1".into(), 4)));
        assert_eq!(s.insertion_rank(k[1], &u), 0);
        s.insert(k[1], &u).unwrap();
        assert_eq!(s.insertion_rank(k[2], &u), 2);
        s.insert(k[2], &u).unwrap();
        let expected = pairs(&[("p1", 4), ("p2", 0), ("p3", 2)]);
        assert_eq!(ranks(&s, s.geometric(), &u), expected);
        assert_eq!(ranks(&s, s.smooth(), &u), expected);
        assert_eq!(s.forest().path_len(k[0]).unwrap(), 4);
        assert_top_level_valid(&s, &u);
    }

    #[test]
    fn insert_rejects_duplicates_and_bad_distances() {
        let (u, k, mut s) = worked();
        assert!(matches!(s.insert(k[0], &u), Err(Error::State(_))));

        let (mut u, k) = line(&[("a", 0.0)], 8);
        let mut s = TripleState::new();
        s.insert(k[0], &u).unwrap();
        let close = u.add_point("b".into(), vec![0.5]).unwrap();
        let far = u.add_point("c".into(), vec![9.0]).unwrap();
        assert!(matches!(s.insert(close, &u), Err(Error::Input(_))));
        assert!(matches!(s.insert(far, &u), Err(Error::Input(_))));
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn rank_decrease_sole_child_branch() {
        let (u, k) = line(&[("p1", 0.0)], 8);
        let mut s = TripleState::new();
        s.insert(k[0], &u).unwrap();
        let root = s.forest().root_of(s.forest().leaf(k[0]).unwrap()).unwrap();
        let d = s.rank_decrease(k[0], &u).unwrap();
        assert!(!s.forest().contains(root));
        assert_eq!(s.smooth().rank(k[0]), 3);
        assert_eq!(s.geometric().rank(k[0]), 3);
        assert_eq!(
            d.lowered,
            vec![RankChange {
                point: "p1".into(),
                old: 4,
                new: 3
            }]
        );
        assert!(d.raised.is_empty());
        assert!(check_valid_triple(s.forest(), s.geometric(), s.smooth(), &u).is_valid());
    }

    #[test]
    fn rank_decrease_at_zero_is_an_error() {
        let (u, k, mut s) = worked();
        assert!(matches!(s.rank_decrease(k[1], &u), Err(Error::State(_))));
    }

    /// Two groups a@0 (rank 2) and b@8 (rank 2) merged under a height-3 root
    /// whose smooth holder is `holder`.
    fn merged(holder_is_a: bool) -> (MetricUniverse, Vec<PointKey>, TripleState) {
        let (u, k) = line(&[("a", 0.0), ("b", 8.0)], 8);
        let mut f = LeveledForest::new();
        let ra = f.add_leaf_with_path(k[0], 2).unwrap();
        let rb = f.add_leaf_with_path(k[1], 2).unwrap();
        f.attach_new_parent(&[ra, rb]).unwrap();
        let xi_g = RankFunction::from_pairs([(k[0], 3), (k[1], 3)]);
        let xi_s = if holder_is_a {
            RankFunction::from_pairs([(k[0], 3), (k[1], 2)])
        } else {
            RankFunction::from_pairs([(k[0], 2), (k[1], 3)])
        };
        let s = TripleState::from_parts(f, xi_g, xi_s);
        assert!(check_valid_triple(s.forest(), s.geometric(), s.smooth(), &u).is_valid());
        (u, k, s)
    }

    #[test]
    fn rank_decrease_multi_child_holder_elsewhere() {
        let (u, k, mut s) = merged(false);
        let d = s.rank_decrease(k[0], &u).unwrap();
        assert!(d.preserves_existing());
        assert_eq!(s.geometric().rank(k[0]), 2);
        assert_eq!(s.forest().path_len(k[0]).unwrap(), 2);
        assert!(check_valid_triple(s.forest(), s.geometric(), s.smooth(), &u).is_valid());
    }

    #[test]
    fn rank_decrease_multi_child_holder_below() {
        let (u, k, mut s) = merged(true);
        let d = s.rank_decrease(k[0], &u).unwrap();
        assert_eq!(s.smooth().rank(k[0]), 2);
        assert_eq!(s.smooth().rank(k[1]), 3);
        assert_eq!(
            d.lowered,
            vec![RankChange {
                point: "a".into(),
                old: 3,
                new: 2
            }]
        );
        assert_eq!(
            d.raised,
            vec![RankChange {
                point: "b".into(),
                old: 2,
                new: 3
            }]
        );
        assert!(check_valid_triple(s.forest(), s.geometric(), s.smooth(), &u).is_valid());
    }

    #[test]
    fn delete_without_maximality_worked() {
        let (u, k, mut s) = worked();
        let d = s.delete_without_maximality(k[0], &u).unwrap();
        let expected = pairs(&[("p2", 0), ("p3", 2)]);
        assert_eq!(ranks(&s, s.geometric(), &u), expected);
        assert_eq!(ranks(&s, s.smooth(), &u), expected);
        assert_eq!(s.forest().roots().len(), 2);
        assert_eq!(d.removed, Some(("p1".into(), 4)));
        assert!(check_valid_triple(s.forest(), s.geometric(), s.smooth(), &u).is_valid());
    }

    #[test]
    fn delete_without_maximality_rank_zero_point() {
        let (u, k, mut s) = worked();
        let before_g = s.geometric().clone();
        let d = s.delete_without_maximality(k[1], &u).unwrap();
        assert!(d.preserves_existing());
        for p in [k[0], k[2]] {
            assert_eq!(s.geometric().rank(p), before_g.rank(p));
        }
    }

    #[test]
    fn delete_sole_point_empties_state() {
        let (u, k) = line(&[("p1", 0.0)], 8);
        let mut s = TripleState::new();
        s.insert(k[0], &u).unwrap();
        s.delete_without_maximality(k[0], &u).unwrap();
        assert!(s.is_empty());
        assert!(s.forest().is_empty());

        s.insert(k[0], &u).unwrap();
        s.delete(k[0], &u).unwrap();
        assert!(s.is_empty());
        assert!(s.forest().is_empty());
        assert!(s.smooth().is_empty());
    }

    #[test]
    fn group_increase_empty_is_identity() {
        let (u, _, mut s) = worked();
        let before = s.clone();
        let d = s.group_increase(&[], 0, &u).unwrap();
        assert_eq!(s, before);
        assert_eq!(d, SmoothRankDelta::default());
    }

    #[test]
    fn worked_deletion_trace() {
        let (u, k, mut s) = worked();
        s.delete_without_maximality(k[0], &u).unwrap();

        assert_eq!(s.maximal_group(0, &u), vec![k[1]]);
        s.group_increase(&[k[1]], 0, &u).unwrap();
        assert_eq!(s.geometric().rank(k[1]), 1);
        assert_eq!(s.smooth().rank(k[1]), 1);
        let root = s.forest().root_of(s.forest().leaf(k[1]).unwrap()).unwrap();
        assert_eq!(s.forest().height(root).unwrap(), 1);

        // d(p2, p3) = 3 < 4 keeps p2 out at level 1
        assert!(s.maximal_group(1, &u).is_empty());

        assert_eq!(s.maximal_group(2, &u), vec![k[2]]);
        s.group_increase(&[k[2]], 2, &u).unwrap();
        assert_eq!(s.geometric().rank(k[2]), 3);
        assert_eq!(s.smooth().rank(k[2]), 3);

        assert_eq!(s.maximal_group(3, &u), vec![k[2]]);
    }

    #[test]
    fn worked_deletion() {
        let (u, k, mut s) = worked();
        let d = s.delete(k[0], &u).unwrap();
        let expected = pairs(&[("p2", 1), ("p3", 4)]);
        assert_eq!(ranks(&s, s.geometric(), &u), expected);
        assert_eq!(ranks(&s, s.smooth(), &u), expected);
        assert_top_level_valid(&s, &u);
        for h in 1..=4 {
            let c = d.crossings(h);
            assert!(c.down <= 1 && c.up <= 2, "level {h}: {c:?}");
        }
        assert_eq!(d.removed, Some(("p1".into(), 4)));
    }

    #[test]
    fn group_increase_rejects_bad_groups() {
        let (u, k, mut s) = worked();
        // p2 has rank 0, p3 rank 2
        assert!(matches!(
            s.group_increase(&[k[1], k[2]], 0, &u),
            Err(Error::Input(_))
        ));
        // p2 is within 2 of p1 (rank 4)
        assert!(matches!(
            s.group_increase(&[k[1]], 0, &u),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn delete_missing_point() {
        let (mut u, _, mut s) = worked();
        let other = u.add_point("zz".into(), vec![7.0]).unwrap();
        let before = s.clone();
        assert!(matches!(s.delete(other, &u), Err(Error::State(_))));
        assert!(matches!(
            s.delete_without_maximality(other, &u),
            Err(Error::State(_))
        ));
        assert_eq!(s, before);
    }

    #[test]
    fn crossing_counts() {
        let d = SmoothRankDelta {
            raised: vec![
                RankChange {
                    point: "a".into(),
                    old: 0,
                    new: 2,
                },
                RankChange {
                    point: "b".into(),
                    old: 1,
                    new: 2,
                },
            ],
            lowered: vec![RankChange {
                point: "c".into(),
                old: 3,
                new: 1,
            }],
            removed: Some(("q".into(), 4)),
            inserted: None,
        };
        assert_eq!(d.crossings(1), LevelCrossings { down: 1, up: 1 });
        assert_eq!(d.crossings(2), LevelCrossings { down: 2, up: 2 });
        assert_eq!(d.crossings(4), LevelCrossings { down: 1, up: 0 });
        assert_eq!(d.max_crossings(4), LevelCrossings { down: 2, up: 2 });
    }
}
