//! Rank functions and the audit checkers built on them: separation,
//! maximality, valid tuples and the separation lower bound on the optimum.
//!
//! The checkers are quadratic brute force. They run after updates in tests
//! and in the harness, never on the update path.

use std::fmt;

use crate::error::{Error, Result};
use crate::metric::{pow2, MetricUniverse, PointId, PointKey};
use crate::validation::ValidationReport;

/// Assignment of nonnegative integer ranks to the active points.
///
/// The domain of the function is the active point set. Lookups are by dense
/// slot; iteration walks a compact member list whose order depends on the
/// update history, so callers that need a canonical order sort by label.
#[derive(Debug, Clone, Default)]
pub struct RankFunction {
    slots: Vec<Option<(u32, usize)>>,
    members: Vec<PointKey>,
}

impl RankFunction {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (PointKey, u32)>) -> Self {
        let mut xi = Self::new();
        for (p, r) in pairs {
            xi.set(p, r);
        }
        xi
    }

    pub fn get(&self, p: PointKey) -> Option<u32> {
        self.slots.get(p.index()).copied().flatten().map(|(r, _)| r)
    }

    /// Rank of a point that must be in the domain.
    pub fn rank(&self, p: PointKey) -> u32 {
        self.get(p)
            .unwrap_or_else(|| panic!("point {p:?} has no rank"))
    }

    pub fn contains(&self, p: PointKey) -> bool {
        self.get(p).is_some()
    }

    /// Set the rank of `p`, returning the previous one.
    pub fn set(&mut self, p: PointKey, rank: u32) -> Option<u32> {
        let i = p.index();
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        match &mut self.slots[i] {
            Some((r, _)) => Some(std::mem::replace(r, rank)),
            slot @ None => {
                *slot = Some((rank, self.members.len()));
                self.members.push(p);
                None
            }
        }
    }

    pub fn remove(&mut self, p: PointKey) -> Option<u32> {
        let (rank, pos) = self.slots.get_mut(p.index()).and_then(Option::take)?;
        self.members.swap_remove(pos);
        if let Some(&moved) = self.members.get(pos) {
            if let Some((_, moved_pos)) = &mut self.slots[moved.index()] {
                *moved_pos = pos;
            }
        }
        Some(rank)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointKey, u32)> + '_ {
        self.members.iter().map(|&p| (p, self.rank(p)))
    }

    pub fn domain(&self) -> &[PointKey] {
        &self.members
    }

    pub fn max_rank(&self) -> Option<u32> {
        self.iter().map(|(_, r)| r).max()
    }

    /// Ranks in nonincreasing order; entry `i - 1` is the `i`-th largest.
    pub fn ordered(&self) -> Vec<u32> {
        let mut sorted: Vec<u32> = self.iter().map(|(_, r)| r).collect();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        sorted
    }

    pub fn same_domain(&self, other: &RankFunction) -> bool {
        self.len() == other.len() && self.members.iter().all(|&p| other.contains(p))
    }
}

impl PartialEq for RankFunction {
    fn eq(&self, other: &Self) -> bool {
        self.same_domain(other) && self.iter().all(|(p, r)| other.get(p) == Some(r))
    }
}

impl Eq for RankFunction {}

/// The `i`-th largest rank (1-based).
pub fn ordered_rank(xi: &RankFunction, i: usize) -> Result<u32> {
    if i == 0 || i > xi.len() {
        return Err(Error::Argument(format!(
            "ordered rank index {i} outside 1..={}",
            xi.len()
        )));
    }
    Ok(xi.ordered()[i - 1])
}

fn sorted_domain(xi: &RankFunction, u: &MetricUniverse) -> Vec<PointKey> {
    let mut keys = xi.domain().to_vec();
    keys.sort_by(|&a, &b| u.cmp_labels(a, b));
    keys
}

/// Every unordered pair closer than `2^min(rank)`.
pub fn check_separation(xi: &RankFunction, u: &MetricUniverse) -> Vec<(PointId, PointId)> {
    let keys = sorted_domain(xi, u);
    let mut out = Vec::new();
    for (i, &p) in keys.iter().enumerate() {
        for &q in &keys[i + 1..] {
            let r = xi.rank(p).min(xi.rank(q));
            if u.distance(p, q) < pow2(r) {
                out.push((u.label(p).clone(), u.label(q).clone()));
            }
        }
    }
    out
}

/// Every point that is neither the unique strict maximum nor within
/// `2^(rank + 1)` of a strictly higher-ranked point.
pub fn check_maximality(xi: &RankFunction, u: &MetricUniverse) -> Vec<PointId> {
    let keys = sorted_domain(xi, u);
    keys.iter()
        .copied()
        .filter(|&p| !is_maximal(xi, u, &keys, p))
        .map(|p| u.label(p).clone())
        .collect()
}

fn is_maximal(xi: &RankFunction, u: &MetricUniverse, keys: &[PointKey], p: PointKey) -> bool {
    let rp = xi.rank(p);
    let unique_max = keys.iter().all(|&o| o == p || xi.rank(o) < rp);
    unique_max
        || keys
            .iter()
            .any(|&o| xi.rank(o) > rp && u.distance(p, o) < pow2(rp + 1))
}

/// True when the set is empty or some point reaches rank `cap`.
pub fn has_cap_witness(xi: &RankFunction, cap: u32) -> bool {
    xi.is_empty() || xi.iter().any(|(_, r)| r >= cap)
}

/// For every point and every `i` in `2..=|P|`, search for a point of rank
/// strictly above the `i`-th largest rank within `4 * 2^rank`. Returns the
/// `(point, i)` pairs with no such witness; empty whenever `xi` is maximal.
pub fn check_maximality_chain(xi: &RankFunction, u: &MetricUniverse) -> Vec<(PointId, usize)> {
    let keys = sorted_domain(xi, u);
    let ordered = xi.ordered();
    let mut out = Vec::new();
    for &p in &keys {
        for i in 2..=ordered.len() {
            let level = ordered[i - 1];
            let found = keys
                .iter()
                .any(|&q| xi.rank(q) > level && u.distance(p, q) <= 4.0 * pow2(level));
            if !found {
                out.push((u.label(p).clone(), i));
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TupleViolation {
    DomainMismatch {
        point: PointId,
    },
    Separation {
        p: PointId,
        q: PointId,
    },
    NotMaximal {
        point: PointId,
    },
    /// `geometric` is the `i`-th largest geometric rank, `smooth` the `i`-th
    /// largest smooth rank.
    Dominance {
        i: usize,
        geometric: u32,
        smooth: u32,
    },
    NoSmoothWitness {
        r: u32,
        point: PointId,
    },
}

impl fmt::Display for TupleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TupleViolation::DomainMismatch { point } => {
                write!(f, "{point} is ranked by only one of the two functions")
            }
            TupleViolation::Separation { p, q } => write!(f, "separation fails for {p}, {q}"),
            TupleViolation::NotMaximal { point } => write!(f, "{point} is not maximal"),
            TupleViolation::Dominance {
                i,
                geometric,
                smooth,
            } => write!(
                f,
                "ordered geometric rank {geometric} < ordered smooth rank {smooth} at i = {i}"
            ),
            TupleViolation::NoSmoothWitness { r, point } => write!(
                f,
                "no point of smooth rank >= {r} within 4*2^{r} of {point}"
            ),
        }
    }
}

/// Check that `(xi_g, xi_s)` is a valid tuple: separation and maximality of
/// the geometric rank, dominance of the ordered ranks, and a smooth witness
/// within `4 * 2^r` for every `r` up to each point's geometric rank.
pub fn check_valid_tuple(
    xi_g: &RankFunction,
    xi_s: &RankFunction,
    u: &MetricUniverse,
) -> ValidationReport<TupleViolation> {
    let mut report = ValidationReport::new();
    if !xi_g.same_domain(xi_s) {
        for (p, _) in xi_g.iter().filter(|&(p, _)| !xi_s.contains(p)) {
            report.push(TupleViolation::DomainMismatch {
                point: u.label(p).clone(),
            });
        }
        for (p, _) in xi_s.iter().filter(|&(p, _)| !xi_g.contains(p)) {
            report.push(TupleViolation::DomainMismatch {
                point: u.label(p).clone(),
            });
        }
        return report;
    }

    for (p, q) in check_separation(xi_g, u) {
        report.push(TupleViolation::Separation { p, q });
    }
    for point in check_maximality(xi_g, u) {
        report.push(TupleViolation::NotMaximal { point });
    }

    let (g, s) = (xi_g.ordered(), xi_s.ordered());
    for (i, (&geometric, &smooth)) in g.iter().zip(&s).enumerate() {
        if geometric < smooth {
            report.push(TupleViolation::Dominance {
                i: i + 1,
                geometric,
                smooth,
            });
        }
    }

    let keys = sorted_domain(xi_g, u);
    for &p in &keys {
        for r in 0..=xi_g.rank(p) {
            let witnessed = keys
                .iter()
                .any(|&q| xi_s.rank(q) >= r && u.distance(p, q) <= 4.0 * pow2(r));
            if !witnessed {
                report.push(TupleViolation::NoSmoothWitness {
                    r,
                    point: u.label(p).clone(),
                });
            }
        }
    }
    report
}

/// Lower bound `0.5 * 2^(xi*(k+1))` on the optimal k-center cost, valid when
/// `xi` is separated.
pub fn opt_lower_bound(xi: &RankFunction, k: usize) -> Result<f64> {
    if k == 0 || k >= xi.len() {
        return Err(Error::Argument(format!(
            "lower bound needs 1 <= k <= |P| - 1, got k = {k} with |P| = {}",
            xi.len()
        )));
    }
    Ok(0.5 * pow2(ordered_rank(xi, k + 1)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[(&str, f64, u32)], delta: u64) -> (MetricUniverse, RankFunction) {
        let mut u = MetricUniverse::euclidean(1, delta).unwrap();
        let mut xi = RankFunction::new();
        for &(id, x, r) in points {
            let k = u.add_point(id.into(), vec![x]).unwrap();
            xi.set(k, r);
        }
        (u, xi)
    }

    fn worked() -> (MetricUniverse, RankFunction) {
        line(&[("p1", 0.0, 4), ("p2", 1.0, 0), ("p3", 4.0, 2)], 8)
    }

    #[test]
    fn ordered_rank_examples() {
        let (_, xi) = worked();
        assert_eq!(ordered_rank(&xi, 1).unwrap(), 4);
        assert_eq!(ordered_rank(&xi, 2).unwrap(), 2);
        assert_eq!(ordered_rank(&xi, 3).unwrap(), 0);
        assert!(ordered_rank(&xi, 0).is_err());
        assert!(ordered_rank(&xi, 4).is_err());
    }

    #[test]
    fn rank_function_bookkeeping() {
        let (u, mut xi) = worked();
        let p2 = u.find("p2").unwrap();
        assert_eq!(xi.len(), 3);
        assert_eq!(xi.set(p2, 3), Some(0));
        assert_eq!(xi.len(), 3);
        assert_eq!(xi.remove(p2), Some(3));
        assert_eq!(xi.remove(p2), None);
        assert_eq!(xi.len(), 2);
        assert!(!xi.contains(p2));
    }

    #[test]
    fn separation_examples() {
        let (u, xi) = line(&[("p1", 0.0, 4), ("p2", 1.0, 0)], 8);
        assert!(check_separation(&xi, &u).is_empty());
        let (u, xi) = line(&[("p1", 0.0, 1), ("p2", 1.0, 1)], 8);
        assert_eq!(
            check_separation(&xi, &u),
            vec![(PointId::from("p1"), PointId::from("p2"))]
        );
        let u = MetricUniverse::euclidean(1, 8).unwrap();
        assert!(check_separation(&RankFunction::new(), &u).is_empty());
    }

    #[test]
    fn maximality_examples() {
        let (u, xi) = worked();
        assert!(check_maximality(&xi, &u).is_empty());
        let (u, xi) = line(&[("p1", 0.0, 0)], 8);
        assert!(check_maximality(&xi, &u).is_empty());
        let (u, xi) = line(&[("p1", 0.0, 2), ("p2", 8.0, 2)], 8);
        assert_eq!(
            check_maximality(&xi, &u),
            vec![PointId::from("p1"), PointId::from("p2")]
        );
    }

    #[test]
    fn maximality_needs_strict_distance() {
        // d = 2 = 2^(0+1) is not close enough for a rank-0 point
        let (u, xi) = line(&[("a", 0.0, 3), ("b", 2.0, 0)], 8);
        assert_eq!(check_maximality(&xi, &u), vec![PointId::from("b")]);
    }

    #[test]
    fn valid_tuple_identical_functions() {
        let (u, xi) = worked();
        assert!(check_valid_tuple(&xi, &xi, &u).is_valid());
    }

    #[test]
    fn valid_tuple_after_worked_deletion() {
        let (u, xi) = line(&[("p2", 1.0, 1), ("p3", 4.0, 4)], 8);
        assert!(check_valid_tuple(&xi, &xi.clone(), &u).is_valid());
    }

    #[test]
    fn valid_tuple_missing_smooth_witness() {
        let (u, xi_g) = line(&[("p", 0.0, 3)], 8);
        let p = u.find("p").unwrap();
        let xi_s = RankFunction::from_pairs([(p, 0)]);
        let report = check_valid_tuple(&xi_g, &xi_s, &u);
        let rs: Vec<u32> = report
            .violations
            .iter()
            .map(|v| match v {
                TupleViolation::NoSmoothWitness { r, .. } => *r,
                other => panic!("unexpected {other}"),
            })
            .collect();
        assert_eq!(rs, vec![1, 2, 3]);
    }

    #[test]
    fn valid_tuple_dominance_failure() {
        let (u, xi_g) = line(&[("a", 0.0, 1), ("b", 5.0, 0)], 8);
        let (a, b) = (u.find("a").unwrap(), u.find("b").unwrap());
        let xi_s = RankFunction::from_pairs([(a, 2), (b, 0)]);
        let report = check_valid_tuple(&xi_g, &xi_s, &u);
        assert!(report.violations.contains(&TupleViolation::Dominance {
            i: 1,
            geometric: 1,
            smooth: 2
        }));
    }

    #[test]
    fn valid_tuple_domain_mismatch() {
        let (u, xi_g) = worked();
        let mut xi_s = xi_g.clone();
        xi_s.remove(u.find("p2").unwrap());
        let report = check_valid_tuple(&xi_g, &xi_s, &u);
        assert_eq!(
            report.violations,
            vec![TupleViolation::DomainMismatch { point: "p2".into() }]
        );
    }

    #[test]
    fn lower_bound_examples() {
        let (_, xi) = worked();
        assert_eq!(opt_lower_bound(&xi, 1).unwrap(), 2.0);
        assert_eq!(opt_lower_bound(&xi, 2).unwrap(), 0.5);
        assert!(opt_lower_bound(&xi, 3).is_err());
        assert!(opt_lower_bound(&xi, 0).is_err());
    }

    #[test]
    fn chain_bound_holds_for_maximal_worked_ranks() {
        let (u, xi) = worked();
        assert!(check_maximality_chain(&xi, &u).is_empty());
    }

    #[test]
    fn cap_witness() {
        let (_, xi) = worked();
        assert!(has_cap_witness(&xi, 4));
        assert!(!has_cap_witness(&xi, 5));
        assert!(has_cap_witness(&RankFunction::new(), 4));
    }
}
