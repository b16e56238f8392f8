//! The k-center maintainer: a triple plus the current center set.

use std::cmp::Reverse;
use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{euclidean, validate_universe, MetricUniverse, PointId, PointKey};
use crate::ops::{SmoothRankDelta, TripleState};
use crate::oracle;
use crate::ranks::ordered_rank;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum UpdateEvent {
    Insert {
        id: PointId,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coords: Option<Vec<f64>>,
    },
    Delete {
        id: PointId,
    },
}

impl UpdateEvent {
    pub fn insert(id: impl Into<PointId>, coords: Option<Vec<f64>>) -> Self {
        UpdateEvent::Insert {
            id: id.into(),
            coords,
        }
    }

    pub fn delete(id: impl Into<PointId>) -> Self {
        UpdateEvent::Delete { id: id.into() }
    }

    pub fn id(&self) -> &PointId {
        match self {
            UpdateEvent::Insert { id, .. } | UpdateEvent::Delete { id } => id,
        }
    }

    pub fn kind(&self) -> EventKind {
        match self {
            UpdateEvent::Insert { .. } => EventKind::Insert,
            UpdateEvent::Delete { .. } => EventKind::Delete,
        }
    }
}

impl fmt::Display for UpdateEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpdateEvent::Insert { id, .. } => write!(f, "+{id}"),
            UpdateEvent::Delete { id } => write!(f, "-{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Insert,
    Delete,
}

/// Change of the center set across one update.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CenterDiff {
    /// Sorted by label.
    pub added: Vec<PointId>,
    /// Sorted by label.
    pub removed: Vec<PointId>,
    pub swaps: usize,
}

impl CenterDiff {
    pub fn sym_diff(&self) -> usize {
        self.added.len() + self.removed.len()
    }
}

/// Result of a successful update.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// 1-based index of the update.
    pub step: u64,
    pub diff: CenterDiff,
    pub smooth: SmoothRankDelta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepRecourse {
    pub kind: EventKind,
    pub swaps: usize,
    pub sym_diff: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RecourseSummary {
    pub steps: u64,
    pub insert_steps: u64,
    pub delete_steps: u64,
    pub max_insert_swaps: usize,
    pub max_delete_swaps: usize,
    pub mean_insert_swaps: f64,
    pub mean_delete_swaps: f64,
    pub max_insert_sym_diff: usize,
    pub max_delete_sym_diff: usize,
}

/// Breach of the rule that picks centers from the smooth ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CenterRuleViolation {
    WrongSize { expected: usize, actual: usize },
    Inactive(PointId),
    MissingAboveCut { point: PointId, rank: u32, cut: u32 },
}

impl fmt::Display for CenterRuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CenterRuleViolation::WrongSize { expected, actual } => {
                write!(f, "{actual} centers, expected {expected}")
            }
            CenterRuleViolation::Inactive(p) => write!(f, "center {p} is not active"),
            CenterRuleViolation::MissingAboveCut { point, rank, cut } => {
                write!(
                    f,
                    "{point} has smooth rank {rank} > {cut} but is not a center"
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clusterer {
    universe: MetricUniverse,
    triple: TripleState,
    k: usize,
    /// Sorted by label.
    centers: Vec<PointKey>,
    step: u64,
    recourse_log: Vec<StepRecourse>,
}

impl Clusterer {
    /// Empty clusterer over `universe`. Every declared point of a matrix
    /// universe must satisfy the metric axioms.
    pub fn new(universe: MetricUniverse, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("k must be positive".into()));
        }
        let report = validate_universe(&universe, &[]);
        if !report.is_valid() {
            return Err(Error::Input(format!("invalid universe: {report}")));
        }
        Ok(Clusterer {
            universe,
            triple: TripleState::new(),
            k,
            centers: Vec::new(),
            step: 0,
            recourse_log: Vec::new(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn universe(&self) -> &MetricUniverse {
        &self.universe
    }

    pub fn triple(&self) -> &TripleState {
        &self.triple
    }

    pub fn recourse_log(&self) -> &[StepRecourse] {
        &self.recourse_log
    }

    /// Active points, sorted by label.
    pub fn active(&self) -> Vec<PointKey> {
        self.triple.points_by_label(&self.universe)
    }

    pub fn center_keys(&self) -> &[PointKey] {
        &self.centers
    }

    /// Current centers, sorted by label.
    pub fn centers(&self) -> Vec<PointId> {
        self.centers
            .iter()
            .map(|&c| self.universe.label(c).clone())
            .collect()
    }

    pub fn is_active(&self, id: &PointId) -> bool {
        self.universe.key(id).is_ok_and(|p| self.triple.contains(p))
    }

    /// Key for an insertion, adding the point to a Euclidean universe if it
    /// is new. Distance bounds are checked before the universe is touched.
    fn resolve_insert(&mut self, id: &PointId, coords: Option<&[f64]>) -> Result<PointKey> {
        if self.is_active(id) {
            return Err(Error::State(format!("{id} is already active")));
        }
        match (coords, self.universe.find(id.as_str())) {
            (None, Some(p)) => Ok(p),
            (None, None) if self.universe.is_matrix() => Err(Error::Input(format!(
                "{id} is not declared in the universe"
            ))),
            (None, None) => Err(Error::Input(format!(
                "insert of new point {id} needs coords"
            ))),
            (Some(_), _) if self.universe.is_matrix() => Err(Error::Input(format!(
                "coords given for {id} in a matrix universe"
            ))),
            (Some(x), Some(p)) => {
                if self.universe.coords(p) != Some(x) {
                    return Err(Error::Input(format!(
                        "{id} redeclared with different coords"
                    )));
                }
                Ok(p)
            }
            (Some(x), None) => {
                self.check_new_coords(id, x)?;
                self.universe.add_point(id.clone(), x.to_vec())
            }
        }
    }

    fn check_new_coords(&self, id: &PointId, x: &[f64]) -> Result<()> {
        let delta = self.universe.delta() as f64;
        for &p in self.triple.smooth().domain() {
            let Some(y) = self.universe.coords(p) else {
                continue;
            };
            if y.len() != x.len() {
                break;
            }
            let d = euclidean(x, y);
            if !(1.0..=delta).contains(&d) {
                return Err(Error::Input(format!(
                    "d({id}, {}) = {d} is outside [1, {}]",
                    self.universe.label(p),
                    self.universe.delta()
                )));
            }
        }
        Ok(())
    }

    /// Apply one update and recompute the centers.
    pub fn apply_update(&mut self, event: &UpdateEvent) -> Result<StepOutcome> {
        let smooth = match event {
            UpdateEvent::Insert { id, coords } => {
                let q = self.resolve_insert(id, coords.as_deref())?;
                self.triple.insert(q, &self.universe)?
            }
            UpdateEvent::Delete { id } => {
                let q = self
                    .universe
                    .find(id.as_str())
                    .filter(|&q| self.triple.contains(q))
                    .ok_or_else(|| Error::State(format!("{id} is not active")))?;
                self.triple.delete(q, &self.universe)?
            }
        };
        let previous = std::mem::take(&mut self.centers);
        self.centers = self.select_centers(&previous);
        let diff = self.diff(&previous);
        self.step += 1;
        self.recourse_log.push(StepRecourse {
            kind: event.kind(),
            swaps: diff.swaps,
            sym_diff: diff.sym_diff(),
        });
        Ok(StepOutcome {
            step: self.step,
            diff,
            smooth,
        })
    }

    /// All of P when `|P| <= k`, otherwise the k largest smooth ranks, ties
    /// going to previous centers first and then to the least label.
    fn select_centers(&self, previous: &[PointKey]) -> Vec<PointKey> {
        let mut points = self.active();
        if points.len() > self.k {
            let was: HashSet<_> = previous.iter().copied().collect();
            let xi_s = self.triple.smooth();
            // `points` is label-sorted, so a stable sort settles the last tie
            points.sort_by_key(|&p| (Reverse(xi_s.rank(p)), !was.contains(&p)));
            points.truncate(self.k);
            points.sort_by(|&a, &b| self.universe.cmp_labels(a, b));
        }
        points
    }

    fn diff(&self, previous: &[PointKey]) -> CenterDiff {
        let labels = |from: &[PointKey], minus: &[PointKey]| -> Vec<PointId> {
            from.iter()
                .filter(|p| !minus.contains(p))
                .map(|&p| self.universe.label(p).clone())
                .collect()
        };
        let added = labels(&self.centers, previous);
        let removed = labels(previous, &self.centers);
        let swaps = added.len().max(removed.len());
        CenterDiff {
            added,
            removed,
            swaps,
        }
    }

    /// `max_{p in P} d(p, C)`.
    pub fn current_cost(&self) -> f64 {
        oracle::cost(self.triple.smooth().domain(), &self.centers, &self.universe).unwrap_or(0.0)
    }

    /// The `kk` points of largest smooth rank, least label first among ties,
    /// sorted by label.
    pub fn top_smooth(&self, kk: usize) -> Vec<PointKey> {
        let mut points = self.active();
        let xi_s = self.triple.smooth();
        points.sort_by_key(|&p| Reverse(xi_s.rank(p)));
        points.truncate(kk);
        points.sort_by(|&a, &b| self.universe.cmp_labels(a, b));
        points
    }

    pub fn check_center_rule(&self) -> Vec<CenterRuleViolation> {
        let mut out = Vec::new();
        let xi_s = self.triple.smooth();
        let n = xi_s.len();
        let expected = n.min(self.k);
        if self.centers.len() != expected {
            out.push(CenterRuleViolation::WrongSize {
                expected,
                actual: self.centers.len(),
            });
        }
        for &c in &self.centers {
            if !self.triple.contains(c) {
                out.push(CenterRuleViolation::Inactive(
                    self.universe.label(c).clone(),
                ));
            }
        }
        if n > self.k {
            let cut = ordered_rank(xi_s, self.k + 1).expect("k + 1 <= |P|");
            for p in self.active() {
                let rank = xi_s.rank(p);
                if rank > cut && !self.centers.contains(&p) {
                    out.push(CenterRuleViolation::MissingAboveCut {
                        point: self.universe.label(p).clone(),
                        rank,
                        cut,
                    });
                }
            }
        }
        out
    }

    pub fn recourse_summary(&self) -> RecourseSummary {
        let mut s = RecourseSummary {
            steps: self.step,
            ..RecourseSummary::default()
        };
        let (mut ins_total, mut del_total) = (0usize, 0usize);
        for r in &self.recourse_log {
            match r.kind {
                EventKind::Insert => {
                    s.insert_steps += 1;
                    ins_total += r.swaps;
                    s.max_insert_swaps = s.max_insert_swaps.max(r.swaps);
                    s.max_insert_sym_diff = s.max_insert_sym_diff.max(r.sym_diff);
                }
                EventKind::Delete => {
                    s.delete_steps += 1;
                    del_total += r.swaps;
                    s.max_delete_swaps = s.max_delete_swaps.max(r.swaps);
                    s.max_delete_sym_diff = s.max_delete_sym_diff.max(r.sym_diff);
                }
            }
        }
        let mean = |total: usize, n: u64| if n == 0 { 0.0 } else { total as f64 / n as f64 };
        s.mean_insert_swaps = mean(ins_total, s.insert_steps);
        s.mean_delete_swaps = mean(del_total, s.delete_steps);
        s
    }
}
