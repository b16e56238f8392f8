//! Ground-truth k-center computations used by tests and reports.
//!
//! Nothing here touches the forest or the rank functions: the exact optimum
//! is plain enumeration over candidate center sets drawn from the whole
//! universe, and the farthest-first traversal is the textbook greedy.

use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{MetricUniverse, PointId, PointKey};

/// Default limit on the number of candidate center sets enumerated by
/// [`brute_force_opt`].
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleMethod {
    Exact,
    Gonzalez,
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleMethod::Exact => f.write_str("exact"),
            OracleMethod::Gonzalez => f.write_str("gonzalez"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    /// Centers achieving `value`, sorted by label.
    pub witness_centers: Vec<PointId>,
    pub method: OracleMethod,
}

/// `max_{p in active} min_{c in centers} d(p, c)`; zero for no points.
pub fn cost(active: &[PointKey], centers: &[PointKey], u: &MetricUniverse) -> Result<f64> {
    if centers.is_empty() && !active.is_empty() {
        return Err(Error::Argument(
            "cost of a nonempty set needs at least one center".into(),
        ));
    }
    Ok(active
        .iter()
        .map(|&p| {
            centers
                .iter()
                .map(|&c| u.distance(p, c))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max))
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

fn labels(keys: &[PointKey], u: &MetricUniverse) -> Vec<PointId> {
    let mut out: Vec<_> = keys.iter().map(|&k| u.label(k).clone()).collect();
    out.sort();
    out
}

/// Exact `OPT_k(active)` with centers drawn from the whole universe.
///
/// The witness is the lexicographically least optimal center set (sets are
/// compared as label-sorted sequences).
pub fn brute_force_opt(
    active: &[PointKey],
    k: usize,
    u: &MetricUniverse,
    enumeration_cap: u64,
) -> Result<OracleResult> {
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    if k >= active.len() {
        return Ok(OracleResult {
            value: 0.0,
            witness_centers: labels(active, u),
            method: OracleMethod::Exact,
        });
    }
    let candidates = u.keys_by_label();
    let size = k.min(candidates.len());
    let count = binomial(candidates.len() as u64, size as u64).unwrap_or(u64::MAX);
    if count > enumeration_cap {
        return Err(Error::Resource(format!(
            "C({}, {size}) = {count} candidate sets exceeds the cap {enumeration_cap}",
            candidates.len()
        )));
    }
    let mut best: Option<(f64, Vec<PointKey>)> = None;
    for centers in candidates.iter().copied().combinations(size) {
        let value = cost(active, &centers, u)?;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, centers));
        }
    }
    let (value, centers) = best.expect("at least one candidate set");
    Ok(OracleResult {
        value,
        witness_centers: labels(&centers, u),
        method: OracleMethod::Exact,
    })
}

/// Farthest-first traversal from `seed` (default: least label). Farthest
/// ties go to the least label. Within a factor 2 of the exact optimum.
pub fn gonzalez(
    active: &[PointKey],
    k: usize,
    u: &MetricUniverse,
    seed: Option<PointKey>,
) -> Result<OracleResult> {
    if active.is_empty() {
        return Err(Error::Argument(
            "farthest-first traversal needs a point".into(),
        ));
    }
    if k == 0 {
        return Err(Error::Argument("k must be positive".into()));
    }
    let mut points = active.to_vec();
    points.sort_by(|&a, &b| u.cmp_labels(a, b));
    let seed = match seed {
        Some(s) if points.contains(&s) => s,
        Some(s) => {
            return Err(Error::Argument(format!(
                "seed {} is not active",
                u.label(s)
            )))
        }
        None => points[0],
    };
    let mut centers = vec![seed];
    let mut nearest: Vec<f64> = points.iter().map(|&p| u.distance(p, seed)).collect();
    while centers.len() < k.min(points.len()) {
        let (idx, _) = nearest
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &d)| {
                if d > best.1 {
                    (i, d)
                } else {
                    best
                }
            });
        let next = points[idx];
        centers.push(next);
        for (i, &p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(u.distance(p, next));
        }
    }
    let value = nearest.iter().copied().fold(0.0, f64::max);
    Ok(OracleResult {
        value,
        witness_centers: labels(&centers, u),
        method: OracleMethod::Gonzalez,
    })
}
