//! Finite metric universes.
//!
//! A [`MetricUniverse`] owns every point that may ever become active, either
//! as Euclidean coordinates (registered as points arrive) or as an explicit
//! distance matrix declared up front. Points are interned into dense
//! [`PointKey`] handles; the string [`PointId`] carries the total order used to
//! break every tie deterministically.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::validation::ValidationReport;

/// External point label. Ordered lexicographically on its string form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(String);

impl PointId {
    pub fn new(id: impl Into<String>) -> Self {
        PointId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PointId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PointId {
    fn from(s: &str) -> Self {
        PointId(s.to_owned())
    }
}

impl From<String> for PointId {
    fn from(s: String) -> Self {
        PointId(s)
    }
}

/// Dense handle of a point interned in a [`MetricUniverse`].
///
/// Keys are only meaningful for the universe that issued them. Their numeric
/// order is registration order, not label order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointKey(u32);

impl PointKey {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// `2^exp` as an exactly representable `f64`.
pub fn pow2(exp: u32) -> f64 {
    assert!(exp <= 1023, "2^{exp} is not a finite f64");
    f64::from_bits((1023 + exp as u64) << 52)
}

/// Largest rank any point can receive: `ceil(log2(delta)) + 1`.
pub fn rank_cap(delta: u64) -> Result<u32> {
    if delta < 1 {
        return Err(Error::Argument("delta must be at least 1".into()));
    }
    let ceil_log2 = if delta == 1 {
        0
    } else {
        u64::BITS - (delta - 1).leading_zeros()
    };
    Ok(ceil_log2 + 1)
}

#[derive(Debug, Clone, PartialEq)]
enum Geometry {
    Euclidean { dim: usize, coords: Vec<Vec<f64>> },
    Matrix { n: usize, dist: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricUniverse {
    labels: Vec<PointId>,
    lookup: HashMap<PointId, PointKey>,
    geometry: Geometry,
    delta: u64,
}

impl MetricUniverse {
    /// Empty Euclidean universe of the given dimension. Points are added with
    /// [`MetricUniverse::add_point`].
    pub fn euclidean(dim: usize, delta: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Argument("dimension must be positive".into()));
        }
        rank_cap(delta)?;
        Ok(Self {
            labels: Vec::new(),
            lookup: HashMap::new(),
            geometry: Geometry::Euclidean {
                dim,
                coords: Vec::new(),
            },
            delta,
        })
    }

    /// Universe given by an explicit distance matrix over `ids`.
    ///
    /// Only the shape and entry domain are checked here; metric axioms are
    /// reported by [`validate_universe`].
    pub fn from_matrix(ids: Vec<PointId>, matrix: Vec<Vec<f64>>, delta: u64) -> Result<Self> {
        rank_cap(delta)?;
        let n = ids.len();
        if matrix.len() != n || matrix.iter().any(|row| row.len() != n) {
            return Err(Error::Input(format!(
                "distance matrix must be {n}x{n} to match the declared points"
            )));
        }
        let mut lookup = HashMap::with_capacity(n);
        for (i, id) in ids.iter().enumerate() {
            if lookup.insert(id.clone(), PointKey(i as u32)).is_some() {
                return Err(Error::Input(format!("duplicate point id {id}")));
            }
        }
        let mut dist = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::Input(format!(
                        "distance ({}, {}) = {d} is not a finite nonnegative number",
                        ids[i], ids[j]
                    )));
                }
                dist.push(d);
            }
        }
        Ok(Self {
            labels: ids,
            lookup,
            geometry: Geometry::Matrix { n, dist },
            delta,
        })
    }

    /// Register a Euclidean point. Re-registering an id with identical
    /// coordinates returns the existing key.
    pub fn add_point(&mut self, id: PointId, point: Vec<f64>) -> Result<PointKey> {
        let Geometry::Euclidean { dim, coords } = &mut self.geometry else {
            return Err(Error::Input(format!(
                "cannot add {id}: matrix universes are fixed at construction"
            )));
        };
        if point.len() != *dim {
            return Err(Error::Input(format!(
                "point {id} has {} coordinates, expected {dim}",
                point.len()
            )));
        }
        if point.iter().any(|c| !c.is_finite()) {
            return Err(Error::Input(format!(
                "point {id} has non-finite coordinates"
            )));
        }
        if let Some(&key) = self.lookup.get(&id) {
            if coords[key.index()] != point {
                return Err(Error::Input(format!(
                    "point {id} re-declared with different coordinates"
                )));
            }
            return Ok(key);
        }
        let key = PointKey(self.labels.len() as u32);
        coords.push(point);
        self.lookup.insert(id.clone(), key);
        self.labels.push(id);
        Ok(key)
    }

    pub fn key(&self, id: &PointId) -> Result<PointKey> {
        self.lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::unknown_point(id))
    }

    pub fn find(&self, id: &str) -> Option<PointKey> {
        self.lookup.get(&PointId::from(id)).copied()
    }

    pub fn label(&self, key: PointKey) -> &PointId {
        &self.labels[key.index()]
    }

    pub fn cmp_labels(&self, a: PointKey, b: PointKey) -> Ordering {
        self.label(a).cmp(self.label(b))
    }

    /// Distance between two interned points.
    pub fn distance(&self, a: PointKey, b: PointKey) -> f64 {
        match &self.geometry {
            Geometry::Euclidean { coords, .. } => {
                if a == b {
                    return 0.0;
                }
                euclidean(&coords[a.index()], &coords[b.index()])
            }
            Geometry::Matrix { n, dist } => dist[a.index() * n + b.index()],
        }
    }

    /// Distance between two labelled points.
    pub fn distance_between(&self, p: &PointId, q: &PointId) -> Result<f64> {
        Ok(self.distance(self.key(p)?, self.key(q)?))
    }

    pub fn coords(&self, key: PointKey) -> Option<&[f64]> {
        match &self.geometry {
            Geometry::Euclidean { coords, .. } => Some(&coords[key.index()]),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn delta(&self) -> u64 {
        self.delta
    }

    pub fn rank_cap(&self) -> u32 {
        rank_cap(self.delta).expect("delta validated at construction")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn is_matrix(&self) -> bool {
        matches!(self.geometry, Geometry::Matrix { .. })
    }

    /// Dimension of a Euclidean universe, `None` in matrix mode.
    pub fn dim(&self) -> Option<usize> {
        match &self.geometry {
            Geometry::Euclidean { dim, .. } => Some(*dim),
            Geometry::Matrix { .. } => None,
        }
    }

    /// All registered keys in registration order.
    pub fn keys(&self) -> impl Iterator<Item = PointKey> + '_ {
        (0..self.labels.len() as u32).map(PointKey)
    }

    /// All registered keys sorted by label.
    pub fn keys_by_label(&self) -> Vec<PointKey> {
        let mut keys: Vec<_> = self.keys().collect();
        keys.sort_by(|&a, &b| self.cmp_labels(a, b));
        keys
    }
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Relative slack for the triangle inequality on explicit matrices, so that
/// matrices computed from coordinates are not rejected for last-bit rounding.
pub const TRIANGLE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonzeroSelfDistance {
        point: PointId,
        distance: f64,
    },
    Asymmetric {
        p: PointId,
        q: PointId,
        pq: f64,
        qp: f64,
    },
    ZeroDistinct {
        p: PointId,
        q: PointId,
    },
    Triangle {
        a: PointId,
        b: PointId,
        c: PointId,
        ac: f64,
        ab: f64,
        bc: f64,
    },
    TooClose {
        p: PointId,
        q: PointId,
        distance: f64,
    },
    TooFar {
        p: PointId,
        q: PointId,
        distance: f64,
        delta: u64,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonzeroSelfDistance { point, distance } => {
                write!(f, "d({point},{point}) = {distance} != 0")
            }
            MetricViolation::Asymmetric { p, q, pq, qp } => {
                write!(f, "asymmetric: d({p},{q}) = {pq} but d({q},{p}) = {qp}")
            }
            MetricViolation::ZeroDistinct { p, q } => {
                write!(f, "d({p},{q}) = 0 for distinct points")
            }
            MetricViolation::Triangle {
                a,
                b,
                c,
                ac,
                ab,
                bc,
            } => write!(
                f,
                "triangle inequality: d({a},{c}) = {ac} > d({a},{b}) + d({b},{c}) = {}",
                ab + bc
            ),
            MetricViolation::TooClose { p, q, distance } => {
                write!(f, "distance {distance} < 1 between {p} and {q}")
            }
            MetricViolation::TooFar {
                p,
                q,
                distance,
                delta,
            } => {
                write!(f, "distance {distance} > delta {delta} between {p} and {q}")
            }
        }
    }
}

/// Check the metric axioms (matrix mode) and the `[1, delta]` pairwise
/// bounds among the `active` points.
pub fn validate_universe(
    u: &MetricUniverse,
    active: &[PointKey],
) -> ValidationReport<MetricViolation> {
    let mut report = ValidationReport::new();
    if u.is_matrix() {
        let keys: Vec<_> = u.keys().collect();
        for &p in &keys {
            let d = u.distance(p, p);
            if d != 0.0 {
                report.push(MetricViolation::NonzeroSelfDistance {
                    point: u.label(p).clone(),
                    distance: d,
                });
            }
        }
        for (i, &p) in keys.iter().enumerate() {
            for &q in &keys[i + 1..] {
                let (pq, qp) = (u.distance(p, q), u.distance(q, p));
                if pq != qp {
                    report.push(MetricViolation::Asymmetric {
                        p: u.label(p).clone(),
                        q: u.label(q).clone(),
                        pq,
                        qp,
                    });
                }
                if pq == 0.0 || qp == 0.0 {
                    report.push(MetricViolation::ZeroDistinct {
                        p: u.label(p).clone(),
                        q: u.label(q).clone(),
                    });
                }
            }
        }
        for &a in &keys {
            for &c in &keys {
                if a == c {
                    continue;
                }
                let ac = u.distance(a, c);
                for &b in &keys {
                    if b == a || b == c {
                        continue;
                    }
                    let (ab, bc) = (u.distance(a, b), u.distance(b, c));
                    if ac > (ab + bc) * (1.0 + TRIANGLE_SLACK) {
                        report.push(MetricViolation::Triangle {
                            a: u.label(a).clone(),
                            b: u.label(b).clone(),
                            c: u.label(c).clone(),
                            ac,
                            ab,
                            bc,
                        });
                    }
                }
            }
        }
    }
    let delta = u.delta() as f64;
    for (i, &p) in active.iter().enumerate() {
        for &q in &active[i + 1..] {
            let d = u.distance(p, q);
            if d < 1.0 {
                report.push(MetricViolation::TooClose {
                    p: u.label(p).clone(),
                    q: u.label(q).clone(),
                    distance: d,
                });
            } else if d > delta {
                report.push(MetricViolation::TooFar {
                    p: u.label(p).clone(),
                    q: u.label(q).clone(),
                    distance: d,
                    delta: u.delta(),
                });
            }
        }
    }
    report
}
