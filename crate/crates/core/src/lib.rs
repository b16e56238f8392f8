//! Consistent k-center clustering over a fully dynamic point stream.
//!
//! Points carry a geometric and a smooth rank kept in sync with a leveled
//! forest; the k points of highest smooth rank are the centers.

pub mod clusterer;
pub mod error;
pub mod forest;
pub mod harness;
pub mod metric;
pub mod ops;
pub mod oracle;
pub mod ranks;
pub mod validation;

pub use clusterer::{CenterDiff, Clusterer, UpdateEvent};
pub use error::{Error, Result};
pub use forest::{LeveledForest, NodeId};
pub use metric::{MetricUniverse, PointId, PointKey};
pub use ops::{SmoothRankDelta, TripleState};
pub use ranks::RankFunction;
pub use validation::ValidationReport;
