//! Per-step report records, serialized as one JSON object per line.

use serde::{Deserialize, Serialize};

use crate::clusterer::EventKind;
use crate::metric::PointId;
use crate::oracle::OracleMethod;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub method: OracleMethod,
    pub value: f64,
    /// `cost / value`; absent while every point is a center.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
}

/// Verdicts of the invariant audits for one step. Checks that do not apply
/// to the step are absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub valid_triple: bool,
    pub separation: bool,
    pub maximality: bool,
    pub tuple: bool,
    pub cap_witness: bool,
    pub smooth_churn: bool,
    pub diameter: bool,
    pub center_rule: bool,
    pub recourse: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.valid_triple
            && self.separation
            && self.maximality
            && self.tuple
            && self.cap_witness
            && self.smooth_churn
            && self.diameter
            && self.center_rule
            && self.recourse
            && self.lower_bound != Some(false)
            && self.ratio != Some(false)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: u64,
    pub event: EventKind,
    pub id: PointId,
    /// `|P|` after the step.
    pub active: usize,
    /// Sorted by label.
    pub centers: Vec<PointId>,
    pub added: Vec<PointId>,
    pub removed: Vec<PointId>,
    pub swaps: usize,
    pub sym_diff: usize,
    pub cost: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audit: Option<AuditReport>,
}

impl StepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report fields serialize")
    }
}
