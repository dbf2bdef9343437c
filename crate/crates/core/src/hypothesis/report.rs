use serde::{Deserialize, Serialize};

use super::sampling::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssumptionId {
    A1,
    A2,
    #[serde(rename = "A2'")]
    A2Prime,
    A4a,
    A4b,
    A5,
    A6,
    A7a,
    A7b,
    MonotoneCoeffs,
    InitMonotone,
}

impl AssumptionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            AssumptionId::A1 => "A1",
            AssumptionId::A2 => "A2",
            AssumptionId::A2Prime => "A2'",
            AssumptionId::A4a => "A4a",
            AssumptionId::A4b => "A4b",
            AssumptionId::A5 => "A5",
            AssumptionId::A6 => "A6",
            AssumptionId::A7a => "A7a",
            AssumptionId::A7b => "A7b",
            AssumptionId::MonotoneCoeffs => "MonotoneCoeffs",
            AssumptionId::InitMonotone => "InitMonotone",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Where an assumption is worst satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub node: Option<usize>,
}

impl From<&Sample> for Witness {
    fn from(s: &Sample) -> Self {
        Self { t: s.t, x: s.x.clone(), u: s.u.clone(), p: s.p.clone(), node: None }
    }
}

/// One assumption's verdict. `margin` is the worst slack over all samples;
/// negative means violated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub assumption: AssumptionId,
    pub status: Status,
    pub margin: f64,
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub note: String,
}

impl ReportEntry {
    pub fn not_applicable(assumption: AssumptionId, note: impl Into<String>) -> Self {
        Self { assumption, status: Status::NotApplicable, margin: 0.0, witness: None, note: note.into() }
    }

    /// Pass iff `margin >= -tol`; the witness is kept for failures and for
    /// passes alike (it marks the tightest sample).
    pub(crate) fn from_margin(assumption: AssumptionId, margin: f64, tol: f64, witness: Option<Witness>) -> Self {
        let status = if margin >= -tol { Status::Pass } else { Status::Fail };
        Self { assumption, status, margin, witness, note: String::new() }
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Estimated structural constants.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EstimatedConstants {
    pub kappa: Option<f64>,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub entries: Vec<ReportEntry>,
    pub constants: EstimatedConstants,
    /// Sampling cannot prove universally quantified statements.
    pub provenance: String,
}

impl HypothesisReport {
    pub fn new(entries: Vec<ReportEntry>, constants: EstimatedConstants) -> Self {
        Self { entries, constants, provenance: "sampled, not proven".into() }
    }

    pub fn entry(&self, id: AssumptionId) -> Option<&ReportEntry> {
        self.entries.iter().find(|e| e.assumption == id)
    }

    pub fn status(&self, id: AssumptionId) -> Option<Status> {
        self.entry(id).map(|e| e.status)
    }

    /// True iff every listed assumption was checked and passed.
    pub fn all_pass(&self, ids: &[AssumptionId]) -> bool {
        ids.iter().all(|id| self.status(*id) == Some(Status::Pass))
    }

    pub fn any_fail(&self, ids: &[AssumptionId]) -> bool {
        ids.iter().any(|id| self.status(*id) == Some(Status::Fail))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
