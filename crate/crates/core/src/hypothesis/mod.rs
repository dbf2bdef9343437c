//! Sample-based verification of the structural assumptions of a problem.
//!
//! The assumptions are universally quantified; every check here evaluates
//! them on a finite deterministic sample and the report says so.

mod checks;
mod report;
mod sampling;

pub use checks::{
    check_compatibility, check_dissipativity, check_growth, check_initial_monotonicity,
    check_monotone_coefficients, check_parabolicity, check_positivity_source, CheckTolerances,
    DissipativityMode,
};
pub use report::{AssumptionId, EstimatedConstants, HypothesisReport, ReportEntry, Status, Witness};
pub use sampling::{Sample, SampleBudget, Sampler, StateRegion};

use crate::error::Result;
use crate::model::{Majorants, ProblemSpec};
use crate::par::{self, ExecPolicy};

/// What to check and with which budget.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub budget: SampleBudget,
    pub tolerances: CheckTolerances,
    pub majorants: Option<Majorants>,
    pub assumptions: Vec<AssumptionId>,
    pub exec: ExecPolicy,
}

impl CheckConfig {
    pub fn new(budget: SampleBudget, assumptions: Vec<AssumptionId>) -> Self {
        Self {
            budget,
            tolerances: CheckTolerances::default(),
            majorants: None,
            assumptions,
            exec: ExecPolicy::default(),
        }
    }
}

enum Outcome {
    Entries(Vec<ReportEntry>),
    Kappa(ReportEntry, f64),
    Dissipative(ReportEntry, f64, f64),
}

/// Runs the selected checks (independently, possibly in parallel) and
/// assembles the report in selection order.
pub fn check_all(spec: &ProblemSpec, cfg: &CheckConfig) -> Result<HypothesisReport> {
    cfg.budget.validate()?;
    let mut jobs: Vec<AssumptionId> = Vec::new();
    for id in &cfg.assumptions {
        // Paired entries are produced by one check.
        let canonical = match id {
            AssumptionId::A4b => AssumptionId::A4a,
            AssumptionId::A7b => AssumptionId::A7a,
            other => *other,
        };
        if !jobs.contains(&canonical) {
            jobs.push(canonical);
        }
    }
    let mj = cfg.majorants.as_ref();
    let tol = &cfg.tolerances;
    // Checks run concurrently; each one evaluates its samples sequentially.
    let inner = ExecPolicy::Sequential;
    let outcomes = par::run_jobs(cfg.exec, jobs, |id| -> Result<Outcome> {
        Ok(match id {
            AssumptionId::A1 => {
                let (e, k) = check_parabolicity(spec, &cfg.budget, mj, tol, inner)?;
                Outcome::Kappa(e, k)
            }
            AssumptionId::A2 | AssumptionId::A2Prime => {
                let mode = if id == AssumptionId::A2 { DissipativityMode::A2 } else { DissipativityMode::A2Prime };
                let (e, d1, d2) = check_dissipativity(spec, &cfg.budget, mode, mj, tol, inner)?;
                Outcome::Dissipative(e, d1, d2)
            }
            AssumptionId::A4a | AssumptionId::A4b => {
                Outcome::Entries(check_growth(spec, &cfg.budget, mj, inner)?.to_vec())
            }
            AssumptionId::A5 => Outcome::Entries(vec![ReportEntry::not_applicable(
                AssumptionId::A5,
                "Hoelder continuity of derivatives is not estimable from samples",
            )]),
            AssumptionId::A6 => Outcome::Entries(vec![check_compatibility(spec, tol)?]),
            AssumptionId::A7a | AssumptionId::A7b => {
                Outcome::Entries(check_positivity_source(spec, &cfg.budget, tol, inner)?.to_vec())
            }
            AssumptionId::MonotoneCoeffs => Outcome::Entries(vec![match spec.lv() {
                Some(lv) => check_monotone_coefficients(lv, &cfg.budget, spec, tol)?,
                None => ReportEntry::not_applicable(id, "not a Lotka-Volterra problem"),
            }]),
            AssumptionId::InitMonotone => Outcome::Entries(vec![match spec.lv() {
                Some(lv) => check_initial_monotonicity(lv, spec.initial(), tol)?,
                None => ReportEntry::not_applicable(id, "not a Lotka-Volterra problem"),
            }]),
        })
    });
    let mut entries = Vec::new();
    let mut constants = EstimatedConstants::default();
    for o in outcomes {
        match o? {
            Outcome::Entries(es) => entries.extend(es),
            Outcome::Kappa(e, k) => {
                constants.kappa = Some(k);
                entries.push(e);
            }
            Outcome::Dissipative(e, d1, d2) => {
                // The orthant estimate is the one used by the maximum-principle bound.
                if e.assumption == AssumptionId::A2Prime || constants.d2.is_none() {
                    constants.d1 = Some(d1);
                    constants.d2 = Some(d2);
                }
                entries.push(e);
            }
        }
    }
    entries.retain(|e| cfg.assumptions.contains(&e.assumption));
    Ok(HypothesisReport::new(entries, constants))
}
