use serde::Serialize;

use crate::error::{Error, Result};
use crate::fdm::Trajectory;
use crate::model::Field;

use super::monotone::MonotoneReport;
use super::residual::ResidualPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SteadyStatus {
    Converged,
    NotConverged,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyStateReport {
    pub status: SteadyStatus,
    pub final_time: f64,
    /// Length of the tail window actually used.
    pub window: f64,
    /// `sup |u(T) - u(T - window)| / window`.
    pub tail_slope: f64,
    pub steady_tol: f64,
    /// Per component and node, `|u(T) - u(T - window)| / window`.
    pub drift: Vec<Vec<f64>>,
    /// Extracted limit fields (`u bar`, `v bar`, ...).
    pub fields: Vec<Vec<f64>>,
    pub residuals: Vec<ResidualPair>,
    pub monotonicity: Vec<MonotoneReport>,
    #[serde(skip)]
    pub state: Field,
}

impl SteadyStateReport {
    pub fn converged(&self) -> bool {
        self.status == SteadyStatus::Converged
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Takes the final snapshot as the steady state and measures drift against
/// the snapshot closest to `T (1 - window_fraction)`.
pub fn extract_steady_state(traj: &Trajectory, window_fraction: f64, steady_tol: f64) -> Result<SteadyStateReport> {
    if !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::spec(format!("window fraction must lie in (0, 1], got {window_fraction}")));
    }
    if !(steady_tol > 0.0) {
        return Err(Error::spec("steady tolerance must be positive"));
    }
    let t_end = traj.final_time();
    let last = traj.final_state();
    let (t0, earlier) = traj.snapshot_near(t_end * (1.0 - window_fraction));
    let window = t_end - t0;
    let drift: Vec<Vec<f64>> = if window > 0.0 {
        last.values()
            .iter()
            .zip(earlier.values())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs() / window).collect())
            .collect()
    } else {
        last.values().iter().map(|v| vec![0.0; v.len()]).collect()
    };
    let tail_slope = drift.iter().flatten().copied().fold(0.0, f64::max);
    let status = if window > 0.0 && tail_slope <= steady_tol {
        SteadyStatus::Converged
    } else {
        SteadyStatus::NotConverged
    };
    Ok(SteadyStateReport {
        status,
        final_time: t_end,
        window,
        tail_slope,
        steady_tol,
        drift,
        fields: last.values().to_vec(),
        residuals: Vec::new(),
        monotonicity: Vec::new(),
        state: last.clone(),
    })
}
