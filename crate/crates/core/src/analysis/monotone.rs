use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdm::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedSign {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneWitness {
    pub t: f64,
    /// Node of the worst snapshot difference (absent for per-step minima).
    pub node: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub component: usize,
    pub sign: ExpectedSign,
    pub pass: bool,
    /// Smallest signed rate `s * du/dt` (`s = +1` increasing, `-1` decreasing).
    pub worst_margin: f64,
    pub tol: f64,
    pub witness: Option<MonotoneWitness>,
}

/// Checks the sign of the discrete time derivative of component `k` on every
/// pair of consecutive snapshots (all interior nodes) and on every step's
/// recorded extremes, within `tol_mono = 1e-8 (1 + sup |u|)`.
pub fn detect_monotone(traj: &Trajectory, k: usize, sign: ExpectedSign) -> Result<MonotoneReport> {
    if traj.snapshots.len() < 3 {
        return Err(Error::spec("monotonicity detection needs at least three snapshots"));
    }
    if k >= traj.initial().components() {
        return Err(Error::spec(format!("component {k} out of range")));
    }
    let s = match sign {
        ExpectedSign::Increasing => 1.0,
        ExpectedSign::Decreasing => -1.0,
    };
    let grid = traj.grid();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for j in 0..traj.snapshots.len() - 1 {
        let dt = traj.times[j + 1] - traj.times[j];
        let (a, b) = (traj.snapshots[j].component(k), traj.snapshots[j + 1].component(k));
        for node in 0..grid.len() {
            if grid.is_boundary(node) {
                continue;
            }
            let rate = s * (b[node] - a[node]) / dt;
            if rate < worst {
                worst = rate;
                witness = Some(MonotoneWitness { t: traj.times[j + 1], node: Some(node) });
            }
        }
    }
    for d in traj.diagnostics.iter().skip(1) {
        let rate = if s > 0.0 { d.dt_min[k] } else { -d.dt_max[k] };
        if rate < worst {
            worst = rate;
            witness = Some(MonotoneWitness { t: d.t, node: None });
        }
    }
    let sup = traj.snapshots.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let tol = 1e-8 * (1.0 + sup);
    let pass = worst >= -tol;
    Ok(MonotoneReport {
        component: k,
        sign,
        pass,
        worst_margin: worst,
        tol,
        witness: if pass { None } else { witness },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtinctionReport {
    pub component: usize,
    pub extinct: bool,
    pub final_sup: f64,
    /// Whether `sup_x u^k` is non-increasing over the last window.
    pub decreasing: bool,
}

/// `extinct` iff the final `sup_x u^k <= tol_ext` and the sup series over the
/// last `window_fraction` of the run does not increase.
pub fn extinction_check(traj: &Trajectory, k: usize, tol_ext: f64, window_fraction: f64) -> Result<ExtinctionReport> {
    if k >= traj.initial().components() {
        return Err(Error::spec(format!("component {k} out of range")));
    }
    if !(tol_ext > 0.0) || !(window_fraction > 0.0 && window_fraction <= 1.0) {
        return Err(Error::spec("extinction tolerance and window fraction must be positive"));
    }
    let t_end = traj.final_time();
    let start = t_end * (1.0 - window_fraction);
    let sups: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .filter(|(t, _)| **t >= start)
        .map(|(_, f)| f.max_value(k).max(0.0))
        .collect();
    let final_sup = traj.final_state().max_value(k).max(0.0);
    let decreasing = sups.windows(2).all(|w| w[1] <= w[0] + 1e-14);
    Ok(ExtinctionReport { component: k, extinct: final_sup <= tol_ext && decreasing, final_sup, decreasing })
}
