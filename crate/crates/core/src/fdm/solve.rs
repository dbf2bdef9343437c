use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BoundaryKind, Field, Grid, ProblemSpec};
use crate::par;
use crate::stencil;

use super::operator::assemble;
use super::scheme::{SchemeConfig, TimeStepper};
use super::step::{explicit_bound, step, StepReport};

/// Per-step monitor values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub t: f64,
    pub min_value: f64,
    pub sup_norm: f64,
    pub negpart_norm: f64,
    /// Per component, `min_x (u(t) - u(t - dt)) / dt` over interior nodes.
    pub dt_min: Vec<f64>,
    /// Per component, `max_x (u(t) - u(t - dt)) / dt` over interior nodes.
    pub dt_max: Vec<f64>,
    pub report: StepReport,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    /// Step index of each snapshot.
    pub snapshot_steps: Vec<usize>,
    /// One entry for the initial state followed by one per step.
    pub diagnostics: Vec<StepDiagnostics>,
    pub dt: f64,
    /// Sampled `sup |dc/du|` at run start.
    pub jacobian_bound: f64,
    /// `1 / (2 jacobian_bound)`.
    pub positivity_dt_bound: f64,
    /// Time at which the steady detector stopped the run, if it did.
    pub steady_at: Option<f64>,
}

impl Trajectory {
    pub fn grid(&self) -> &Grid {
        self.snapshots[0].grid()
    }

    pub fn initial(&self) -> &Field {
        &self.snapshots[0]
    }

    pub fn final_state(&self) -> &Field {
        self.snapshots.last().expect("trajectory has snapshots")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has snapshots")
    }

    /// Largest negative-part norm over all steps.
    pub fn max_negpart(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.negpart_norm).fold(0.0, f64::max)
    }

    /// Largest sup norm over all steps.
    pub fn max_sup_norm(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.sup_norm).fold(0.0, f64::max)
    }

    pub fn steps(&self) -> usize {
        self.diagnostics.len() - 1
    }

    /// Largest amount removed by clipping over the run.
    pub fn clipped(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.report.clipped).fold(0.0, f64::max)
    }

    /// Whether the time step respects the sampled positivity bound.
    pub fn within_positivity_bound(&self) -> bool {
        self.dt <= self.positivity_dt_bound
    }

    /// Snapshot closest to time `t`.
    pub fn snapshot_near(&self, t: f64) -> (f64, &Field) {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("trajectory has snapshots");
        (self.times[i], &self.snapshots[i])
    }
}

/// `sup |dc^k/du^i|` by forward differences at the initial nodes scaled by
/// `{0, 1/2, 1, 3/2, 2}` and at spatially constant states up to
/// `2 max(1, sup |phi|)`.
pub fn sample_jacobian_bound(spec: &ProblemSpec) -> Result<f64> {
    let coef = spec.coefficients();
    let grid = spec.grid();
    let init = spec.initial();
    let m = spec.components();
    let n = grid.dim();
    let interior = grid.interior_nodes();
    let stride = interior.len().div_ceil(400).max(1);
    let top = 2.0 * init.sup_norm().max(1.0);
    let mut probes: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = Vec::new();
    for &node in interior.iter().step_by(stride) {
        let x = grid.point(node);
        let u = init.at(node);
        let mut p = vec![0.0; m * n];
        stencil::gradient_into(grid, init.values(), node, &mut p);
        for s in [0.0, 0.5, 1.0, 1.5, 2.0] {
            probes.push((x.clone(), u.iter().map(|v| s * v).collect(), p.clone()));
        }
    }
    let center = grid.domain().center();
    for j in 0..=8 {
        let level = top * j as f64 / 8.0;
        probes.push((center.clone(), vec![level; m], vec![0.0; m * n]));
    }
    let t = 0.0;
    let per = par::map_range(par::ExecPolicy::default(), probes.len(), |i| -> Result<f64> {
        let (x, u, p) = &probes[i];
        let base = coef.source(t, x, u, p)?;
        let mut worst: f64 = 0.0;
        let mut shifted = u.clone();
        for j in 0..m {
            let h = 1e-7 * u[j].abs().max(1.0);
            shifted[j] = u[j] + h;
            let c = coef.source(t, x, &shifted, p)?;
            shifted[j] = u[j];
            for k in 0..m {
                worst = worst.max(((c[k] - base[k]) / h).abs());
            }
        }
        Ok(worst)
    });
    per.into_iter().try_fold(0.0, |acc: f64, r| r.map(|v| acc.max(v)))
}

fn diagnostics(t: f64, prev: &Field, next: &Field, dt: f64, report: StepReport) -> StepDiagnostics {
    let grid = next.grid();
    let m = next.components();
    let mut dt_min = vec![0.0; m];
    let mut dt_max = vec![0.0; m];
    if dt > 0.0 {
        for k in 0..m {
            let (a, b) = (prev.component(k), next.component(k));
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for node in 0..grid.len() {
                if grid.is_boundary(node) {
                    continue;
                }
                let d = (b[node] - a[node]) / dt;
                lo = lo.min(d);
                hi = hi.max(d);
            }
            dt_min[k] = lo;
            dt_max[k] = hi;
        }
    }
    StepDiagnostics {
        t,
        min_value: next.min_value(),
        sup_norm: next.sup_norm(),
        negpart_norm: next.negative_part_norm(),
        dt_min,
        dt_max,
        report,
    }
}

/// Integrates the problem on its own grid from 0 to the horizon (or until the
/// steady detector fires).
pub fn solve(spec: &ProblemSpec, scheme: &SchemeConfig) -> Result<Trajectory> {
    scheme.validate()?;
    if !matches!(spec.domain().boundary(), BoundaryKind::DirichletZero) {
        return Err(Error::spec("solve needs a dirichlet_zero domain; use solve_cauchy_nested"));
    }
    let grid = spec.grid();
    if scheme.time_stepper == TimeStepper::Erk2 {
        let ops = assemble(spec.coefficients(), grid, 0.0, spec.initial().values(), scheme.exec)?;
        let bound = explicit_bound(grid, &ops);
        if scheme.dt > bound * (1.0 + 1e-12) {
            return Err(Error::spec(format!(
                "explicit step {} exceeds the stability bound {bound}",
                scheme.dt
            )));
        }
    }
    let jacobian_bound = sample_jacobian_bound(spec)?;
    let positivity_dt_bound = if jacobian_bound > 0.0 { 0.5 / jacobian_bound } else { f64::INFINITY };

    let horizon = spec.horizon();
    let n_steps = ((horizon / scheme.dt) - 1e-9).ceil().max(1.0) as usize;
    let mut state = spec.initial().clone();
    let mut times = vec![0.0];
    let mut snapshots = vec![state.clone()];
    let mut snapshot_steps = vec![0];
    let mut diags = vec![diagnostics(0.0, &state, &state, 0.0, StepReport::default())];
    let mut checkpoint = (0.0, state.clone());
    let mut steady_at = None;
    let mut t = 0.0;
    for i in 1..=n_steps {
        let t_next = if i == n_steps { horizon } else { i as f64 * scheme.dt };
        let dt = t_next - t;
        let (next, report) = step(&state, t, dt, spec, scheme)?;
        diags.push(diagnostics(t_next, &state, &next, dt, report));
        state = next;
        t = t_next;
        let mut stop = false;
        if let Some(s) = &scheme.steady_stop {
            let elapsed = t - checkpoint.0;
            if elapsed >= s.window * (1.0 - 1e-9) {
                let slope = state.max_abs_diff(&checkpoint.1) / elapsed;
                if slope <= s.tol {
                    stop = true;
                    steady_at = Some(t);
                } else {
                    checkpoint = (t, state.clone());
                }
            }
        }
        if i % scheme.snapshot_stride == 0 || i == n_steps || stop {
            times.push(t);
            snapshots.push(state.clone());
            snapshot_steps.push(i);
        }
        if stop {
            break;
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        snapshot_steps,
        diagnostics: diags,
        dt: scheme.dt,
        jacobian_bound,
        positivity_dt_bound,
        steady_at,
    })
}
