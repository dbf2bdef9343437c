use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CoefficientSet, Field, Grid, ProblemSpec};
use crate::par::{self, ExecPolicy};
use crate::stencil;

use super::linsolve::solve_shifted;
use super::operator::{assemble, DiffusionOp};
use super::scheme::{PositivityMode, SchemeConfig, TimeStepper};

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StepReport {
    /// Linear-solve iterations summed over components.
    pub iterations: usize,
    /// Largest relative linear residual over components.
    pub residual: f64,
    /// Node-level source evaluations.
    pub source_evaluations: usize,
    /// Negative-part norm of the new state before any clipping.
    pub violation: f64,
    /// Largest value removed by clipping (0 in monitor-only mode).
    pub clipped: f64,
}

/// `b . grad u^k + c^k` at interior nodes, zero on the boundary, with the
/// gradient taken by central differences.
pub(crate) fn explicit_terms(
    coefficients: &CoefficientSet,
    grid: &Grid,
    t: f64,
    state: &[Vec<f64>],
    exec: ExecPolicy,
) -> Result<Vec<Vec<f64>>> {
    let m = state.len();
    let n = grid.dim();
    let with_drift = !coefficients.drift_free();
    let per_node = par::map_range(exec, grid.len(), |node| -> Result<Vec<f64>> {
        if grid.is_boundary(node) {
            return Ok(vec![0.0; m]);
        }
        let x = grid.point(node);
        let u: Vec<f64> = state.iter().map(|c| c[node]).collect();
        let mut p = vec![0.0; m * n];
        stencil::gradient_into(grid, state, node, &mut p);
        let mut e = coefficients.source(t, &x, &u, &p)?;
        if with_drift {
            let b = coefficients.drift(t, &x, &u, &p)?;
            for (k, ek) in e.iter_mut().enumerate() {
                for i in 0..n {
                    *ek += b[i] * p[k * n + i];
                }
            }
        }
        Ok(e)
    });
    let per_node = per_node.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((0..m).map(|k| per_node.iter().map(|e| e[k]).collect()).collect())
}

/// Largest stable explicit step `h_min^2 / (2 n lambda_max)`.
pub(crate) fn explicit_bound(grid: &Grid, ops: &[DiffusionOp]) -> f64 {
    let hmin = grid.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
    let lmax = ops.iter().map(|o| o.lambda_max()).fold(0.0, f64::max);
    if lmax == 0.0 {
        f64::INFINITY
    } else {
        hmin * hmin / (2.0 * grid.dim() as f64 * lmax)
    }
}

fn heun_stage(
    spec: &ProblemSpec,
    grid: &Grid,
    t: f64,
    dt: f64,
    state: &[Vec<f64>],
    exec: ExecPolicy,
) -> Result<Vec<Vec<f64>>> {
    let ops = assemble(spec.coefficients(), grid, t, state, exec)?;
    let bound = explicit_bound(grid, &ops);
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::solver(t, format!("explicit step {dt} exceeds the stability bound {bound}")));
    }
    let mut f = explicit_terms(spec.coefficients(), grid, t, state, exec)?;
    for (k, fk) in f.iter_mut().enumerate() {
        let op = &ops[k];
        let v = &state[k];
        par::for_each_indexed(exec, fk, |node, o| {
            if !grid.is_boundary(node) {
                *o += op.apply_at(grid, v, node);
            }
        });
    }
    Ok(f)
}

/// Advances `state` from `t` to `t + dt`.
pub fn step(
    state: &Field,
    t: f64,
    dt: f64,
    spec: &ProblemSpec,
    scheme: &SchemeConfig,
) -> Result<(Field, StepReport)> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::spec(format!("time step must be positive, got {dt}")));
    }
    if state.boundary_max_abs() != 0.0 {
        return Err(Error::spec("state does not vanish on the boundary"));
    }
    if state.components() != spec.components() {
        return Err(Error::spec("state and problem have different component counts"));
    }
    let grid = state.grid();
    let exec = scheme.exec;
    let u = state.values();
    let interior = grid.len() - grid.boundary_nodes().len();
    let mut report = StepReport::default();
    let mut next: Vec<Vec<f64>> = match scheme.time_stepper {
        TimeStepper::ImexBe | TimeStepper::ImexCn => {
            let theta = scheme.time_stepper.theta();
            let ops = assemble(spec.coefficients(), grid, t, u, exec)?;
            let e = explicit_terms(spec.coefficients(), grid, t, u, exec)?;
            report.source_evaluations = interior;
            let mut out = Vec::with_capacity(u.len());
            for (k, op) in ops.iter().enumerate() {
                let uk = &u[k];
                let ek = &e[k];
                let mut rhs = vec![0.0; grid.len()];
                par::for_each_indexed(exec, &mut rhs, |node, r| {
                    if grid.is_boundary(node) {
                        return;
                    }
                    let mut v = uk[node] + dt * ek[node];
                    if theta < 1.0 {
                        v += (1.0 - theta) * dt * op.apply_at(grid, uk, node);
                    }
                    *r = v;
                });
                let solved = solve_shifted(
                    grid,
                    op,
                    theta * dt,
                    &rhs,
                    uk,
                    scheme.linear_tol,
                    scheme.max_linear_iter,
                    exec,
                )
                .map_err(|reason| Error::solver(t, reason))?;
                report.iterations += solved.iterations;
                report.residual = report.residual.max(solved.residual);
                out.push(solved.x);
            }
            out
        }
        TimeStepper::Erk2 => {
            let k1 = heun_stage(spec, grid, t, dt, u, exec)?;
            let mid: Vec<Vec<f64>> = u
                .iter()
                .zip(&k1)
                .map(|(uk, fk)| uk.iter().zip(fk).map(|(a, b)| a + dt * b).collect())
                .collect();
            let k2 = heun_stage(spec, grid, t + dt, dt, &mid, exec)?;
            report.source_evaluations = 2 * interior;
            u.iter()
                .zip(k1.iter().zip(&k2))
                .map(|(uk, (a, b))| {
                    uk.iter().zip(a.iter().zip(b)).map(|(v, (f1, f2))| v + 0.5 * dt * (f1 + f2)).collect()
                })
                .collect()
        }
    };
    if next.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::solver(t + dt, "non-finite state"));
    }
    let neg = next.iter().flatten().fold(0.0f64, |acc, v| acc.max(-v));
    report.violation = neg;
    if scheme.positivity_mode == PositivityMode::ClipAndFlag && neg > 0.0 {
        for v in next.iter_mut().flatten() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        report.clipped = neg;
    }
    let field = Field::from_values(state.grid_arc().clone(), next)?;
    Ok((field, report))
}
