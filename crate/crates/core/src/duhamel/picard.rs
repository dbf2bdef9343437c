use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fdm::sample_jacobian_bound;
use crate::model::{Field, Grid, ProblemSpec};
use crate::par::{self, ExecPolicy};

use super::kernel::gaussian_smooth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// `D_k` in `du^k/dt = D_k lap u^k + c^k`.
    pub diffusion: Vec<f64>,
    /// Kernel support in standard deviations.
    #[serde(default = "default_truncation")]
    pub truncation: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop once the sup-change is at most `tol * max(1, sup |v|)`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub exec: ExecPolicy,
}

fn default_truncation() -> f64 {
    8.0
}

fn default_max_iter() -> usize {
    60
}

fn default_tol() -> f64 {
    1e-12
}

impl KernelConfig {
    pub fn new(diffusion: Vec<f64>) -> Result<Self> {
        let c = Self {
            diffusion,
            truncation: default_truncation(),
            max_iter: default_max_iter(),
            tol: default_tol(),
            exec: ExecPolicy::default(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Configuration with the problem's constant diffusion.
    pub fn for_spec(spec: &ProblemSpec) -> Result<Self> {
        let d = spec
            .coefficients()
            .constant_diffusion()
            .ok_or_else(|| Error::spec("the kernel oracle needs constant per-component diffusion"))?;
        Self::new(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.diffusion.is_empty() || self.diffusion.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::spec("kernel diffusivities must be positive"));
        }
        if !(self.truncation >= 6.0) {
            return Err(Error::spec("kernel truncation must be at least 6 standard deviations"));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::spec("Picard iteration cap and tolerance must be positive"));
        }
        Ok(())
    }

    /// `G_k(tau) v`: heat semigroup of component `k` after time `tau`.
    fn propagate(&self, grid: &Grid, k: usize, v: &[f64], tau: f64, exec: ExecPolicy) -> Vec<f64> {
        if tau <= 0.0 || v.iter().all(|x| *x == 0.0) {
            return v.to_vec();
        }
        gaussian_smooth(grid, v, (2.0 * self.diffusion[k] * tau).sqrt(), self.truncation, exec)
    }
}

/// `u_i = G(s_i) phi + int_0^{s_i} G(s_i - s) f(s) ds` for every level `i` of
/// the time nodes `s` (with `s[0] = 0`), for one component. The integral is
/// the composite trapezoid rule except on the last panel, where the kernel is
/// taken at the panel midpoint and `f` averaged.
fn duhamel_levels(
    cfg: &KernelConfig,
    grid: &Grid,
    k: usize,
    phi: &[f64],
    f: &[Vec<f64>],
    s: &[f64],
    exec: ExecPolicy,
) -> Vec<Vec<f64>> {
    let levels = s.len();
    let forcing = f.iter().any(|fj| fj.iter().any(|v| *v != 0.0));
    let inner = if levels > 1 { ExecPolicy::Sequential } else { exec };
    par::run_jobs(exec, (0..levels).collect(), |i| {
        if i == 0 {
            return phi.to_vec();
        }
        let t = s[i];
        let mut u = cfg.propagate(grid, k, phi, t, inner);
        if !forcing {
            return u;
        }
        let mut add = |w: f64, v: Vec<f64>| {
            for (a, b) in u.iter_mut().zip(v) {
                *a += w * b;
            }
        };
        for j in 0..i - 1 {
            let w = 0.5 * (s[j + 1] - s[j]);
            add(w, cfg.propagate(grid, k, &f[j], t - s[j], inner));
            add(w, cfg.propagate(grid, k, &f[j + 1], t - s[j + 1], inner));
        }
        let last = s[i] - s[i - 1];
        let avg: Vec<f64> = f[i - 1].iter().zip(&f[i]).map(|(a, b)| 0.5 * (a + b)).collect();
        add(last, cfg.propagate(grid, k, &avg, 0.5 * last, inner));
        u
    })
}

fn zero_boundary(grid: &Grid, v: &mut [f64]) {
    for node in grid.boundary_nodes() {
        v[node] = 0.0;
    }
}

/// Duhamel formula at time `t` with initial data `phi` and source history
/// `f(s_j)` given at increasing times from 0 to `t` (empty for no source).
/// Data are extended by zero outside the box; the result is set to zero on
/// the boundary.
pub fn duhamel_apply(phi: &Field, history: &[(f64, Field)], t: f64, cfg: &KernelConfig) -> Result<Field> {
    cfg.validate()?;
    if t < 0.0 {
        return Err(Error::Domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        return Ok(phi.clone());
    }
    if cfg.diffusion.len() != phi.components() {
        return Err(Error::spec("diffusivity count must equal the component count"));
    }
    let grid = phi.grid();
    let mut s = vec![0.0];
    let mut f: Vec<Vec<Vec<f64>>> = (0..phi.components()).map(|_| vec![vec![0.0; grid.len()]]).collect();
    if !history.is_empty() {
        let first = history[0].0;
        let last = history[history.len() - 1].0;
        if first != 0.0 || (last - t).abs() > 1e-12 * t.max(1.0) || history.len() < 2 {
            return Err(Error::spec("source history must span [0, t] with at least two times"));
        }
        if history.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::spec("source history times must increase"));
        }
        s = history.iter().map(|h| h.0).collect();
        f = (0..phi.components())
            .map(|k| history.iter().map(|h| h.1.component(k).to_vec()).collect())
            .collect();
    } else {
        s.push(t);
        for fk in &mut f {
            fk.push(vec![0.0; grid.len()]);
        }
    }
    let mut values = Vec::with_capacity(phi.components());
    for (k, fk) in f.iter().enumerate() {
        let mut levels = duhamel_levels(cfg, grid, k, phi.component(k), fk, &s, cfg.exec);
        let mut u = levels.pop().expect("at least two levels");
        zero_boundary(grid, &mut u);
        values.push(u);
    }
    Field::from_values(phi.grid_arc().clone(), values)
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    /// Iterations per time window.
    pub iterations: Vec<usize>,
    /// Sup-changes `|v_{j+1} - v_j|` per window.
    pub contraction_log: Vec<Vec<f64>>,
    /// Whether every window reached the tolerance.
    pub converged: bool,
    pub jacobian_bound: f64,
    pub window_length: f64,
}

impl PicardSolution {
    pub fn final_state(&self) -> &Field {
        self.states.last().expect("solution has states")
    }

    /// State at the stored time closest to `t`.
    pub fn state_near(&self, t: f64) -> (f64, &Field) {
        let i = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
            .expect("solution has states");
        (self.times[i], &self.states[i])
    }

    /// Ratios `delta_{j+1} / delta_j` of every window after `burn_in`
    /// iterations, skipping ratios of changes already at rounding level.
    pub fn contraction_ratios(&self, burn_in: usize, floor: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for log in &self.contraction_log {
            for j in burn_in..log.len().saturating_sub(1) {
                if log[j] > floor && log[j + 1] > floor {
                    out.push(log[j + 1] / log[j]);
                }
            }
        }
        out
    }
}

/// Picard iteration of the Duhamel map with the source evaluated at
/// `(|v^1|, ..., |v^m|)`, marched over windows no longer than the contraction
/// horizon `1 / (2 sup |dc/du|)`. Time levels are spaced by `dt`.
pub fn picard_solve(spec: &ProblemSpec, cfg: &KernelConfig, dt: f64) -> Result<PicardSolution> {
    cfg.validate()?;
    let coef = spec.coefficients();
    let d = coef
        .constant_diffusion()
        .ok_or_else(|| Error::spec("the kernel oracle needs constant per-component diffusion"))?;
    if d != cfg.diffusion {
        return Err(Error::spec("kernel diffusivities differ from the problem's"));
    }
    if !coef.drift_free() || coef.gradient_dependent() {
        return Err(Error::spec("the kernel oracle needs b = 0 and a gradient-free source"));
    }
    if !(dt > 0.0) {
        return Err(Error::spec("time step must be positive"));
    }
    let grid = spec.grid();
    let m = spec.components();
    let n = grid.dim();
    let jacobian_bound = sample_jacobian_bound(spec)?;
    let horizon_c = if jacobian_bound > 0.0 { 0.5 / jacobian_bound } else { f64::INFINITY };
    let total = ((spec.horizon() / dt) - 1e-9).ceil().max(1.0) as usize;
    let time_of = |i: usize| if i == total { spec.horizon() } else { i as f64 * dt };
    let per_window = if horizon_c.is_finite() { ((horizon_c / dt) + 1e-9).floor().max(1.0) as usize } else { total };

    let mut times = vec![0.0];
    let mut states = vec![spec.initial().clone()];
    let mut iterations = Vec::new();
    let mut logs = Vec::new();
    let mut converged = true;
    let mut start = 0;
    while start < total {
        let end = (start + per_window).min(total);
        let s: Vec<f64> = (start..=end).map(|i| time_of(i) - time_of(start)).collect();
        let abs_t: Vec<f64> = (start..=end).map(time_of).collect();
        let phi = states.last().expect("seeded").clone();
        let mut v: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|k| {
                let base = phi.component(k);
                par::run_jobs(cfg.exec, s.clone(), |t| {
                    let mut u = cfg.propagate(grid, k, base, t, ExecPolicy::Sequential);
                    zero_boundary(grid, &mut u);
                    u
                })
            })
            .collect();
        let mut log = Vec::new();
        let mut rising = 0;
        let mut done = false;
        for _ in 0..cfg.max_iter {
            // Source at |v| on every level (zero on the boundary).
            let levels = s.len();
            let f_levels = par::map_range(cfg.exec, levels, |j| -> Result<Vec<Vec<f64>>> {
                let mut f = vec![vec![0.0; grid.len()]; m];
                let mut x = vec![0.0; n];
                let mut u = vec![0.0; m];
                let mut out = vec![0.0; m];
                let p = vec![0.0; m * n];
                for node in 0..grid.len() {
                    if grid.is_boundary(node) {
                        continue;
                    }
                    grid.point_into(node, &mut x);
                    for k in 0..m {
                        u[k] = v[k][j][node].abs();
                    }
                    coef.source_into(abs_t[j], &x, &u, &p, &mut out)?;
                    for k in 0..m {
                        f[k][node] = out[k];
                    }
                }
                Ok(f)
            });
            let f_levels = f_levels.into_iter().collect::<Result<Vec<_>>>()?;
            let mut change: f64 = 0.0;
            let mut scale: f64 = 1.0;
            let mut next = Vec::with_capacity(m);
            for k in 0..m {
                let fk: Vec<Vec<f64>> = f_levels.iter().map(|f| f[k].clone()).collect();
                let mut nk = duhamel_levels(cfg, grid, k, phi.component(k), &fk, &s, cfg.exec);
                for (j, u) in nk.iter_mut().enumerate() {
                    zero_boundary(grid, u);
                    for (a, b) in u.iter().zip(&v[k][j]) {
                        change = change.max((a - b).abs());
                        scale = scale.max(a.abs());
                    }
                }
                next.push(nk);
            }
            v = next;
            if let Some(prev) = log.last() {
                if change > *prev {
                    rising += 1;
                } else {
                    rising = 0;
                }
            }
            log.push(change);
            if rising >= 3 {
                return Err(Error::NonContraction(format!(
                    "sup-change grew three times in a row on [{}, {}]; use a shorter horizon or smaller windows",
                    time_of(start),
                    time_of(end)
                )));
            }
            if change <= cfg.tol * scale {
                done = true;
                break;
            }
        }
        converged &= done;
        iterations.push(log.len());
        logs.push(log);
        for j in 1..s.len() {
            let values = (0..m).map(|k| v[k][j].clone()).collect();
            states.push(Field::from_values(grid.clone(), values)?);
            times.push(abs_t[j]);
        }
        start = end;
    }
    Ok(PicardSolution {
        times,
        states,
        iterations,
        contraction_log: logs,
        converged,
        jacobian_bound,
        window_length: per_window as f64 * dt,
    })
}
