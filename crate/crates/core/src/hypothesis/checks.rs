use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eigen_range, BoundaryKind, Field, Grid, LVCoefficients, Majorants, ProblemSpec};
use crate::par::{self, ExecPolicy};
use crate::stencil;

use super::report::{AssumptionId, ReportEntry, Status, Witness};
use super::sampling::{SampleBudget, Sampler, StateRegion};

/// Numerical tolerances of the checker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckTolerances {
    pub tol_zero: f64,
    pub tol_sign: f64,
    /// Base of `tol_compat = base * (1 + coefficient scale)`.
    pub tol_compat: f64,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        Self { tol_zero: 1e-12, tol_sign: 1e-10, tol_compat: 1e-6 }
    }
}

/// Dissipativity flavour: on all of state space or the non-negative orthant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipativityMode {
    A2,
    A2Prime,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Index of the smallest finite value (first on ties).
fn argmin(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some(b) if values[b] <= *v => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Uniform parabolicity: `kappa_hat = min lambda_min(A)`, and the envelopes
/// `mu_hat(|u|) I <= A <= mu(|u|) I` when supplied.
pub fn check_parabolicity(
    spec: &ProblemSpec,
    budget: &SampleBudget,
    majorants: Option<&Majorants>,
    tol: &CheckTolerances,
    exec: ExecPolicy,
) -> Result<(ReportEntry, f64)> {
    let coef = spec.coefficients();
    let n = coef.dim();
    let m = coef.components();
    let sampler = Sampler::new(budget, spec.domain(), spec.horizon(), m)?;
    let samples = sampler.samples(StateRegion::Full);
    let per_sample = par::map_range(exec, samples.len(), |i| -> Result<(f64, f64)> {
        let s = &samples[i];
        let mut lo = f64::INFINITY;
        let mut env = f64::INFINITY;
        let r = norm(&s.u);
        for k in 0..m {
            let a = coef.diffusion(k, s.t, &s.x, &s.u)?;
            let (lmin, lmax) = eigen_range(&a, n);
            if !(lmin.is_finite() && lmax.is_finite()) {
                return Err(Error::coefficient("non-finite eigenvalue"));
            }
            lo = lo.min(lmin);
            if let Some(mj) = majorants {
                if let Some(mu) = &mj.mu {
                    env = env.min(mu(r) - lmax);
                }
                if let Some(mh) = &mj.mu_hat {
                    env = env.min(lmin - mh(r));
                }
            }
        }
        Ok((lo, env))
    });
    let per_sample = per_sample.into_iter().collect::<Result<Vec<_>>>()?;
    let lows: Vec<f64> = per_sample.iter().map(|p| p.0).collect();
    let envs: Vec<f64> = per_sample.iter().map(|p| p.1).collect();
    let ik = argmin(&lows).expect("non-empty sample set");
    let kappa = lows[ik];
    let ie = argmin(&envs).expect("non-empty sample set");
    let env_margin = envs[ie];
    let envelope_ok = !env_margin.is_finite() || env_margin >= -tol.tol_sign;
    let (margin, wi) = if env_margin.is_finite() && env_margin < kappa { (env_margin, ie) } else { (kappa, ik) };
    let status = if kappa > 0.0 && envelope_ok { Status::Pass } else { Status::Fail };
    let entry = ReportEntry {
        assumption: AssumptionId::A1,
        status,
        margin,
        witness: Some(Witness::from(&samples[wi])),
        note: String::new(),
    };
    Ok((entry, kappa))
}

/// Dissipativity `(c, u) <= d1 + d2 |u|^2`. Returns `(entry, d1_hat, d2_hat)`
/// where `d2_hat` is the smallest slope with `d1 = 0` and `d1_hat` the
/// smallest intercept for the reference slope (user `d2` if given, else
/// `d2_hat`).
pub fn check_dissipativity(
    spec: &ProblemSpec,
    budget: &SampleBudget,
    mode: DissipativityMode,
    majorants: Option<&Majorants>,
    tol: &CheckTolerances,
    exec: ExecPolicy,
) -> Result<(ReportEntry, f64, f64)> {
    let coef = spec.coefficients();
    let m = coef.components();
    let sampler = Sampler::new(budget, spec.domain(), spec.horizon(), m)?;
    let region = match mode {
        DissipativityMode::A2 => StateRegion::Full,
        DissipativityMode::A2Prime => StateRegion::Orthant,
    };
    let samples = sampler.samples(region);
    let inner = par::map_range(exec, samples.len(), |i| -> Result<(f64, f64)> {
        let s = &samples[i];
        let c = coef.source(s.t, &s.x, &s.u, &s.p)?;
        Ok((dot(&c, &s.u), dot(&s.u, &s.u)))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let d2_hat = inner
        .iter()
        .filter(|(_, r2)| *r2 > 0.0)
        .map(|(s, r2)| s / r2)
        .fold(0.0, f64::max);
    let d2_ref = majorants.map_or(d2_hat, |mj| mj.d2);
    let d1_hat = inner.iter().map(|(s, r2)| s - d2_ref * r2).fold(0.0, f64::max);
    let (d1, d2) = majorants.map_or((d1_hat, d2_hat), |mj| (mj.d1, mj.d2));
    let slack: Vec<f64> = inner.iter().map(|(s, r2)| d1 + d2 * r2 - s).collect();
    let scale: Vec<f64> = inner.iter().map(|(s, _)| 1.0 + s.abs()).collect();
    let iw = argmin(&slack).expect("non-empty sample set");
    let id = match mode {
        DissipativityMode::A2 => AssumptionId::A2,
        DissipativityMode::A2Prime => AssumptionId::A2Prime,
    };
    let holds = slack.iter().zip(&scale).all(|(s, c)| *s >= -tol.tol_zero * c);
    let entry = ReportEntry {
        assumption: id,
        status: if holds { Status::Pass } else { Status::Fail },
        margin: slack[iw],
        witness: Some(Witness::from(&samples[iw])),
        note: if majorants.is_none() { "constants estimated from samples".into() } else { String::new() },
    };
    Ok((entry, d1_hat, d2_hat))
}

/// Number of rungs in the `|p|` ladder of the decay heuristic.
const LADDER_RUNGS: i32 = 12;

/// Growth bounds on drift and source. Returns the `A4a` and `A4b` entries.
pub fn check_growth(
    spec: &ProblemSpec,
    budget: &SampleBudget,
    majorants: Option<&Majorants>,
    exec: ExecPolicy,
) -> Result<[ReportEntry; 2]> {
    let coef = spec.coefficients();
    let n = coef.dim();
    let m = coef.components();
    let theta1 = majorants.and_then(|mj| mj.theta1.clone());
    let theta2 = majorants.and_then(|mj| mj.theta2.clone());
    if theta1.is_none() && theta2.is_none() {
        return Ok([
            ReportEntry::not_applicable(AssumptionId::A4a, "no theta1 majorant supplied"),
            ReportEntry::not_applicable(AssumptionId::A4b, "no theta2 majorant supplied"),
        ]);
    }
    let sampler = Sampler::new(budget, spec.domain(), spec.horizon(), m)?;
    let samples = sampler.samples(StateRegion::Full);
    let margins = par::map_range(exec, samples.len(), |i| -> Result<(f64, f64)> {
        let s = &samples[i];
        let ru = norm(&s.u);
        let rp = norm(&s.p);
        let mut ma = f64::INFINITY;
        if let Some(t1) = &theta1 {
            let b = coef.drift(s.t, &s.x, &s.u, &s.p)?;
            let bound = t1(ru) * (1.0 + rp);
            for bi in b.iter().take(n) {
                ma = ma.min(bound - bi.abs());
            }
        }
        let mut mb = f64::INFINITY;
        if let Some(t2) = &theta2 {
            let c = coef.source(s.t, &s.x, &s.u, &s.p)?;
            mb = t2(ru, rp) * (1.0 + rp) * (1.0 + rp) - norm(&c);
        }
        Ok((ma, mb))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let a4a = match theta1 {
        None => ReportEntry::not_applicable(AssumptionId::A4a, "no theta1 majorant supplied"),
        Some(_) => {
            let v: Vec<f64> = margins.iter().map(|p| p.0).collect();
            let i = argmin(&v).unwrap();
            ReportEntry::from_margin(AssumptionId::A4a, v[i], 0.0, Some(Witness::from(&samples[i])))
        }
    };
    let a4b = match theta2 {
        None => ReportEntry::not_applicable(AssumptionId::A4b, "no theta2 majorant supplied"),
        Some(t2) => {
            let v: Vec<f64> = margins.iter().map(|p| p.1).collect();
            let i = argmin(&v).unwrap();
            let mut e = ReportEntry::from_margin(AssumptionId::A4b, v[i], 0.0, Some(Witness::from(&samples[i])));
            let c1 = budget.u_radius;
            let ladder: Vec<f64> =
                (0..LADDER_RUNGS).map(|j| t2(c1, budget.p_radius * 2f64.powi(j))).collect();
            let tail = &ladder[ladder.len() - 3..];
            let decays = tail[1] < tail[0] && tail[2] < tail[1];
            if decays {
                e.note = "decay of theta2 in |p| checked heuristically on a geometric ladder".into();
            } else {
                e.status = Status::Fail;
                e.note = format!("theta2 not decreasing on the last ladder rungs: {tail:?} (heuristic)");
            }
            e
        }
    };
    Ok([a4a, a4b])
}

/// Compatibility of the initial data with the zero boundary condition:
/// `phi = 0` and `sum a_ij d2phi + sum b_i dphi + c = 0` at boundary nodes.
pub fn check_compatibility(spec: &ProblemSpec, tol: &CheckTolerances) -> Result<ReportEntry> {
    if !matches!(spec.domain().boundary(), BoundaryKind::DirichletZero) {
        return Ok(ReportEntry::not_applicable(AssumptionId::A6, "not a Dirichlet-zero problem"));
    }
    let phi = spec.initial();
    let grid: &Grid = phi.grid();
    let coef = spec.coefficients();
    let n = grid.dim();
    let m = phi.components();
    let zero = vec![0.0; m];
    let mut p = vec![0.0; m * n];
    let mut worst = 0.0f64;
    let mut witness = None;
    let mut scale = 0.0f64;
    for node in grid.boundary_nodes() {
        let x = grid.point(node);
        stencil::gradient_into(grid, phi.values(), node, &mut p);
        let b = coef.drift(0.0, &x, &zero, &p)?;
        let c = coef.source(0.0, &x, &zero, &p)?;
        for k in 0..m {
            let v = phi.component(k);
            let a = coef.diffusion(k, 0.0, &x, &zero)?;
            scale = scale.max(a[0][0].abs()).max(a[1][1].abs()).max(a[0][1].abs());
            let mut r = v[node].abs();
            let mut op = 0.0;
            for i in 0..n {
                op += a[i][i] * stencil::second_diff(grid, v, node, i);
                op += b[i] * p[k * n + i];
            }
            if n == 2 {
                op += 2.0 * a[0][1] * stencil::mixed_diff(grid, v, node);
            }
            op += c[k];
            r = r.max(op.abs());
            if r > worst || witness.is_none() {
                worst = worst.max(r);
                witness = Some(Witness { t: 0.0, x: x.clone(), u: phi.at(node), p: p.clone(), node: Some(node) });
            }
        }
    }
    let tol_compat = tol.tol_compat * (1.0 + scale);
    Ok(ReportEntry::from_margin(AssumptionId::A6, -worst, tol_compat, witness)
        .with_note(format!("tol_compat = {tol_compat:e}")))
}

/// Non-negative initial data (`A7a`) and non-negative source on the faces
/// `u^k = 0` of the orthant (`A7b`).
pub fn check_positivity_source(
    spec: &ProblemSpec,
    budget: &SampleBudget,
    tol: &CheckTolerances,
    exec: ExecPolicy,
) -> Result<[ReportEntry; 2]> {
    let phi = spec.initial();
    let grid = phi.grid();
    let m = phi.components();
    let mut min_phi = f64::INFINITY;
    let mut wnode = 0;
    for k in 0..m {
        for (node, &v) in phi.component(k).iter().enumerate() {
            if v < min_phi {
                min_phi = v;
                wnode = node;
            }
        }
    }
    let a7a = ReportEntry::from_margin(
        AssumptionId::A7a,
        min_phi,
        0.0,
        Some(Witness { t: 0.0, x: grid.point(wnode), u: phi.at(wnode), p: vec![], node: Some(wnode) }),
    );

    let coef = spec.coefficients();
    let sampler = Sampler::new(budget, spec.domain(), spec.horizon(), m)?;
    let mut best = f64::INFINITY;
    let mut witness = None;
    for k in 0..m {
        let samples = sampler.samples(StateRegion::Face(k));
        let vals = par::map_range(exec, samples.len(), |i| {
            let s = &samples[i];
            coef.source(s.t, &s.x, &s.u, &s.p).map(|c| c[k])
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        let i = argmin(&vals).unwrap();
        if vals[i] < best {
            best = vals[i];
            witness = Some(Witness::from(&samples[i]));
        }
    }
    let a7b = ReportEntry::from_margin(AssumptionId::A7b, best, tol.tol_zero, witness);
    Ok([a7a, a7b])
}

/// Expected sign of the time derivative of each classical coefficient.
const MONOTONE_SIGNS: [f64; 6] = [1.0, -1.0, -1.0, -1.0, 1.0, 1.0];

/// Signs of the time derivatives of the two-species coefficients:
/// `beta` and `sigma`, `theta` non-decreasing; `gamma`, `delta`, `rho`
/// non-increasing. Central differences with `dt = 1e-4 max(1, T)`.
pub fn check_monotone_coefficients(
    lv: &LVCoefficients,
    budget: &SampleBudget,
    spec: &ProblemSpec,
    tol: &CheckTolerances,
) -> Result<ReportEntry> {
    let Some(coefs) = lv.classical() else {
        return Ok(ReportEntry::not_applicable(AssumptionId::MonotoneCoeffs, "requires two species"));
    };
    let sampler = Sampler::new(budget, spec.domain(), spec.horizon(), lv.species())?;
    let dt = 1e-4 * spec.horizon().max(1.0);
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut which = "";
    for t in sampler.times() {
        let tc = t.max(dt);
        for x in sampler.points() {
            for ((name, c), sign) in coefs.iter().zip(MONOTONE_SIGNS) {
                let d = (c.eval(tc + dt, &x) - c.eval(tc - dt, &x)) / (2.0 * dt);
                let margin = sign * d;
                if margin < worst {
                    worst = margin;
                    which = name;
                    witness = Some(Witness { t: tc, x: x.clone(), u: vec![], p: vec![], node: None });
                }
            }
        }
    }
    Ok(ReportEntry::from_margin(AssumptionId::MonotoneCoeffs, worst, tol.tol_sign, witness)
        .with_note(format!("tightest coefficient: {which}")))
}

/// Initial monotonicity `d1 Lap phi + phi(beta - gamma phi - delta psi) >= 0`
/// and `d2 Lap psi + psi(rho - sigma phi - theta psi) <= 0` at interior nodes,
/// with the discrete Laplacian and coefficients at `t = 0`.
pub fn check_initial_monotonicity(
    lv: &LVCoefficients,
    initial: &Field,
    tol: &CheckTolerances,
) -> Result<ReportEntry> {
    if lv.species() != 2 || initial.components() != 2 {
        return Ok(ReportEntry::not_applicable(AssumptionId::InitMonotone, "requires two species"));
    }
    let grid = initial.grid();
    let d = lv.diffusion();
    let mut worst = f64::INFINITY;
    let mut witness = None;
    let mut c = [0.0; 2];
    for node in grid.interior_nodes() {
        let x = grid.point(node);
        let u = initial.at(node);
        lv.source_into(0.0, &x, &u, &mut c);
        let r1 = d[0] * stencil::laplacian(grid, initial.component(0), node) + c[0];
        let r2 = d[1] * stencil::laplacian(grid, initial.component(1), node) + c[1];
        let margin = r1.min(-r2);
        if margin < worst {
            worst = margin;
            witness = Some(Witness { t: 0.0, x, u, p: vec![], node: Some(node) });
        }
    }
    if witness.is_none() {
        worst = 0.0;
    }
    Ok(ReportEntry::from_margin(AssumptionId::InitMonotone, worst, tol.tol_sign, witness))
}
