use crate::error::{Error, Result};
use crate::fdm::Trajectory;
use crate::model::ScalarCoef;

/// `max(e^{(d2 + 1) T} sup|phi|, sqrt(d1))`.
pub fn max_principle_bound(d1: f64, d2: f64, horizon: f64, phi_sup: f64) -> Result<f64> {
    if !(d1 >= 0.0 && d2 >= 0.0) {
        return Err(Error::spec(format!("dissipativity constants must be non-negative, got {d1}, {d2}")));
    }
    if !(horizon > 0.0) {
        return Err(Error::spec(format!("horizon must be positive, got {horizon}")));
    }
    if !(phi_sup >= 0.0) {
        return Err(Error::spec("sup |phi| must be non-negative"));
    }
    Ok((((d2 + 1.0) * horizon).exp() * phi_sup).max(d1.sqrt()))
}

/// Times `t_split + 2^j - 1` for `j = 0..=30`, covering `[t_split, t_split + 1e9]`.
fn tail_times(t_split: f64) -> Vec<f64> {
    (0..=30).map(|j| t_split + (2f64.powi(j) - 1.0)).collect()
}

/// `m_k = max(sup_{t <= T_split} u^k, sup_{t >= T_split} beta_k / gamma_kk)`
/// with the tail supremum sampled at the trajectory nodes and geometric times.
pub fn component_bound_mk(
    traj: &Trajectory,
    k: usize,
    beta: &ScalarCoef,
    gamma_kk: &ScalarCoef,
    t_split: f64,
) -> Result<f64> {
    let grid = traj.grid();
    if k >= traj.initial().components() {
        return Err(Error::spec(format!("component {k} out of range")));
    }
    let head = traj
        .times
        .iter()
        .zip(&traj.snapshots)
        .filter(|(t, _)| **t <= t_split)
        .map(|(_, f)| f.max_value(k))
        .fold(f64::NEG_INFINITY, f64::max);
    let stride = grid.len().div_ceil(256).max(1);
    let mut tail = f64::NEG_INFINITY;
    for t in tail_times(t_split) {
        for node in (0..grid.len()).step_by(stride) {
            let x = grid.point(node);
            let g = gamma_kk.eval(t, &x);
            if !(g > 0.0) {
                return Err(Error::DivisionDomain(format!("gamma_kk = {g} at t = {t}, x = {x:?}")));
            }
            tail = tail.max(beta.eval(t, &x) / g);
        }
    }
    Ok(head.max(tail))
}

/// 10-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 5] = [
    0.148_874_338_981_631_2,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const GL_WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_9,
    0.269_266_719_309_996_4,
    0.219_086_362_515_982,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_1,
];

fn gauss_legendre(f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (x, w) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            acc += w * half * (f(mid - half * x) + f(mid + half * x));
        }
    }
    acc
}

/// `int_0^inf sup_x beta(t, x) dt` over doubling chunks; converged once a
/// chunk contributes less than `1e-10`.
pub fn integrate_sup(beta: &ScalarCoef, points: &[Vec<f64>]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::spec("need at least one spatial sample point"));
    }
    let sup = |t: f64| points.iter().map(|x| beta.eval(t, x)).fold(f64::NEG_INFINITY, f64::max);
    let mut a = 0.0;
    let mut len = 1.0;
    let mut total = 0.0;
    for _ in 0..64 {
        let chunk = gauss_legendre(&sup, a, a + len, 16);
        if !chunk.is_finite() {
            return Err(Error::Integrability("non-finite growth rate".into()));
        }
        total += chunk;
        if chunk.abs() < 1e-10 {
            return Ok(total);
        }
        a += len;
        len *= 2.0;
    }
    Err(Error::Integrability(format!("tail beyond t = {a:e} still contributes")))
}

/// `sup|phi_k| exp(int_0^inf sup_x beta_k dt)`.
pub fn gronwall_extinction_bound(phi_sup: f64, beta: &ScalarCoef, points: &[Vec<f64>]) -> Result<f64> {
    if !(phi_sup >= 0.0) {
        return Err(Error::spec("sup |phi| must be non-negative"));
    }
    Ok(phi_sup * integrate_sup(beta, points)?.exp())
}
