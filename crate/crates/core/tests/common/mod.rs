#![allow(dead_code)]

use std::sync::Arc;

use parapos_core::model::{
    build_lv_problem, Field, Grid, LVCoefficients, ProblemSpec, SpatialDomain,
};

pub fn unit_grid(n: usize) -> Arc<Grid> {
    Arc::new(Grid::new(SpatialDomain::interval(0.0, 1.0).unwrap(), vec![n]).unwrap())
}

pub fn lv_problem<F>(lv: LVCoefficients, grid: Arc<Grid>, horizon: f64, phi: F) -> ProblemSpec
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = lv.species();
    let init = Field::from_fn(grid.clone(), m, phi).unwrap();
    build_lv_problem(lv, grid.domain(), init, horizon).unwrap()
}

/// Thomas algorithm for a tridiagonal system (test-only oracle).
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / den } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Positive solution of `d w'' + w (a - b w) = 0` on `[lo, hi]` with zero
/// boundary values, solved by Newton iteration on the 3-point discretization
/// with `nodes` nodes (boundary included). Requires `a > d pi^2 / L^2`.
pub fn scalar_steady_state(d: f64, a: f64, b: f64, lo: f64, hi: f64, nodes: usize) -> Vec<f64> {
    let h = (hi - lo) / (nodes - 1) as f64;
    let ni = nodes - 2;
    let mut w: Vec<f64> = (0..ni)
        .map(|i| {
            let x = (i + 1) as f64 * h / (hi - lo);
            a / b * (std::f64::consts::PI * x).sin()
        })
        .collect();
    for _ in 0..100 {
        let get = |w: &Vec<f64>, i: isize| if i < 0 || i as usize >= ni { 0.0 } else { w[i as usize] };
        let res: Vec<f64> = (0..ni)
            .map(|i| {
                let i = i as isize;
                d * (get(&w, i - 1) - 2.0 * get(&w, i) + get(&w, i + 1)) / (h * h)
                    + get(&w, i) * (a - b * get(&w, i))
            })
            .collect();
        let lower = vec![d / (h * h); ni];
        let upper = vec![d / (h * h); ni];
        let diag: Vec<f64> = w.iter().map(|wi| -2.0 * d / (h * h) + a - 2.0 * b * wi).collect();
        let neg: Vec<f64> = res.iter().map(|r| -r).collect();
        let dw = thomas(&lower, &diag, &upper, &neg);
        let step = dw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (wi, di) in w.iter_mut().zip(&dw) {
            *wi += di;
        }
        if step < 1e-15 {
            break;
        }
    }
    let mut out = vec![0.0];
    out.extend(w);
    out.push(0.0);
    out
}

/// Closed-form logistic solution `U' = U(beta - gamma U)`.
pub fn logistic(beta: f64, gamma: f64, u0: f64, t: f64) -> f64 {
    let e = (beta * t).exp();
    beta * u0 * e / (beta + gamma * u0 * (e - 1.0))
}

/// Two-species model whose coefficients relax monotonically towards
/// constants: `beta, sigma, theta` increase and `gamma, delta, rho` decrease.
pub fn monotone_lv(d: f64) -> LVCoefficients {
    use parapos_core::model::ScalarCoef;
    let fam = |a: f64, b: f64| ScalarCoef::of_time(move |t| a + b * (-t).exp()).with_limit(move |_| a);
    LVCoefficients::two_species(
        d,
        d,
        fam(1.0, -0.4),
        fam(1.0, 0.2),
        fam(0.1, 0.04),
        fam(0.8, 0.5),
        fam(0.2, -0.1),
        fam(1.0, -0.2),
    )
    .unwrap()
}

/// `phi = 0.1 sin(pi x)`, `psi = 2` in the interior of `[0, 1]`.
pub fn monotone_initial(x: &[f64]) -> Vec<f64> {
    let interior = x[0] > 1e-12 && x[0] < 1.0 - 1e-12;
    vec![0.1 * (std::f64::consts::PI * x[0]).sin(), if interior { 2.0 } else { 0.0 }]
}
