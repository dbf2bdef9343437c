//! Solvers for `(I - tau L) x = b` with `L` a frozen diffusion operator.

use crate::model::Grid;
use crate::par::{self, ExecPolicy};

use super::operator::DiffusionOp;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual `|b - A x| / |b|` (0 for a zero right-hand side).
    pub residual: f64,
}

/// Thomas algorithm; `lower[0]` and `upper[n-1]` are ignored.
pub fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>, String> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    if diag[0] == 0.0 {
        return Err("zero pivot in tridiagonal solve".into());
    }
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        if den == 0.0 || !den.is_finite() {
            return Err("zero pivot in tridiagonal solve".into());
        }
        c[i] = if i + 1 < n { upper[i] / den } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

struct Shifted<'a> {
    grid: &'a Grid,
    op: &'a DiffusionOp,
    tau: f64,
    exec: ExecPolicy,
}

impl Shifted<'_> {
    fn apply(&self, v: &[f64], out: &mut [f64]) {
        let (grid, op, tau) = (self.grid, self.op, self.tau);
        par::for_each_indexed(self.exec, out, |node, o| {
            *o = if grid.is_boundary(node) { v[node] } else { v[node] - tau * op.apply_at(grid, v, node) };
        });
    }

    fn inv_diag(&self) -> Vec<f64> {
        (0..self.grid.len())
            .map(|node| {
                if self.grid.is_boundary(node) {
                    1.0
                } else {
                    1.0 / (1.0 - self.tau * self.op.diag_at(self.grid, node))
                }
            })
            .collect()
    }
}

fn norm(exec: ExecPolicy, v: &[f64]) -> f64 {
    par::dot(exec, v, v).sqrt()
}

fn axpy(exec: ExecPolicy, y: &mut [f64], a: f64, x: &[f64]) {
    par::for_each_indexed(exec, y, |i, yi| *yi += a * x[i]);
}

/// Jacobi-preconditioned conjugate gradients.
fn pcg(a: &Shifted, b: &[f64], x0: Vec<f64>, tol: f64, max_iter: usize) -> Result<LinearSolve, String> {
    let exec = a.exec;
    let n = b.len();
    let minv = a.inv_diag();
    let bnorm = norm(exec, b);
    let mut x = x0;
    let mut r = vec![0.0; n];
    a.apply(&x, &mut r);
    par::for_each_indexed(exec, &mut r, |i, ri| *ri = b[i] - *ri);
    let mut res = norm(exec, &r) / bnorm;
    if res <= tol {
        return Ok(LinearSolve { x, iterations: 0, residual: res });
    }
    let mut z: Vec<f64> = (0..n).map(|i| minv[i] * r[i]).collect();
    let mut p = z.clone();
    let mut rz = par::dot(exec, &r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = par::dot(exec, &p, &ap);
        if !(pap > 0.0) {
            return Err(format!("conjugate gradients broke down (p.Ap = {pap:e})"));
        }
        let alpha = rz / pap;
        axpy(exec, &mut x, alpha, &p);
        axpy(exec, &mut r, -alpha, &ap);
        res = norm(exec, &r) / bnorm;
        if res <= tol {
            return Ok(LinearSolve { x, iterations: it, residual: res });
        }
        par::for_each_indexed(exec, &mut z, |i, zi| *zi = minv[i] * r[i]);
        let rz_new = par::dot(exec, &r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        par::for_each_indexed(exec, &mut p, |i, pi| *pi = z[i] + beta * *pi);
    }
    Err(format!("conjugate gradients did not converge in {max_iter} iterations (residual {res:e})"))
}

/// Right-preconditioned BiCGSTAB with a Jacobi preconditioner.
fn bicgstab(a: &Shifted, b: &[f64], x0: Vec<f64>, tol: f64, max_iter: usize) -> Result<LinearSolve, String> {
    let exec = a.exec;
    let n = b.len();
    let minv = a.inv_diag();
    let bnorm = norm(exec, b);
    let mut x = x0;
    let mut r = vec![0.0; n];
    a.apply(&x, &mut r);
    par::for_each_indexed(exec, &mut r, |i, ri| *ri = b[i] - *ri);
    let mut res = norm(exec, &r) / bnorm;
    if res <= tol {
        return Ok(LinearSolve { x, iterations: 0, residual: res });
    }
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut t = vec![0.0; n];
    for it in 1..=max_iter {
        let rho_new = par::dot(exec, &r_hat, &r);
        if rho_new == 0.0 || omega == 0.0 {
            return Err("BiCGSTAB broke down".into());
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        par::for_each_indexed(exec, &mut p, |i, pi| *pi = r[i] + beta * (*pi - omega * v[i]));
        par::for_each_indexed(exec, &mut y, |i, yi| *yi = minv[i] * p[i]);
        a.apply(&y, &mut v);
        let rv = par::dot(exec, &r_hat, &v);
        if rv == 0.0 {
            return Err("BiCGSTAB broke down".into());
        }
        alpha = rho / rv;
        par::for_each_indexed(exec, &mut s, |i, si| *si = r[i] - alpha * v[i]);
        if norm(exec, &s) / bnorm <= tol {
            axpy(exec, &mut x, alpha, &y);
            a.apply(&x, &mut r);
            par::for_each_indexed(exec, &mut r, |i, ri| *ri = b[i] - *ri);
            return Ok(LinearSolve { x, iterations: it, residual: norm(exec, &r) / bnorm });
        }
        par::for_each_indexed(exec, &mut z, |i, zi| *zi = minv[i] * s[i]);
        a.apply(&z, &mut t);
        let tt = par::dot(exec, &t, &t);
        omega = if tt > 0.0 { par::dot(exec, &t, &s) / tt } else { 0.0 };
        par::for_each_indexed(exec, &mut x, |i, xi| *xi += alpha * y[i] + omega * z[i]);
        par::for_each_indexed(exec, &mut r, |i, ri| *ri = s[i] - omega * t[i]);
        res = norm(exec, &r) / bnorm;
        if res <= tol {
            return Ok(LinearSolve { x, iterations: it, residual: res });
        }
    }
    Err(format!("BiCGSTAB did not converge in {max_iter} iterations (residual {res:e})"))
}

/// Solves `(I - tau L) x = b` on the full node vector; `b` and the result
/// vanish on the boundary. A zero right-hand side returns exactly zero.
pub fn solve_shifted(
    grid: &Grid,
    op: &DiffusionOp,
    tau: f64,
    b: &[f64],
    guess: &[f64],
    tol: f64,
    max_iter: usize,
    exec: ExecPolicy,
) -> Result<LinearSolve, String> {
    if b.iter().all(|v| *v == 0.0) {
        return Ok(LinearSolve { x: vec![0.0; b.len()], iterations: 0, residual: 0.0 });
    }
    let a = Shifted { grid, op, tau, exec };
    if grid.dim() == 1 {
        let n = grid.len();
        let h2 = grid.h(0) * grid.h(0);
        let ni = n - 2;
        let mut lower = vec![0.0; ni];
        let mut diag = vec![0.0; ni];
        let mut upper = vec![0.0; ni];
        for i in 0..ni {
            let a11 = op.coef(i + 1)[0];
            let off = -tau * a11 / h2;
            lower[i] = off;
            upper[i] = off;
            diag[i] = 1.0 + 2.0 * tau * a11 / h2;
        }
        let inner = thomas(&lower, &diag, &upper, &b[1..n - 1])?;
        let mut x = vec![0.0; n];
        x[1..n - 1].copy_from_slice(&inner);
        let mut r = vec![0.0; n];
        a.apply(&x, &mut r);
        let rn: f64 = r.iter().zip(b).map(|(ri, bi)| (bi - ri) * (bi - ri)).sum::<f64>().sqrt();
        let bn: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        return Ok(LinearSolve { x, iterations: 1, residual: rn / bn });
    }
    let mut x0 = guess.to_vec();
    for node in grid.boundary_nodes() {
        x0[node] = 0.0;
    }
    if op.symmetric() {
        pcg(&a, b, x0, tol, max_iter)
    } else {
        bicgstab(&a, b, x0, tol, max_iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fdm::operator::assemble;
    use crate::model::{CoefficientSet, FnCoefficients, SpatialDomain};

    fn check(coef: FnCoefficients, expect_symmetric: bool) {
        let g = Grid::new(SpatialDomain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap(), vec![17, 13]).unwrap();
        let c = CoefficientSet::new(coef);
        let zero = vec![0.0; g.len()];
        let op = &assemble(&c, &g, 0.0, &[zero.clone()], ExecPolicy::Sequential).unwrap()[0];
        assert_eq!(op.symmetric(), expect_symmetric);
        let exact: Vec<f64> = (0..g.len())
            .map(|i| if g.is_boundary(i) { 0.0 } else { ((i * 7919) % 13) as f64 / 13.0 })
            .collect();
        let a = Shifted { grid: &g, op, tau: 0.01, exec: ExecPolicy::Sequential };
        let mut b = vec![0.0; g.len()];
        a.apply(&exact, &mut b);
        for policy in [ExecPolicy::Sequential, ExecPolicy::Parallel] {
            let s = solve_shifted(&g, op, 0.01, &b, &zero, 1e-12, 1000, policy).unwrap();
            assert!(s.residual <= 1e-12);
            let err = s.x.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(err < 1e-9, "err {err}");
            for node in g.boundary_nodes() {
                assert_eq!(s.x[node], 0.0);
            }
        }
    }

    #[test]
    fn cg_on_symmetric_system() {
        check(FnCoefficients::constant_diffusion(2, vec![0.7]), true);
    }

    #[test]
    fn bicgstab_on_variable_coefficients() {
        check(
            FnCoefficients::constant_diffusion(2, vec![1.0])
                .with_diffusion(|_, _, x, _| [[1.0 + x[0], 0.2], [0.2, 0.5 + x[1]]]),
            false,
        );
    }

    #[test]
    fn thomas_matches_dense_solution() {
        let x = thomas(&[0.0, -1.0, -1.0], &[2.0, 2.0, 2.0], &[-1.0, -1.0, 0.0], &[1.0, 0.0, 1.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs_is_exact_zero() {
        let g = Grid::new(SpatialDomain::interval(0.0, 1.0).unwrap(), vec![11]).unwrap();
        let c = CoefficientSet::new(FnCoefficients::constant_diffusion(1, vec![1.0]));
        let zero = vec![0.0; g.len()];
        let op = &assemble(&c, &g, 0.0, &[zero.clone()], ExecPolicy::Sequential).unwrap()[0];
        let s = solve_shifted(&g, op, 0.1, &zero, &zero, 1e-10, 10, ExecPolicy::Sequential).unwrap();
        assert!(s.x.iter().all(|v| v.to_bits() == 0));
    }
}
