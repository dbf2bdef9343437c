//! Frozen-coefficient diffusion operators on the full node vector. Boundary
//! rows are zero; the boundary values themselves are never read because every
//! interior stencil only touches neighbours, which are zero on the boundary.

use crate::error::Result;
use crate::model::{eigen_range, CoefficientSet, Grid};
use crate::par::{self, ExecPolicy};

/// `sum_ij a_ij d2/dx_i dx_j` with `a` frozen per node, stored as
/// `(a11, a12, a22)`.
#[derive(Debug, Clone)]
pub struct DiffusionOp {
    coef: Vec<[f64; 3]>,
    lambda_max: f64,
    symmetric: bool,
}

impl DiffusionOp {
    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// Whether `I - tau L` is a symmetric matrix (uniform diagonal
    /// coefficients without a cross term).
    pub fn symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn coef(&self, node: usize) -> [f64; 3] {
        self.coef[node]
    }

    #[inline]
    pub fn apply_at(&self, grid: &Grid, v: &[f64], node: usize) -> f64 {
        let [a11, a12, a22] = self.coef[node];
        if grid.dim() == 1 {
            if a11 == 0.0 {
                return 0.0;
            }
            let h2 = grid.h(0) * grid.h(0);
            return a11 * (v[node - 1] - 2.0 * v[node] + v[node + 1]) / h2;
        }
        let sx = grid.stride(0);
        let (hx, hy) = (grid.h(0), grid.h(1));
        let mut acc = a11 * (v[node - sx] - 2.0 * v[node] + v[node + sx]) / (hx * hx)
            + a22 * (v[node - 1] - 2.0 * v[node] + v[node + 1]) / (hy * hy);
        if a12 != 0.0 {
            let cross = v[node + sx + 1] - v[node + sx - 1] - v[node - sx + 1] + v[node - sx - 1];
            acc += 2.0 * a12 * cross / (4.0 * hx * hy);
        }
        acc
    }

    /// Diagonal entry of `L` at `node`.
    pub fn diag_at(&self, grid: &Grid, node: usize) -> f64 {
        let [a11, _, a22] = self.coef[node];
        let mut d = -2.0 * a11 / (grid.h(0) * grid.h(0));
        if grid.dim() == 2 {
            d -= 2.0 * a22 / (grid.h(1) * grid.h(1));
        }
        d
    }

    /// `out = L v` (zero on the boundary).
    pub fn apply(&self, grid: &Grid, v: &[f64], out: &mut [f64], exec: ExecPolicy) {
        par::for_each_indexed(exec, out, |node, o| {
            *o = if grid.is_boundary(node) { 0.0 } else { self.apply_at(grid, v, node) };
        });
    }
}

/// Diffusion operators of all components with `A^k(t, x, u)` evaluated at
/// the given state.
pub fn assemble(
    coefficients: &CoefficientSet,
    grid: &Grid,
    t: f64,
    state: &[Vec<f64>],
    exec: ExecPolicy,
) -> Result<Vec<DiffusionOp>> {
    let m = state.len();
    let n = grid.dim();
    let per_node = par::map_range(exec, grid.len(), |node| -> Result<Vec<[f64; 3]>> {
        if grid.is_boundary(node) {
            return Ok(vec![[0.0; 3]; m]);
        }
        let x = grid.point(node);
        let u: Vec<f64> = state.iter().map(|c| c[node]).collect();
        (0..m)
            .map(|k| {
                let a = coefficients.diffusion(k, t, &x, &u)?;
                Ok(if n == 1 { [a[0][0], 0.0, 0.0] } else { [a[0][0], a[0][1], a[1][1]] })
            })
            .collect()
    });
    let per_node = per_node.into_iter().collect::<Result<Vec<_>>>()?;
    let uniform = coefficients.constant_diffusion().is_some();
    Ok((0..m)
        .map(|k| {
            let coef: Vec<[f64; 3]> = per_node.iter().map(|c| c[k]).collect();
            let lambda_max = coef
                .iter()
                .map(|c| eigen_range(&[[c[0], c[1]], [c[1], c[2]]], n).1)
                .fold(0.0, f64::max);
            let no_cross = coef.iter().all(|c| c[1] == 0.0);
            DiffusionOp { coef, lambda_max, symmetric: uniform && no_cross }
        })
        .collect())
}
