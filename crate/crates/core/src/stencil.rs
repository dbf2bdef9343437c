//! Second-order finite-difference stencils on uniform grids.
//!
//! Interior nodes use central differences. At the ends of an axis the first
//! derivative uses the 3-point and the second derivative the 4-point
//! one-sided second-order formula.

use crate::model::Grid;

/// `(flat offset, weight)` pairs of a 1D operator along `axis` at `node`.
fn first_weights(grid: &Grid, node: usize, axis: usize) -> [(isize, f64); 3] {
    let n = grid.nodes_per_axis()[axis];
    let i = grid.index(node)[axis];
    let s = grid.stride(axis) as isize;
    let h = grid.h(axis);
    if i == 0 {
        [(0, -1.5 / h), (s, 2.0 / h), (2 * s, -0.5 / h)]
    } else if i + 1 == n {
        [(0, 1.5 / h), (-s, -2.0 / h), (-2 * s, 0.5 / h)]
    } else {
        [(-s, -0.5 / h), (s, 0.5 / h), (0, 0.0)]
    }
}

#[inline]
fn at(v: &[f64], node: usize, off: isize) -> f64 {
    v[(node as isize + off) as usize]
}

/// `dv/dx_axis` at `node`.
pub fn first_diff(grid: &Grid, v: &[f64], node: usize, axis: usize) -> f64 {
    first_weights(grid, node, axis).iter().map(|&(o, w)| w * at(v, node, o)).sum()
}

/// `d2v/dx_axis^2` at `node`.
pub fn second_diff(grid: &Grid, v: &[f64], node: usize, axis: usize) -> f64 {
    let n = grid.nodes_per_axis()[axis];
    let i = grid.index(node)[axis];
    let s = grid.stride(axis) as isize;
    let h2 = grid.h(axis) * grid.h(axis);
    let dir = if i == 0 {
        1
    } else if i + 1 == n {
        -1
    } else {
        return (at(v, node, -s) - 2.0 * v[node] + at(v, node, s)) / h2;
    };
    let s = dir * s;
    if n >= 4 {
        (2.0 * v[node] - 5.0 * at(v, node, s) + 4.0 * at(v, node, 2 * s) - at(v, node, 3 * s)) / h2
    } else {
        (v[node] - 2.0 * at(v, node, s) + at(v, node, 2 * s)) / h2
    }
}

/// `d2v/dx0 dx1` at `node` (2D only), as the tensor product of first
/// differences.
pub fn mixed_diff(grid: &Grid, v: &[f64], node: usize) -> f64 {
    let wx = first_weights(grid, node, 0);
    let mut acc = 0.0;
    for &(ox, w) in &wx {
        if w == 0.0 {
            continue;
        }
        let shifted = (node as isize + ox) as usize;
        acc += w * first_diff(grid, v, shifted, 1);
    }
    acc
}

/// Standard 3/5-point Laplacian at an interior node.
pub fn laplacian(grid: &Grid, v: &[f64], node: usize) -> f64 {
    (0..grid.dim()).map(|a| second_diff(grid, v, node, a)).sum()
}

/// Gradient of every component at `node`, written row-major into `p`
/// (`p[k * n + i]`).
pub fn gradient_into(grid: &Grid, comps: &[Vec<f64>], node: usize, p: &mut [f64]) {
    let n = grid.dim();
    for (k, v) in comps.iter().enumerate() {
        for a in 0..n {
            p[k * n + a] = first_diff(grid, v, node, a);
        }
    }
}
