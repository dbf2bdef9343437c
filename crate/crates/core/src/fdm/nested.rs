use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BoundaryKind, CoefficientSet, Cutoff, Field, Grid, ProblemSpec, SpatialDomain, WeightedSource};
use crate::par;

use super::scheme::SchemeConfig;
use super::solve::{solve, Trajectory};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NestedConvergenceReport {
    pub radii: Vec<f64>,
    /// `differences[l]` compares radius `l` with radius `l + 1`: the largest
    /// `|u_l - u_{l+1}|` over the inner half of the smallest box and all
    /// stored times.
    pub differences: Vec<f64>,
    pub tol: f64,
    pub converged: bool,
}

/// Multi-index offset of the node of `outer` located at node 0 of `inner`.
fn offset(outer: &Grid, inner: &Grid) -> Result<[usize; 2]> {
    let mut off = [0usize; 2];
    for a in 0..outer.dim() {
        let h = outer.h(a);
        let shift = (inner.domain().bounds()[a].0 - outer.domain().bounds()[a].0) / h;
        let r = shift.round();
        if (shift - r).abs() > 1e-6 || r < 0.0 {
            return Err(Error::spec("nested boxes are not aligned with the grid spacing"));
        }
        off[a] = r as usize;
    }
    Ok(off)
}

fn shifted(idx: [usize; 2], off: [usize; 2]) -> [usize; 2] {
    [idx[0] + off[0], idx[1] + off[1]]
}

/// Solves the whole-space problem on the boxes `[-r_l, r_l]^n` of the radius
/// schedule with initial data `phi zeta_r` and source `zeta_r c`, and
/// measures how consecutive boxes differ near the origin.
pub fn solve_cauchy_nested(
    spec: &ProblemSpec,
    scheme: &SchemeConfig,
    tol_nested: f64,
) -> Result<(Trajectory, NestedConvergenceReport)> {
    let (radii, width) = match spec.domain().boundary() {
        BoundaryKind::CauchyNested { radii, transition_width } => (radii.clone(), *transition_width),
        BoundaryKind::DirichletZero => return Err(Error::spec("solve_cauchy_nested needs a cauchy_nested domain")),
    };
    if !(tol_nested > 0.0) {
        return Err(Error::spec("nested tolerance must be positive"));
    }
    let full = spec.grid();
    let n = full.dim();
    let h = full.h(0);
    if (0..n).any(|a| (full.h(a) - h).abs() > 1e-12 * h) {
        return Err(Error::spec("nested boxes need equal spacing on every axis"));
    }
    let mut problems = Vec::with_capacity(radii.len());
    for &r in &radii {
        let grid = std::sync::Arc::new(Grid::with_spacing(SpatialDomain::centered_box(n, r)?, h)?);
        let cutoff = Cutoff::new(r, width)?;
        let off = offset(full, &grid)?;
        let phi = spec.initial();
        let mut values = vec![vec![0.0; grid.len()]; spec.components()];
        for node in 0..grid.len() {
            if grid.is_boundary(node) {
                continue;
            }
            let z = cutoff.eval(&grid.point(node));
            let src = full.flat(shifted(grid.index(node), off));
            for (k, vk) in values.iter_mut().enumerate() {
                vk[node] = phi.component(k)[src] * z;
            }
        }
        let init = Field::from_values(grid, values)?;
        let coef = CoefficientSet::new(WeightedSource::new(spec.coefficients().raw().clone(), move |x| cutoff.eval(x)));
        problems.push(ProblemSpec::new(coef, init, spec.horizon())?);
    }
    let runs = par::run_jobs(scheme.exec, problems, |p| solve(&p, scheme));
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

    let r1 = radii[0];
    let small = runs[0].grid();
    let region: Vec<[usize; 2]> = (0..small.len())
        .filter(|&node| small.point(node).iter().all(|x| x.abs() <= 0.5 * r1 + 1e-12))
        .map(|node| small.index(node))
        .collect();
    let mut differences = Vec::with_capacity(runs.len() - 1);
    for l in 0..runs.len() - 1 {
        let (a, b) = (&runs[l], &runs[l + 1]);
        let (ga, gb) = (a.grid(), b.grid());
        let off_a = offset(ga, small)?;
        let off_b = offset(gb, small)?;
        let mut d: f64 = 0.0;
        for (sa, sb) in a.snapshots.iter().zip(&b.snapshots) {
            for idx in &region {
                let na = ga.flat(shifted(*idx, off_a));
                let nb = gb.flat(shifted(*idx, off_b));
                for k in 0..sa.components() {
                    d = d.max((sa.component(k)[na] - sb.component(k)[nb]).abs());
                }
            }
        }
        differences.push(d);
    }
    for w in differences.windows(2) {
        if w[1] >= w[0] && w[1] > tol_nested {
            return Err(Error::NonConvergence(format!(
                "nested differences {:e} -> {:e} do not decrease",
                w[0], w[1]
            )));
        }
    }
    let converged = differences.last().map_or(true, |d| *d <= tol_nested);
    let largest = runs.into_iter().last().expect("at least one radius");
    Ok((largest, NestedConvergenceReport { radii, differences, tol: tol_nested, converged }))
}
