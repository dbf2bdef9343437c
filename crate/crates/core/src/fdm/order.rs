use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Field, ProblemSpec};

use super::scheme::SchemeConfig;
use super::solve::solve;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub order: f64,
    /// `|u_h - u_{h/2}|` and `|u_{h/2} - u_{h/4}|` on the coarse nodes.
    pub differences: [f64; 2],
}

/// Observed spatial order from the problem's grid and two refinements by 2.
/// The time step shrinks by 4 per level so that a first-order time error
/// scales like `h^2` as well.
pub fn estimate_order<F>(spec: &ProblemSpec, scheme: &SchemeConfig, profile: F) -> Result<OrderEstimate>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let g0 = spec.grid().clone();
    let g1 = Arc::new(g0.refined());
    let g2 = Arc::new(g1.refined());
    let mut finals: Vec<Field> = Vec::with_capacity(3);
    for (level, g) in [g0.clone(), g1, g2].into_iter().enumerate() {
        let p = spec.on_grid(g, &profile)?;
        let s = scheme.clone().with_dt(scheme.dt / 4f64.powi(level as i32)).with_stride(usize::MAX);
        finals.push(solve(&p, &s)?.final_state().clone());
    }
    let diff = |a: &Field, b: &Field, fa: usize, fb: usize| {
        let mut d: f64 = 0.0;
        for node in 0..g0.len() {
            let idx = g0.index(node);
            let na = a.grid().flat([idx[0] * fa, idx[1] * fa]);
            let nb = b.grid().flat([idx[0] * fb, idx[1] * fb]);
            for k in 0..a.components() {
                d = d.max((a.component(k)[na] - b.component(k)[nb]).abs());
            }
        }
        d
    };
    let e1 = diff(&finals[0], &finals[1], 1, 2);
    let e2 = diff(&finals[1], &finals[2], 2, 4);
    if e1 < 1e-13 || e2 < 1e-13 {
        return Err(Error::DegenerateRefinement(e1.min(e2)));
    }
    Ok(OrderEstimate { order: (e1 / e2).log2(), differences: [e1, e2] })
}
