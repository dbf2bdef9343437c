use std::sync::Arc;

use crate::error::{Error, Result};

use super::coefficients::{CoefficientSet, Evaluation};
use super::domain::{BoundaryKind, Grid, SpatialDomain};
use super::field::Field;
use super::lv::{LVCoefficients, LvModel};

/// A complete instance: domain, coefficients, initial data and horizon.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    coefficients: CoefficientSet,
    initial: Field,
    horizon: f64,
    lv: Option<LVCoefficients>,
}

impl ProblemSpec {
    pub fn new(coefficients: CoefficientSet, initial: Field, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::spec(format!("horizon must be positive, got {horizon}")));
        }
        if coefficients.components() != initial.components() {
            return Err(Error::spec(format!(
                "coefficients have {} components but initial data has {}",
                coefficients.components(),
                initial.components()
            )));
        }
        if coefficients.dim() != initial.grid().dim() {
            return Err(Error::spec("coefficient dimension does not match the grid"));
        }
        if initial.is_dirichlet() && initial.boundary_max_abs() != 0.0 {
            return Err(Error::spec("initial data must vanish on the boundary"));
        }
        if !initial.is_finite() {
            return Err(Error::spec("initial data must be finite"));
        }
        Ok(Self { coefficients, initial, horizon, lv: None })
    }

    pub fn domain(&self) -> &SpatialDomain {
        self.initial.grid().domain()
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.initial.grid_arc()
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }

    pub fn initial(&self) -> &Field {
        &self.initial
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn components(&self) -> usize {
        self.coefficients.components()
    }

    pub fn lv(&self) -> Option<&LVCoefficients> {
        self.lv.as_ref()
    }

    pub fn with_horizon(mut self, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0) {
            return Err(Error::spec("horizon must be positive"));
        }
        self.horizon = horizon;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Field) -> Result<Self> {
        let lv = self.lv.take();
        let mut s = Self::new(self.coefficients, initial, self.horizon)?;
        s.lv = lv;
        Ok(s)
    }

    pub fn with_coefficients(mut self, coefficients: CoefficientSet) -> Result<Self> {
        let lv = self.lv.take();
        let mut s = Self::new(coefficients, self.initial, self.horizon)?;
        s.lv = lv;
        Ok(s)
    }

    pub fn with_lv_tag(mut self, lv: LVCoefficients) -> Self {
        self.lv = Some(lv);
        self
    }

    /// Same coefficients and horizon, initial data resampled on another grid.
    pub fn on_grid<F>(&self, grid: Arc<Grid>, profile: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let initial = Field::from_fn(grid, self.components(), profile)?;
        let mut s = Self::new(self.coefficients.clone(), initial, self.horizon)?;
        s.lv = self.lv.clone();
        Ok(s)
    }
}

/// Checked evaluation of `(A, b, c)` at `(t, x, u, p)`.
pub fn evaluate_coefficients(
    spec: &ProblemSpec,
    t: f64,
    x: &[f64],
    u: &[f64],
    p: &[f64],
) -> Result<Evaluation> {
    if !spec.domain().contains(x) {
        return Err(Error::coefficient(format!("x = {x:?} outside the domain")));
    }
    if !(0.0..=spec.horizon()).contains(&t) {
        return Err(Error::coefficient(format!("t = {t} outside [0, {}]", spec.horizon())));
    }
    spec.coefficients().evaluate(t, x, u, p)
}

/// Wraps LV coefficients as a problem with `A^k = d_k I`, `b = 0` and
/// `c^k = u^k (beta_k - sum_i gamma_ki u^i)`.
pub fn build_lv_problem(
    lv: LVCoefficients,
    domain: &SpatialDomain,
    initial: Field,
    horizon: f64,
) -> Result<ProblemSpec> {
    if initial.components() != lv.species() {
        return Err(Error::spec(format!(
            "initial data has {} components but the model has {} species",
            initial.components(),
            lv.species()
        )));
    }
    if initial.grid().domain() != domain {
        return Err(Error::spec("initial data lives on a different domain"));
    }
    if matches!(domain.boundary(), BoundaryKind::DirichletZero) && initial.boundary_max_abs() != 0.0 {
        return Err(Error::spec("initial data must vanish on the boundary"));
    }
    let coefficients = CoefficientSet::new(LvModel::new(lv.clone(), domain.dim()));
    Ok(ProblemSpec::new(coefficients, initial, horizon)?.with_lv_tag(lv))
}
