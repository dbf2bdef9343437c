use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Symmetric diffusion matrix for `n <= 2`; unused entries are zero.
pub type Mat2 = [[f64; 2]; 2];

/// Relative asymmetry above which a diffusion matrix is rejected.
pub const ASYMMETRY_TOL: f64 = 1e-12;

/// Raw coefficient evaluators of a quasilinear parabolic system
///
/// ```text
/// du^k/dt = sum_ij a^k_ij(t,x,u) d2u^k/dx_i dx_j + sum_i b_i(t,x,u,p) du^k/dx_i + c^k(t,x,u,p)
/// ```
///
/// with `p = du/dx` stored row-major as an `m x n` matrix (`p[k * n + i]`).
/// The diffusion matrix may differ per component; when all components share
/// one matrix this is the classical single-matrix form.
pub trait Coefficients: Send + Sync {
    fn dim(&self) -> usize;
    fn components(&self) -> usize;
    fn diffusion(&self, k: usize, t: f64, x: &[f64], u: &[f64]) -> Mat2;
    fn drift(&self, _t: f64, _x: &[f64], _u: &[f64], _p: &[f64]) -> [f64; 2] {
        [0.0; 2]
    }
    fn source(&self, t: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]);
    /// Whether `c` reads `p`.
    fn gradient_dependent(&self) -> bool {
        false
    }
    /// Whether `b` is identically zero.
    fn drift_free(&self) -> bool {
        false
    }
    /// `Some(d)` when `A^k = d_k I` independently of `(t, x, u)`.
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        None
    }
}

/// Result of a checked evaluation at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// One symmetric matrix per component.
    pub diffusion: Vec<Mat2>,
    pub drift: [f64; 2],
    pub source: Vec<f64>,
}

/// Shared handle on a coefficient implementation with contract checks.
#[derive(Clone)]
pub struct CoefficientSet {
    inner: Arc<dyn Coefficients>,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("dim", &self.dim())
            .field("components", &self.components())
            .field("gradient_dependent", &self.gradient_dependent())
            .finish()
    }
}

impl CoefficientSet {
    pub fn new(inner: impl Coefficients + 'static) -> Self {
        Self { inner: Arc::new(inner) }
    }

    pub fn from_arc(inner: Arc<dyn Coefficients>) -> Self {
        Self { inner }
    }

    pub fn raw(&self) -> &Arc<dyn Coefficients> {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn components(&self) -> usize {
        self.inner.components()
    }

    pub fn gradient_dependent(&self) -> bool {
        self.inner.gradient_dependent()
    }

    pub fn drift_free(&self) -> bool {
        self.inner.drift_free()
    }

    pub fn constant_diffusion(&self) -> Option<Vec<f64>> {
        self.inner.constant_diffusion()
    }

    /// Symmetrized diffusion matrix of component `k`.
    pub fn diffusion(&self, k: usize, t: f64, x: &[f64], u: &[f64]) -> Result<Mat2> {
        let mut a = self.inner.diffusion(k, t, x, u);
        let n = self.dim();
        for row in a.iter().take(n) {
            if row.iter().take(n).any(|v| !v.is_finite()) {
                return Err(Error::coefficient(format!(
                    "non-finite diffusion at t={t}, x={x:?}, u={u:?}"
                )));
            }
        }
        if n == 2 {
            let scale = a[0][0].abs().max(a[1][1].abs()).max(a[0][1].abs()).max(a[1][0].abs());
            let asym = (a[0][1] - a[1][0]).abs();
            if asym > ASYMMETRY_TOL * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::coefficient(format!(
                    "diffusion matrix asymmetric by {asym:e} (scale {scale:e}) at t={t}, x={x:?}"
                )));
            }
            let sym = 0.5 * (a[0][1] + a[1][0]);
            a[0][1] = sym;
            a[1][0] = sym;
        }
        Ok(a)
    }

    pub fn drift(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> Result<[f64; 2]> {
        let b = self.inner.drift(t, x, u, p);
        if b.iter().take(self.dim()).any(|v| !v.is_finite()) {
            return Err(Error::coefficient(format!("non-finite drift at t={t}, x={x:?}")));
        }
        Ok(b)
    }

    pub fn source_into(&self, t: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        self.inner.source(t, x, u, p, out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::coefficient(format!(
                "non-finite source at t={t}, x={x:?}, u={u:?}"
            )));
        }
        Ok(())
    }

    pub fn source(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.components()];
        self.source_into(t, x, u, p, &mut out)?;
        Ok(out)
    }

    /// Checked evaluation of `(A, b, c)`.
    pub fn evaluate(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> Result<Evaluation> {
        let m = self.components();
        let n = self.dim();
        if x.len() != n || u.len() != m || p.len() != m * n {
            return Err(Error::coefficient(format!(
                "argument shapes x:{} u:{} p:{} do not match n={n}, m={m}",
                x.len(),
                u.len(),
                p.len()
            )));
        }
        let diffusion = (0..m)
            .map(|k| self.diffusion(k, t, x, u))
            .collect::<Result<Vec<_>>>()?;
        let drift = self.drift(t, x, u, p)?;
        let source = self.source(t, x, u, p)?;
        Ok(Evaluation { diffusion, drift, source })
    }
}

type DiffusionEval = dyn Fn(usize, f64, &[f64], &[f64]) -> Mat2 + Send + Sync;
type DriftEval = dyn Fn(f64, &[f64], &[f64], &[f64]) -> [f64; 2] + Send + Sync;
type SourceEval = dyn Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync;

/// Coefficients given by closures.
#[derive(Clone)]
pub struct FnCoefficients {
    dim: usize,
    components: usize,
    diffusion: Arc<DiffusionEval>,
    drift: Option<Arc<DriftEval>>,
    source: Arc<SourceEval>,
    gradient_dependent: bool,
    constant_diffusion: Option<Vec<f64>>,
}

impl FnCoefficients {
    /// `A^k = d_k I`, no drift, zero source.
    pub fn constant_diffusion(dim: usize, d: Vec<f64>) -> Self {
        let dd = d.clone();
        Self {
            dim,
            components: d.len(),
            diffusion: Arc::new(move |k, _, _, _| scalar_matrix(dd[k], dim)),
            drift: None,
            source: Arc::new(|_, _, _, _, out| out.fill(0.0)),
            gradient_dependent: false,
            constant_diffusion: Some(d),
        }
    }

    pub fn with_diffusion<F>(mut self, f: F) -> Self
    where
        F: Fn(usize, f64, &[f64], &[f64]) -> Mat2 + Send + Sync + 'static,
    {
        self.diffusion = Arc::new(f);
        self.constant_diffusion = None;
        self
    }

    pub fn with_drift<F>(mut self, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64], &[f64]) -> [f64; 2] + Send + Sync + 'static,
    {
        self.drift = Some(Arc::new(f));
        self
    }

    pub fn with_source<F>(mut self, gradient_dependent: bool, f: F) -> Self
    where
        F: Fn(f64, &[f64], &[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        self.source = Arc::new(f);
        self.gradient_dependent = gradient_dependent;
        self
    }
}

impl Coefficients for FnCoefficients {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self) -> usize {
        self.components
    }
    fn diffusion(&self, k: usize, t: f64, x: &[f64], u: &[f64]) -> Mat2 {
        (self.diffusion)(k, t, x, u)
    }
    fn drift(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> [f64; 2] {
        match &self.drift {
            Some(b) => b(t, x, u, p),
            None => [0.0; 2],
        }
    }
    fn source(&self, t: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]) {
        (self.source)(t, x, u, p, out)
    }
    fn gradient_dependent(&self) -> bool {
        self.gradient_dependent
    }
    fn drift_free(&self) -> bool {
        self.drift.is_none()
    }
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        self.constant_diffusion.clone()
    }
}

/// Adds a constant vector to the source of another coefficient set.
pub struct ShiftedSource {
    inner: Arc<dyn Coefficients>,
    shift: Vec<f64>,
}

impl ShiftedSource {
    pub fn new(inner: Arc<dyn Coefficients>, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != inner.components() {
            return Err(Error::spec("source shift length must equal component count"));
        }
        Ok(Self { inner, shift })
    }
}

impl Coefficients for ShiftedSource {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn diffusion(&self, k: usize, t: f64, x: &[f64], u: &[f64]) -> Mat2 {
        self.inner.diffusion(k, t, x, u)
    }
    fn drift(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> [f64; 2] {
        self.inner.drift(t, x, u, p)
    }
    fn source(&self, t: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]) {
        self.inner.source(t, x, u, p, out);
        for (o, s) in out.iter_mut().zip(&self.shift) {
            *o += s;
        }
    }
    fn gradient_dependent(&self) -> bool {
        self.inner.gradient_dependent()
    }
    fn drift_free(&self) -> bool {
        self.inner.drift_free()
    }
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        self.inner.constant_diffusion()
    }
}

/// Multiplies the source by a spatial weight, e.g. a cutoff `zeta_r(x)`.
pub struct WeightedSource {
    inner: Arc<dyn Coefficients>,
    weight: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
}

impl WeightedSource {
    pub fn new<F>(inner: Arc<dyn Coefficients>, weight: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self { inner, weight: Arc::new(weight) }
    }
}

impl Coefficients for WeightedSource {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn components(&self) -> usize {
        self.inner.components()
    }
    fn diffusion(&self, k: usize, t: f64, x: &[f64], u: &[f64]) -> Mat2 {
        self.inner.diffusion(k, t, x, u)
    }
    fn drift(&self, t: f64, x: &[f64], u: &[f64], p: &[f64]) -> [f64; 2] {
        self.inner.drift(t, x, u, p)
    }
    fn source(&self, t: f64, x: &[f64], u: &[f64], p: &[f64], out: &mut [f64]) {
        let w = (self.weight)(x);
        if w == 0.0 {
            out.fill(0.0);
            return;
        }
        self.inner.source(t, x, u, p, out);
        for o in out.iter_mut() {
            *o *= w;
        }
    }
    fn gradient_dependent(&self) -> bool {
        self.inner.gradient_dependent()
    }
    fn drift_free(&self) -> bool {
        self.inner.drift_free()
    }
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        self.inner.constant_diffusion()
    }
}

pub fn scalar_matrix(d: f64, dim: usize) -> Mat2 {
    if dim == 1 {
        [[d, 0.0], [0.0, 0.0]]
    } else {
        [[d, 0.0], [0.0, d]]
    }
}

/// Eigenvalues `(min, max)` of a symmetric matrix of size `dim`.
pub fn eigen_range(a: &Mat2, dim: usize) -> (f64, f64) {
    if dim == 1 {
        return (a[0][0], a[0][0]);
    }
    let mean = 0.5 * (a[0][0] + a[1][1]);
    let half_diff = 0.5 * (a[0][0] - a[1][1]);
    let r = half_diff.hypot(a[0][1]);
    (mean - r, mean + r)
}
