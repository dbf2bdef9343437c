use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Field, LVCoefficients, SpatialDomain};
use crate::par::{self, ExecPolicy};

const EDGE_TOL: f64 = 1e-9;

/// Quartic bump `(1 - |x - x0|^2 / r^2)^2` supported on the ball of radius `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestFunction {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl TestFunction {
    /// Fails unless the closed support lies strictly inside `domain`.
    pub fn new(center: Vec<f64>, radius: f64, domain: &SpatialDomain) -> Result<Self> {
        if center.len() != domain.dim() {
            return Err(Error::spec("test function center has the wrong dimension"));
        }
        if !(radius > 0.0) {
            return Err(Error::spec(format!("test function radius must be positive, got {radius}")));
        }
        for (c, (lo, hi)) in center.iter().zip(domain.bounds()) {
            if !(c - radius > *lo && c + radius < *hi) {
                return Err(Error::spec(format!(
                    "support of bump at {center:?} with radius {radius} leaves the domain"
                )));
            }
        }
        Ok(Self { center, radius })
    }

    /// Five bumps of radius `0.2 x` width on an interior lattice.
    pub fn battery(domain: &SpatialDomain) -> Result<Vec<Self>> {
        let b = domain.bounds();
        match domain.dim() {
            1 => {
                let (lo, hi) = b[0];
                let w = hi - lo;
                (0..5).map(|k| Self::new(vec![lo + w * (0.3 + 0.1 * k as f64)], 0.2 * w, domain)).collect()
            }
            _ => {
                let w = domain.length(0).min(domain.length(1));
                let at = |fx: f64, fy: f64| vec![b[0].0 + fx * domain.length(0), b[1].0 + fy * domain.length(1)];
                [(0.5, 0.5), (0.3, 0.3), (0.7, 0.3), (0.3, 0.7), (0.7, 0.7)]
                    .into_iter()
                    .map(|(fx, fy)| Self::new(at(fx, fy), 0.2 * w, domain))
                    .collect()
            }
        }
    }

    fn q(&self, x: &[f64]) -> f64 {
        let rho2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        rho2 / (self.radius * self.radius)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let q = self.q(x);
        if q >= 1.0 - EDGE_TOL {
            0.0
        } else {
            (1.0 - q) * (1.0 - q)
        }
    }

    /// `-4 / r^2 [n (1 - q) - 2 q]` inside, `0` outside; on the sphere (up to
    /// rounding) the mean of the one-sided limits.
    pub fn laplacian(&self, x: &[f64]) -> f64 {
        let q = self.q(x);
        let r2 = self.radius * self.radius;
        if (q - 1.0).abs() <= EDGE_TOL {
            4.0 / r2
        } else if q > 1.0 {
            0.0
        } else {
            -4.0 / r2 * (x.len() as f64 * (1.0 - q) - 2.0 * q)
        }
    }
}

type LimitFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Limit coefficients `beta, gamma, delta, rho, sigma, theta` as functions of x.
#[derive(Clone)]
pub struct LimitCoefficients {
    funcs: [LimitFn; 6],
}

impl std::fmt::Debug for LimitCoefficients {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LimitCoefficients")
    }
}

impl LimitCoefficients {
    pub fn constant(values: [f64; 6]) -> Self {
        Self { funcs: values.map(|v| Arc::new(move |_: &[f64]| v) as LimitFn) }
    }

    pub fn from_fns(funcs: [LimitFn; 6]) -> Self {
        Self { funcs }
    }

    /// Uses the declared limit of each two-species family.
    pub fn from_lv(lv: &LVCoefficients) -> Result<Self> {
        let classical = lv.classical().ok_or_else(|| Error::spec("limit coefficients need two species"))?;
        let probe = vec![0.0; 2];
        let mut funcs: Vec<LimitFn> = Vec::with_capacity(6);
        for (name, coef) in classical {
            if coef.limit(&probe).is_none() {
                return Err(Error::spec(format!("coefficient {name} has no declared limit as t -> inf")));
            }
            let c = coef.clone();
            funcs.push(Arc::new(move |x: &[f64]| c.limit(x).unwrap_or(f64::NAN)));
        }
        let funcs: [LimitFn; 6] = funcs.try_into().map_err(|_| Error::spec("expected six coefficients"))?;
        Ok(Self { funcs })
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> [f64; 6] {
        std::array::from_fn(|i| (self.funcs[i])(x))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualPair {
    pub test_id: usize,
    /// `int d1 lap(eta) u + eta u (beta - gamma u - delta v)`.
    pub r1: f64,
    /// `int d2 lap(zeta) v + zeta v (rho - sigma u - theta v)`.
    pub r2: f64,
    /// `int eta dx`.
    pub scale: f64,
}

/// Weak residuals of the two-species elliptic limit system by trapezoid
/// quadrature; bump Laplacians are evaluated analytically.
pub fn elliptic_weak_residual(
    fields: &Field,
    d1: f64,
    d2: f64,
    limits: &LimitCoefficients,
    tests: &[TestFunction],
    exec: ExecPolicy,
) -> Result<Vec<ResidualPair>> {
    if fields.components() != 2 {
        return Err(Error::spec(format!("expected two components, got {}", fields.components())));
    }
    let grid = fields.grid();
    for (i, tf) in tests.iter().enumerate() {
        TestFunction::new(tf.center.clone(), tf.radius, grid.domain())
            .map_err(|e| Error::spec(format!("test function {i}: {e}")))?;
    }
    let (u, v) = (fields.component(0), fields.component(1));
    let pairs = par::map_range(exec, tests.len(), |id| -> Result<ResidualPair> {
        let tf = &tests[id];
        let (mut r1, mut r2, mut scale) = (0.0, 0.0, 0.0);
        for node in 0..grid.len() {
            let x = grid.point(node);
            let lap = tf.laplacian(&x);
            let eta = tf.value(&x);
            if lap == 0.0 && eta == 0.0 {
                continue;
            }
            let w = grid.trapezoid_weight(node);
            let [beta, gamma, delta, rho, sigma, theta] = limits.eval(&x);
            let (a, b) = (u[node], v[node]);
            let e1 = d1 * lap * a + eta * a * (beta - gamma * a - delta * b);
            let e2 = d2 * lap * b + eta * b * (rho - sigma * a - theta * b);
            if !(e1.is_finite() && e2.is_finite()) {
                return Err(Error::coefficient(format!("non-finite residual integrand at {x:?}")));
            }
            r1 += w * e1;
            r2 += w * e2;
            scale += w * eta;
        }
        Ok(ResidualPair { test_id: id, r1, r2, scale })
    });
    pairs.into_iter().collect()
}

/// Appends rows `test_id,equation,residual`, writing the header if the file
/// is new or empty.
pub fn write_residuals_csv(path: &Path, residuals: &[ResidualPair]) -> Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
    let mut out = String::new();
    if fresh {
        out.push_str("test_id,equation,residual\n");
    }
    for r in residuals {
        out.push_str(&format!("{},1,{:e}\n{},2,{:e}\n", r.test_id, r.r1, r.test_id, r.r2));
    }
    f.write_all(out.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_matches_finite_differences() {
        let d = SpatialDomain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let tf = TestFunction::new(vec![0.5, 0.5], 0.2, &d).unwrap();
        let h = 1e-4;
        for x in [[0.55, 0.47], [0.6, 0.6], [0.5, 0.5]] {
            let mut fd = -4.0 * tf.value(&x);
            for (dx, dy) in [(h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h)] {
                fd += tf.value(&[x[0] + dx, x[1] + dy]);
            }
            fd /= h * h;
            assert!((fd - tf.laplacian(&x)).abs() < 1e-4 * (1.0 + fd.abs()), "{fd} vs {}", tf.laplacian(&x));
        }
    }

    #[test]
    fn support_must_be_interior() {
        let d = SpatialDomain::interval(0.0, 1.0).unwrap();
        assert!(TestFunction::new(vec![0.1], 0.1, &d).is_err());
        assert!(TestFunction::new(vec![0.5], 0.2, &d).is_ok());
        assert_eq!(TestFunction::battery(&d).unwrap().len(), 5);
    }
}
