use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type Envelope1 = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type Envelope2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// User-supplied structural constants and envelopes of the problem:
/// parabolicity bounds `mu_hat(|u|) I <= A <= mu(|u|) I`, growth envelopes
/// `theta1(|u|)` and `theta2(|u|, |p|)`, dissipativity constants `d1, d2`,
/// and the region radii `C1` (state) and `C2` (gradient).
#[derive(Clone)]
pub struct Majorants {
    pub kappa: f64,
    pub mu: Option<Envelope1>,
    pub mu_hat: Option<Envelope1>,
    pub theta1: Option<Envelope1>,
    pub theta2: Option<Envelope2>,
    pub d1: f64,
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl fmt::Debug for Majorants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Majorants")
            .field("kappa", &self.kappa)
            .field("d1", &self.d1)
            .field("d2", &self.d2)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("mu", &self.mu.is_some())
            .field("mu_hat", &self.mu_hat.is_some())
            .field("theta1", &self.theta1.is_some())
            .field("theta2", &self.theta2.is_some())
            .finish()
    }
}

impl Majorants {
    pub fn new(kappa: f64, d1: f64, d2: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(kappa > 0.0) || !(d1 >= 0.0) || !(d2 >= 0.0) || !(c1 > 0.0) || !(c2 > 0.0) {
            return Err(Error::spec(format!(
                "majorants need kappa>0, d1>=0, d2>=0, C1>0, C2>0 (got {kappa}, {d1}, {d2}, {c1}, {c2})"
            )));
        }
        Ok(Self { kappa, mu: None, mu_hat: None, theta1: None, theta2: None, d1, d2, c1, c2 })
    }

    pub fn with_mu(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.mu = Some(Arc::new(f));
        self
    }

    pub fn with_mu_hat(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.mu_hat = Some(Arc::new(f));
        self
    }

    pub fn with_theta1(mut self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.theta1 = Some(Arc::new(f));
        self
    }

    pub fn with_theta2(mut self, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.theta2 = Some(Arc::new(f));
        self
    }

    /// Checks that `mu` is non-decreasing and `mu_hat` non-increasing on a
    /// uniform sample of `[0, C1]`.
    pub fn validate_envelopes(&self, samples: usize) -> Result<()> {
        let n = samples.max(2);
        let pts: Vec<f64> = (0..n).map(|i| self.c1 * i as f64 / (n - 1) as f64).collect();
        if let Some(mu) = &self.mu {
            if pts.windows(2).any(|w| mu(w[1]) < mu(w[0])) {
                return Err(Error::spec("mu must be non-decreasing in |u|"));
            }
        }
        if let Some(mh) = &self.mu_hat {
            if pts.windows(2).any(|w| mh(w[1]) > mh(w[0])) {
                return Err(Error::spec("mu_hat must be non-increasing in |u|"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_validated() {
        assert!(Majorants::new(0.0, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(Majorants::new(1.0, -1.0, 0.0, 1.0, 1.0).is_err());
        assert!(Majorants::new(1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(Majorants::new(1.0, 0.0, 0.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn envelope_monotonicity() {
        let m = Majorants::new(1.0, 0.0, 1.0, 2.0, 1.0).unwrap().with_mu(|s| 1.0 + s * s);
        assert!(m.validate_envelopes(20).is_ok());
        let m = m.with_mu_hat(|s| s);
        assert!(m.validate_envelopes(20).is_err());
    }
}
