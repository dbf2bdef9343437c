use crate::error::{Error, Result};

use super::coefficients::{scalar_matrix, Coefficients, Mat2};
use super::family::ScalarCoef;

/// Diffusive `m`-species Lotka-Volterra competition coefficients:
///
/// ```text
/// du^k/dt = d_k Lap u^k + u^k (beta_k - sum_i gamma_ki u^i)
/// ```
#[derive(Debug, Clone)]
pub struct LVCoefficients {
    diffusion: Vec<f64>,
    growth: Vec<ScalarCoef>,
    interaction: Vec<Vec<ScalarCoef>>,
}

/// A sampled coefficient value that is negative.
#[derive(Debug, Clone, PartialEq)]
pub struct SignViolation {
    pub name: String,
    pub t: f64,
    pub x: Vec<f64>,
    pub value: f64,
}

impl LVCoefficients {
    pub fn new(
        diffusion: Vec<f64>,
        growth: Vec<ScalarCoef>,
        interaction: Vec<Vec<ScalarCoef>>,
    ) -> Result<Self> {
        let m = diffusion.len();
        if m == 0 {
            return Err(Error::spec("at least one species required"));
        }
        if let Some(d) = diffusion.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::spec(format!("diffusion constants must be positive, got {d}")));
        }
        if growth.len() != m || interaction.len() != m || interaction.iter().any(|r| r.len() != m) {
            return Err(Error::spec(format!(
                "growth must have {m} entries and interaction must be {m}x{m}"
            )));
        }
        Ok(Self { diffusion, growth, interaction })
    }

    /// Two-species model with the classical names:
    /// `u_t = d1 Lap u + u(beta - gamma u - delta v)`,
    /// `v_t = d2 Lap v + v(rho - sigma u - theta v)`.
    #[allow(clippy::too_many_arguments)]
    pub fn two_species(
        d1: f64,
        d2: f64,
        beta: ScalarCoef,
        gamma: ScalarCoef,
        delta: ScalarCoef,
        rho: ScalarCoef,
        sigma: ScalarCoef,
        theta: ScalarCoef,
    ) -> Result<Self> {
        Self::new(vec![d1, d2], vec![beta, rho], vec![vec![gamma, delta], vec![sigma, theta]])
    }

    /// Constant-coefficient model.
    pub fn constant(diffusion: Vec<f64>, growth: Vec<f64>, interaction: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            diffusion,
            growth.into_iter().map(ScalarCoef::constant).collect(),
            interaction
                .into_iter()
                .map(|r| r.into_iter().map(ScalarCoef::constant).collect())
                .collect(),
        )
    }

    pub fn species(&self) -> usize {
        self.diffusion.len()
    }

    pub fn diffusion(&self) -> &[f64] {
        &self.diffusion
    }

    pub fn growth(&self, k: usize) -> &ScalarCoef {
        &self.growth[k]
    }

    pub fn interaction(&self, k: usize, i: usize) -> &ScalarCoef {
        &self.interaction[k][i]
    }

    /// The six two-species coefficients in the order
    /// `beta, gamma, delta, rho, sigma, theta`.
    pub fn classical(&self) -> Option<[(&'static str, &ScalarCoef); 6]> {
        if self.species() != 2 {
            return None;
        }
        Some([
            ("beta", &self.growth[0]),
            ("gamma", &self.interaction[0][0]),
            ("delta", &self.interaction[0][1]),
            ("rho", &self.growth[1]),
            ("sigma", &self.interaction[1][0]),
            ("theta", &self.interaction[1][1]),
        ])
    }

    /// `c^k = u^k (beta_k - sum_i gamma_ki u^i)` written into `out`.
    #[inline]
    pub fn source_into(&self, t: f64, x: &[f64], u: &[f64], out: &mut [f64]) {
        for k in 0..self.species() {
            if u[k] == 0.0 {
                out[k] = 0.0;
                continue;
            }
            let mut g = self.growth[k].eval(t, x);
            for (i, ui) in u.iter().enumerate() {
                g -= self.interaction[k][i].eval(t, x) * ui;
            }
            out[k] = u[k] * g;
        }
    }

    /// Samples every coefficient and returns the negative values found.
    pub fn sign_violations(&self, times: &[f64], points: &[Vec<f64>]) -> Vec<SignViolation> {
        let m = self.species();
        let mut out = Vec::new();
        for &t in times {
            for x in points {
                for k in 0..m {
                    let b = self.growth[k].eval(t, x);
                    if b < 0.0 {
                        out.push(SignViolation { name: format!("beta_{k}"), t, x: x.clone(), value: b });
                    }
                    for i in 0..m {
                        let g = self.interaction[k][i].eval(t, x);
                        if g < 0.0 {
                            out.push(SignViolation {
                                name: format!("gamma_{k}{i}"),
                                t,
                                x: x.clone(),
                                value: g,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// [`Coefficients`] view of an LV model on an `n`-dimensional domain.
#[derive(Debug, Clone)]
pub struct LvModel {
    lv: LVCoefficients,
    dim: usize,
}

impl LvModel {
    pub fn new(lv: LVCoefficients, dim: usize) -> Self {
        Self { lv, dim }
    }

    pub fn lv(&self) -> &LVCoefficients {
        &self.lv
    }
}

impl Coefficients for LvModel {
    fn dim(&self) -> usize {
        self.dim
    }
    fn components(&self) -> usize {
        self.lv.species()
    }
    fn diffusion(&self, k: usize, _t: f64, _x: &[f64], _u: &[f64]) -> Mat2 {
        scalar_matrix(self.lv.diffusion[k], self.dim)
    }
    fn source(&self, t: f64, x: &[f64], u: &[f64], _p: &[f64], out: &mut [f64]) {
        self.lv.source_into(t, x, u, out)
    }
    fn drift_free(&self) -> bool {
        true
    }
    fn constant_diffusion(&self) -> Option<Vec<f64>> {
        Some(self.lv.diffusion.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_diffusion() {
        assert!(LVCoefficients::constant(vec![0.0], vec![1.0], vec![vec![1.0]]).is_err());
        assert!(LVCoefficients::constant(vec![1.0, 1.0], vec![1.0], vec![vec![1.0]]).is_err());
        assert!(LVCoefficients::constant(vec![1.0], vec![1.0], vec![vec![1.0]]).is_ok());
    }

    #[test]
    fn negative_coefficients_are_reported_not_clamped() {
        let lv = LVCoefficients::new(
            vec![1.0],
            vec![ScalarCoef::of_time(|t| 1.0 - t)],
            vec![vec![ScalarCoef::constant(1.0)]],
        )
        .unwrap();
        let v = lv.sign_violations(&[0.0, 2.0], &[vec![0.5]]);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].value, -1.0);
        assert_eq!(lv.growth(0).eval(2.0, &[0.5]), -1.0);
    }

    #[test]
    fn classical_aliases() {
        let lv = LVCoefficients::constant(
            vec![1.0, 2.0],
            vec![1.0, 4.0],
            vec![vec![2.0, 3.0], vec![5.0, 6.0]],
        )
        .unwrap();
        let names: Vec<(_, f64)> =
            lv.classical().unwrap().iter().map(|(n, c)| (*n, c.as_constant().unwrap())).collect();
        assert_eq!(
            names,
            vec![("beta", 1.0), ("gamma", 2.0), ("delta", 3.0), ("rho", 4.0), ("sigma", 5.0), ("theta", 6.0)]
        );
    }
}
