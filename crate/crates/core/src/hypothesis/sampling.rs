//! Deterministic low-discrepancy sampling of `[0,T] x F x {|u| <= C1} x {|p| <= C2}`.
//!
//! Points come from a Halton sequence with a seeded Cranley-Patterson
//! rotation. Enlarging any count in the budget only appends points, so a
//! larger budget always contains the smaller one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SpatialDomain;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleBudget {
    pub t_points: usize,
    pub x_points: usize,
    pub u_points: usize,
    pub p_points: usize,
    /// `C1`.
    pub u_radius: f64,
    /// `C2`.
    pub p_radius: f64,
    pub seed: u64,
}

impl Default for SampleBudget {
    fn default() -> Self {
        Self { t_points: 5, x_points: 5, u_points: 8, p_points: 3, u_radius: 2.0, p_radius: 2.0, seed: 1 }
    }
}

impl SampleBudget {
    pub fn validate(&self) -> Result<()> {
        if self.t_points < 2 || self.x_points < 2 || self.u_points < 2 || self.p_points < 2 {
            return Err(Error::spec("all sample counts must be at least 2"));
        }
        if !(self.u_radius > 0.0 && self.p_radius > 0.0) {
            return Err(Error::spec("sampling radii must be positive"));
        }
        Ok(())
    }

    /// Number of quasi-random samples for a problem of dimension `n`.
    pub fn count(&self, n: usize) -> usize {
        self.t_points * self.x_points.pow(n as u32) * self.u_points * self.p_points
    }
}

/// Which part of state space `u` is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateRegion {
    /// `u_i >= 0` for all `i`.
    Orthant,
    /// All of `|u| <= C1`; contains every orthant sample.
    Full,
    /// `u^k = 0`, other components in `[0, C1]`.
    Face(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Row-major `m x n` gradient.
    pub p: Vec<f64>,
}

pub(crate) fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}

fn project(v: &mut [f64], radius: f64) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > radius {
        let s = radius / norm;
        v.iter_mut().for_each(|x| *x *= s);
    }
}

/// Generates samples for a domain, horizon and state dimension.
#[derive(Debug, Clone)]
pub struct Sampler {
    budget: SampleBudget,
    domain: SpatialDomain,
    horizon: f64,
    m: usize,
    shift: Vec<f64>,
}

impl Sampler {
    pub fn new(budget: &SampleBudget, domain: &SpatialDomain, horizon: f64, m: usize) -> Result<Self> {
        budget.validate()?;
        let n = domain.dim();
        let dims = 1 + n + m + m * n;
        if dims > PRIMES.len() {
            return Err(Error::spec(format!("sampling dimension {dims} exceeds supported {}", PRIMES.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        let shift = (0..dims).map(|_| rng.gen::<f64>()).collect();
        Ok(Self { budget: budget.clone(), domain: domain.clone(), horizon, m, shift })
    }

    fn point(&self, i: usize) -> Vec<f64> {
        self.shift
            .iter()
            .enumerate()
            .map(|(d, s)| (radical_inverse(i as u64 + 1, PRIMES[d]) + s).fract())
            .collect()
    }

    fn lift(&self, z: &[f64], region: StateRegion, signed: bool) -> Sample {
        let n = self.domain.dim();
        let m = self.m;
        let c1 = self.budget.u_radius;
        let c2 = self.budget.p_radius;
        let t = self.horizon * z[0];
        let x = (0..n)
            .map(|a| {
                let (lo, hi) = self.domain.bounds()[a];
                lo + (hi - lo) * z[1 + a]
            })
            .collect();
        let mut u: Vec<f64> = (0..m)
            .map(|k| {
                let w = z[1 + n + k];
                if signed {
                    c1 * (2.0 * w - 1.0)
                } else {
                    c1 * w
                }
            })
            .collect();
        if let StateRegion::Face(k) = region {
            u[k] = 0.0;
        }
        project(&mut u, c1);
        let mut p: Vec<f64> = (0..m * n).map(|j| c2 * (2.0 * z[1 + n + m + j] - 1.0)).collect();
        project(&mut p, c2);
        Sample { t, x, u, p }
    }

    /// Deterministic corner cases: zero state, tiny and extreme axis states,
    /// the diagonal state, each with zero and extreme gradient, at `t = 0, T`
    /// and at the domain center.
    fn anchors(&self, region: StateRegion) -> Vec<Sample> {
        let m = self.m;
        let n = self.domain.dim();
        let c1 = self.budget.u_radius;
        let c2 = self.budget.p_radius;
        let mut states: Vec<Vec<f64>> = vec![vec![0.0; m]];
        for k in 0..m {
            for scale in [1e-6, 1.0] {
                let mut e = vec![0.0; m];
                e[k] = scale * c1;
                states.push(e);
            }
        }
        states.push(vec![c1 / (m as f64).sqrt(); m]);
        if region == StateRegion::Full {
            for k in 0..m {
                let mut e = vec![0.0; m];
                e[k] = -c1;
                states.push(e);
            }
        }
        if let StateRegion::Face(k) = region {
            for s in &mut states {
                s[k] = 0.0;
            }
            states.dedup();
        }
        let mut grads = vec![vec![0.0; m * n]];
        let mut g = vec![0.0; m * n];
        g[0] = c2;
        grads.push(g);
        let x = self.domain.center();
        let mut out = Vec::new();
        for t in [0.0, self.horizon] {
            for u in &states {
                for p in &grads {
                    out.push(Sample { t, x: x.clone(), u: u.clone(), p: p.clone() });
                }
            }
        }
        out
    }

    pub fn samples(&self, region: StateRegion) -> Vec<Sample> {
        let count = self.budget.count(self.domain.dim());
        let mut out = self.anchors(region);
        for i in 0..count {
            let z = self.point(i);
            match region {
                StateRegion::Orthant | StateRegion::Face(_) => out.push(self.lift(&z, region, false)),
                StateRegion::Full => {
                    out.push(self.lift(&z, region, false));
                    out.push(self.lift(&z, region, true));
                }
            }
        }
        out
    }

    /// Uniform lattice of `t_points` times in `[0, T]`.
    pub fn times(&self) -> Vec<f64> {
        let n = self.budget.t_points;
        (0..n).map(|i| self.horizon * i as f64 / (n - 1) as f64).collect()
    }

    /// Quasi-random points of the closed domain (first `x_points^n` Halton
    /// points of the spatial coordinates) plus the center.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let n = self.domain.dim();
        let count = self.budget.x_points.pow(n as u32);
        let mut out = vec![self.domain.center()];
        for i in 0..count {
            let z = self.point(i);
            out.push(
                (0..n)
                    .map(|a| {
                        let (lo, hi) = self.domain.bounds()[a];
                        lo + (hi - lo) * z[1 + a]
                    })
                    .collect(),
            );
        }
        out
    }
}
