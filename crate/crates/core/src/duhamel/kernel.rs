use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Grid;
use crate::par::{self, ExecPolicy};

/// Gaussian density `(2 pi d t)^{-n/2} exp(-|x|^2 / (2 d t))`, i.e. the
/// transition density with variance `d t` per axis. The heat equation
/// `du/dt = D lap u` has the kernel `heat_kernel(t, x, 2 D)`.
pub fn heat_kernel(t: f64, x: &[f64], d: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("kernel time must be positive, got {t}")));
    }
    if !(d > 0.0) {
        return Err(Error::Domain(format!("kernel diffusivity must be positive, got {d}")));
    }
    let n = x.len() as i32;
    let s = d * t;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((2.0 * PI * s).powf(-0.5 * n as f64) * (-r2 / (2.0 * s)).exp())
}

/// 1D lattice weights of a centred Gaussian with standard deviation `sigma`
/// on spacing `h`, truncated at `truncation` deviations and normalized to
/// unit lattice mass.
pub(crate) fn lattice_weights(sigma: f64, h: f64, truncation: f64) -> Vec<f64> {
    let reach = (truncation * sigma / h).ceil() as usize;
    let mut w: Vec<f64> = (0..=2 * reach)
        .map(|i| {
            let o = i as f64 - reach as f64;
            (-(o * h) * (o * h) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    w
}

/// Separable Gaussian smoothing with standard deviation `sigma` per axis;
/// values outside the grid are taken as zero.
pub(crate) fn gaussian_smooth(grid: &Grid, v: &[f64], sigma: f64, truncation: f64, exec: ExecPolicy) -> Vec<f64> {
    if sigma == 0.0 {
        return v.to_vec();
    }
    let mut current = v.to_vec();
    for axis in 0..grid.dim() {
        let w = lattice_weights(sigma, grid.h(axis), truncation);
        let reach = (w.len() / 2) as isize;
        let n = grid.nodes_per_axis()[axis] as isize;
        let stride = grid.stride(axis) as isize;
        let src = current;
        current = par::map_range(exec, grid.len(), |node| {
            let i = grid.index(node)[axis] as isize;
            let lo = (-reach).max(-i);
            let hi = reach.min(n - 1 - i);
            let mut acc = 0.0;
            for o in lo..=hi {
                acc += w[(o + reach) as usize] * src[(node as isize + o * stride) as usize];
            }
            acc
        });
    }
    current
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_have_unit_mass_and_symmetry() {
        let w = lattice_weights(0.3, 0.05, 6.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for i in 0..w.len() {
            assert_eq!(w[i], w[w.len() - 1 - i]);
        }
    }

    #[test]
    fn rejects_non_positive_time() {
        assert!(matches!(heat_kernel(0.0, &[0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(heat_kernel(1.0, &[0.0], 0.0), Err(Error::Domain(_))));
    }
}
