use crate::error::{Error, Result};

/// Radial cutoff equal to 1 on the ball of radius `r - w` and 0 outside radius
/// `r`, with a quintic smoothstep in between (C2 at both ends).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    radius: f64,
    width: f64,
}

pub fn build_cutoff(radius: f64, transition_width: f64) -> Result<Cutoff> {
    Cutoff::new(radius, transition_width)
}

impl Cutoff {
    pub fn new(radius: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && radius > width && radius.is_finite()) {
            return Err(Error::spec(format!(
                "cutoff needs r > transition_width > 0, got r={radius}, w={width}"
            )));
        }
        Ok(Self { radius, width })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Profile as a function of `|x|`.
    pub fn radial(&self, rho: f64) -> f64 {
        let s = ((self.radius - rho) / self.width).clamp(0.0, 1.0);
        s * s * s * (10.0 + s * (-15.0 + 6.0 * s))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())
    }
}
