//! Integral-equation oracle for constant per-component diffusion: Gaussian
//! kernel quadrature of the Duhamel formula and its Picard iteration.

mod kernel;
mod picard;

pub use kernel::heat_kernel;
pub use picard::{duhamel_apply, picard_solve, KernelConfig, PicardSolution};
