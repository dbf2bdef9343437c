//! Solver-and-verification toolkit for quasilinear parabolic systems with a
//! focus on diffusive Lotka-Volterra competition models.

pub mod analysis;
pub mod duhamel;
pub mod error;
pub mod fdm;
pub mod hypothesis;
pub mod model;
pub mod par;
pub mod scenario;
pub mod stencil;

pub use error::{Error, Result};
