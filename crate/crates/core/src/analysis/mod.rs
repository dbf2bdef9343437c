//! Bounds, monotonicity, extinction and steady-state diagnostics for
//! Lotka-Volterra trajectories.

mod bounds;
mod monotone;
mod residual;
mod steady;

pub use bounds::{component_bound_mk, gronwall_extinction_bound, integrate_sup, max_principle_bound};
pub use monotone::{detect_monotone, extinction_check, ExpectedSign, ExtinctionReport, MonotoneReport, MonotoneWitness};
pub use residual::{elliptic_weak_residual, write_residuals_csv, LimitCoefficients, ResidualPair, TestFunction};
pub use steady::{extract_steady_state, SteadyStateReport, SteadyStatus};
