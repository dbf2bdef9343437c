//! Method-of-lines finite differences for the parabolic system on boxes with
//! zero Dirichlet data.

mod io;
mod linsolve;
mod nested;
mod operator;
mod order;
mod scheme;
mod solve;
mod step;

pub use io::{
    decode_snapshot, encode_snapshot, read_snapshot, write_diagnostics_csv, write_snapshots,
    write_trajectory_csv, RawSnapshot, SNAPSHOT_MAGIC,
};
pub use linsolve::{solve_shifted, thomas, LinearSolve};
pub use nested::{solve_cauchy_nested, NestedConvergenceReport};
pub use operator::{assemble, DiffusionOp};
pub use order::{estimate_order, OrderEstimate};
pub use scheme::{PositivityMode, SchemeConfig, SteadyStop, TimeStepper};
pub use solve::{sample_jacobian_bound, solve, StepDiagnostics, Trajectory};
pub use step::{step, StepReport};
