//! Domains, grids, fields and problem definitions shared by the solvers and
//! checkers.

mod coefficients;
mod cutoff;
mod domain;
mod family;
mod field;
mod lv;
mod majorants;
mod problem;

pub use coefficients::{
    eigen_range, scalar_matrix, CoefficientSet, Coefficients, Evaluation, FnCoefficients, Mat2,
    ShiftedSource, WeightedSource, ASYMMETRY_TOL,
};
pub use cutoff::{build_cutoff, Cutoff};
pub use domain::{BoundaryKind, Grid, SpatialDomain};
pub use family::{ScalarCoef, ScalarFamily, SpaceFactor, Table};
pub use field::Field;
pub use lv::{LVCoefficients, LvModel, SignViolation};
pub use majorants::Majorants;
pub use problem::{build_lv_problem, evaluate_coefficients, ProblemSpec};
