//! Multi-start simplex search for the smallest squeezing parameter over the
//! drive ratio and detunings, cooperativity sweeps and the δ = 0 check.

pub mod delta;
pub mod problem;
pub mod sweep;

use thiserror::Error;

use crate::moments::MomentError;
use crate::params::ParamError;

pub use delta::{delta_zero_check, DeltaZeroReport, SideConditions};
pub use problem::{
    evaluate_point, optimize, Bounds, Evaluation, OptimizationProblem, OptimizerSettings, OptimumReport,
    Point, RestartRecord,
};
pub use sweep::{scaling_sweep, sweep_template, Fit, SweepPoint, SweepReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimizeError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error("invalid bounds: {0}")]
    Bounds(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("cooperativity {0} below 0.1")]
    Cooperativity(f64),
}
