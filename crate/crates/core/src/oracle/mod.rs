//! Brute-force master-equation models of a few atoms and a truncated
//! cavity mode, used to check both adiabatic eliminations.

pub mod hilbert;
pub mod integrate;
pub mod model;
pub mod validate;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::moments::MomentError;
use crate::params::ParamError;

pub use hilbert::{DensityMatrix, HilbertSpec, Level, Space};
pub use integrate::{integrate_master, integrator_registry, IntegrationStats, MasterIntegrator};
pub use model::{
    build_full_model, build_intermediate_model, extract_moments, Frame, Liouvillian, ModelOptions,
};
pub use validate::{pair_transfer_time, two_atom_benchmark, validate_elimination, ValidationOptions, ValidationReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Moments(#[from] MomentError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("resource budget exceeded: {0}")]
    Budget(String),
    #[error("model refused: {0}")]
    Refused(String),
    #[error("time step {dt} too coarse: dt * max(omega_ab, |H|) = {product:.4} > {limit}")]
    StepTooLarge { dt: f64, product: f64, limit: f64 },
    #[error("integration tolerance violated: {0}")]
    Tolerance(String),
    #[error("{0}")]
    Unsupported(String),
}
