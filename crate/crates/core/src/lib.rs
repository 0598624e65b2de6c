//! Spin squeezing of atomic ensembles by cavity-mediated Raman pair
//! transitions: moment equations, exact twisting dynamics, brute-force
//! master-equation checks and parameter optimization.

pub mod config;
pub mod dicke;
pub mod linalg;
pub mod moments;
pub mod optimize;
pub mod oracle;
pub mod params;
pub mod registry;

pub use moments::{MomentState, SqueezingTrace};
pub use params::PhysicalParams;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
