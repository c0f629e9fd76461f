//! Numerical gradient-flow engine for the catalog manifolds.
//!
//! The submodules split the work into the model catalog ([`model`]), the
//! critical-point search ([`critical`]), the adaptive trajectory integrator
//! ([`flow`]), signed counting of connecting trajectories ([`count`]), and
//! assembly of the resulting chain complex ([`complex`]). The top level
//! re-exports the types making up the public surface and defines the shared
//! error type.

use thiserror::Error;

use crate::chain::ChainError;

pub mod complex;
pub mod count;
pub mod critical;
pub mod flow;
pub mod model;

pub use complex::MorseSystem;
pub use count::{FiberReport, SignedCount};
pub use critical::CriticalPoint;
pub use flow::{FlowConfig, FlowOutcome};
pub use model::{ModelParseError, MorseModel};

/// Failures of the numerical engine. Degenerate spectra, incomplete
/// searches, and resolution limits are reported as errors rather than
/// silently producing wrong counts.
#[derive(Debug, Error)]
pub enum MorseError {
    /// A configuration value is out of range or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A located critical point has a Hessian eigenvalue below the
    /// degeneracy tolerance, so its index is not well defined.
    #[error("degenerate critical point at {coords:?}: eigenvalue {eigenvalue:e} below tolerance")]
    DegenerateCritical { coords: Vec<f64>, eigenvalue: f64 },

    /// The seeded search found fewer critical points than the catalog
    /// guarantees for the model.
    #[error("critical point search found {found} of {expected} expected points")]
    IncompleteSearch { found: usize, expected: usize },

    /// The adaptive integrator could not meet the error tolerance even at
    /// the minimum step size.
    #[error("integrator step underflow at time {time}: step {step:e}")]
    StepUnderflow { time: f64, step: f64 },

    /// A counting stage could not separate nearby trajectories at the
    /// configured resolution.
    #[error("resolution exceeded: {0}")]
    ResolutionExceeded(String),

    /// The assembled signed counts fail the square-zero consistency check.
    #[error("signed counts violate square-zero consistency: {0}")]
    DifferentialSquareNonzero(String),

    /// An algebraic failure surfaced while assembling the complex.
    #[error(transparent)]
    Chain(#[from] ChainError),
}
