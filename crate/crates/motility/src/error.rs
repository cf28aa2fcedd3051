//! Error type shared across the crate.
//!
//! Numerical routines report *why* they failed (domain exit, stalled
//! refinement, singular solve) so callers — in particular the sweep
//! harness, which records per-gait failures instead of aborting — can
//! react per case.

use crate::connection::ShapePoint;
use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A shape trajectory or quadrature node left the region where the
    /// system model is defined.
    #[error("shape point ({}, {}) is outside the system's validity region", point.r1, point.r2)]
    OutOfDomain { point: ShapePoint },

    /// Adaptive refinement hit its subdivision cap before reaching the
    /// requested tolerance.
    #[error("refinement stalled at {achieved:.3e} (requested {required:.3e})")]
    NonConvergence { achieved: f64, required: f64 },

    /// The drag / constraint solve at a shape point was numerically
    /// singular (condition estimate attached).
    #[error("body-velocity solve is singular (condition estimate {condition:.3e})")]
    SingularSolve { condition: f64 },

    /// A text input (tabulated-field file, gait string, config file)
    /// could not be parsed; `line` is 1-based, 0 for whole-input errors.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A parameter was outside its meaningful range (negative radius,
    /// non-positive tolerance, zero-area gait, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A quantity required by a downstream formula is identically zero
    /// (e.g. an angle bound for an estimate with no translation part).
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}
