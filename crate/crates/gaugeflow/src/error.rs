//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by grid construction, field operators, steppers and
/// scenario plumbing.
#[derive(Debug, Error)]
pub enum Error {
    /// Grid construction rejected the requested shape or extents.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields that must live on the same grid do not.
    #[error("grid mismatch in {context}: {left} vs {right}")]
    GridMismatch {
        context: &'static str,
        left: String,
        right: String,
    },

    /// A field contains NaN or infinite samples.
    #[error("non-finite samples in {what}")]
    NonFinite { what: String },

    /// A solve on the torus has no solution because the input carries
    /// mean (or other kernel-mode) content.
    #[error("{what} is not solvable on the torus: offending norm {norm:.3e} exceeds {tol:.3e}")]
    NotSolvableOnTorus {
        what: &'static str,
        norm: f64,
        tol: f64,
    },

    /// A stated precondition on field data was violated.
    #[error("constraint violated in {what}: measured {norm:.3e}, tolerance {tol:.3e}")]
    ConstraintViolation { what: String, norm: f64, tol: f64 },

    /// Time step outside the stable range of the requested scheme.
    #[error("time step {dt:.6e} outside stable range (0, {limit:.6e}] for this grid/backend")]
    StepSize { dt: f64, limit: f64 },

    /// Bad analytic setup (polarization not transverse, zero wavevector, ...).
    #[error("invalid setup: {0}")]
    InvalidSetup(String),

    /// Dimension mismatch in finite-dimensional phase-space data.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An operation was asked of a gauge field in the wrong mode
    /// (e.g. a curvature-only field where a potential is required).
    #[error("wrong field mode: {0}")]
    WrongMode(String),

    /// A phase-space point is tagged with the wrong chart for the operation.
    #[error("wrong chart in {context}: expected {expected}, found {found}")]
    WrongChart {
        context: &'static str,
        expected: &'static str,
        found: &'static str,
    },

    /// A mathematical precondition failed (ad-invariance, antisymmetry, ...).
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Trajectory produced non-finite values.
    #[error("integration blew up at step {step}")]
    BlowUp { step: usize },

    /// A diagnostic that was not enabled for this run was requested.
    #[error("feature not enabled: {0}")]
    FeatureDisabled(&'static str),

    /// Unknown scenario name.
    #[error("unknown scenario `{name}`; run `list` for available scenarios")]
    UnknownScenario { name: String },

    /// Invalid run configuration, naming the offending field.
    #[error("invalid config: {0}")]
    Config(String),

    /// Snapshot file does not parse.
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
