//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by constructors, contracts, and numerical guards.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {dim}: the truncated mode needs at least 2 levels")]
    InvalidDimension { dim: usize },

    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },

    #[error("operator is not Hermitian: max |M - M^dag| = {residual:.3e} exceeds {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("detuning delta = {delta} is unsupported here: the transformed chain holds on resonance (delta = 0)")]
    UnsupportedDetuning { delta: f64 },

    #[error("Fock level {level} is inside the guard band (dim {dim}, guard {guard}): truncation risk")]
    TruncationRisk {
        level: usize,
        dim: usize,
        guard: usize,
    },

    #[error("guard-band population {tail:.3e} exceeds {limit:.1e} at time {time}")]
    TruncationExceeded { time: f64, tail: f64, limit: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("requested outcome {outcome} has probability {probability:.3e} (below {min:.1e})")]
    ImpossibleOutcome {
        outcome: &'static str,
        probability: f64,
        min: f64,
    },

    #[error("degenerate parameters: alpha_1 = 0 (lambda = 0 and Delta = 0), no interaction time exists")]
    DegenerateParameters,

    #[error("eigendecomposition failed: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;
