//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by graph construction, linear algebra, and model code.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not symmetric at ({row},{col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("eigenvalue {value} below floor {floor} for exponent {exponent}")]
    EigenvalueBelowFloor {
        value: f64,
        floor: f64,
        exponent: f64,
    },

    #[error("matrix is singular or not positive definite (pivot {value} at index {index})")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("columns are not orthonormal (max deviation {deviation})")]
    NotOrthonormal { deviation: f64 },

    #[error("Jacobi eigensolver did not converge in {sweeps} sweeps")]
    EigensolverStalled { sweeps: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("vertex {vertex} has zero degree in the {layer} layer")]
    DegenerateDegree { vertex: usize, layer: &'static str },

    #[error("unsupported power mean exponent: {0}")]
    UnsupportedPower(String),

    #[error("diagonal shift must be positive for p <= 0 (got {shift})")]
    ShiftRequired { shift: f64 },

    #[error("scalar power mean undefined: a={a}, b={b} with p={p}")]
    ScalarMeanDomain { a: f64, b: f64, p: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("expected degree is zero in the {layer} layer")]
    ZeroExpectedDegree { layer: &'static str },

    #[error("spectral gap is not positive (gap {gap})")]
    NonPositiveGap { gap: f64 },

    #[error("Bethe Hessian has only {found} negative eigenvalues, need {needed}")]
    NoClusterSignal { found: usize, needed: usize },

    #[error("average degree is zero; Bethe Hessian undefined")]
    ZeroAverageDegree,
}

pub type Result<T> = std::result::Result<T, Error>;
