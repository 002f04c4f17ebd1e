use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("not a power series: numerator has exponent {0} < 0")]
    NotAPowerSeries(i64),
    #[error("pole order mismatch: expected pole of order {expected} at t = 1")]
    PoleOrderMismatch { expected: usize },
    #[error("inexact division")]
    InexactDivision,
    #[error("invalid denominator factor {0}: factors must be >= 1")]
    BadFactor(i64),
    #[error("nonpositive vertex weight {weight} at {vertex}")]
    NonpositiveVertexWeight { vertex: String, weight: i64 },
    #[error("not an additive cube: inconsistent {axis}-axis differences")]
    NotAdditiveCube { axis: char },
    #[error("formula inconsistency: numerator has negative exponent {0}")]
    FormulaInconsistency(i64),
    #[error("not Fano: canonical degree {0} <= 0")]
    NotFano(i64),
    #[error("dimension {0} is not 2")]
    Dimension(i64),
    #[error("section of degree {degree} has no matching vertex {vertex}")]
    NoMatchingVertex { degree: i64, vertex: String },
    #[error("vertex {0} is the target of more than one section")]
    DuplicateTarget(String),
    #[error("calibration incomplete: {0}")]
    CalibrationIncomplete(String),
    #[error("convention mismatch on {space}: {detail}")]
    ConventionMismatch { space: String, detail: String },
    #[error("inconsistent invariants: correction term is not periodic")]
    InconsistentInvariants,
    #[error("model instantiation error at n = {n}: {detail}")]
    ModelInstantiation { n: i64, detail: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
