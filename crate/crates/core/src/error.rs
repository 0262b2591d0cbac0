//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by enumeration, composition, rank, and search routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter combination is invalid (degree mismatch, bad prime, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A 1-based argument position is outside its valid range.
    #[error("position {position} out of range 1..={max}")]
    Position { position: u32, max: u32 },

    /// Two monomials with different (arity, degree, multiplicity) were
    /// compared; the lex order is only defined within one such class.
    #[error(
        "monomials not comparable: (arity, degree, multiplicity) = \
         ({0}, {1}, {2}) vs ({3}, {4}, {5})"
    )]
    ComparisonDomain(u32, u32, u32, u32, u32, u32),

    /// The zero polynomial is not a valid operator identity.
    #[error("zero polynomial is not a valid operator identity")]
    ZeroPolynomial,

    /// A monomial tree violates the flattened-form invariants.
    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),

    /// Input text could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
