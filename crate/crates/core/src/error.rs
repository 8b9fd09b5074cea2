use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid entry moments: {0}")]
    InvalidMoments(String),

    /// The named positivity inequality on τ₁..τ₄ does not hold.
    #[error("moment profile violates {0}")]
    ProfileViolation(&'static str),

    #[error("ensemble field is {ensemble} but the requested scalar type is {requested}")]
    FieldMismatch {
        ensemble: crate::FieldTag,
        requested: crate::FieldTag,
    },

    #[error("matrix has no dominant direction (power iteration collapsed to zero)")]
    NoDominantDirection,

    #[error("custom ensemble failed the Monte-Carlo moment check: {0}")]
    UncertifiedEnsemble(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
