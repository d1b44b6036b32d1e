//! Exact growth series computations for finitely generated virtually
//! abelian groups: standard growth, twisted conjugacy growth, and the
//! relative growth of a fixed twisted conjugacy class.
//!
//! The engine works with exact arbitrary-precision integers throughout.
//! Sets of integer vectors are represented as polyhedral sets (unions of
//! conjunctions of linear equalities, congruences and strict inequalities),
//! and their weighted growth series are extracted as exact rational
//! functions.

pub mod cosetreps;
pub mod genfunc;
pub mod intset;
pub mod oracle;
pub mod patterns;
pub mod ratfun;
pub mod relative;
pub mod twisted;
pub mod vagroup;

use thiserror::Error;

/// Top-level error type shared across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("division by zero polynomial")]
    ZeroDenominator,
    #[error("series not expandable at z = 0 (denominator constant term is zero)")]
    NotExpandable,
    #[error("improper weight: {0}")]
    ImproperWeight(String),
    #[error("invalid group description: {0}")]
    InvalidDescription(String),
    #[error("unknown letter `{0}` in word")]
    UnknownLetter(String),
    #[error("unknown endomorphism `{0}`")]
    UnknownEndo(String),
    #[error("pattern set too large: {got} patterns exceeds cap {cap}")]
    SizingCap { got: usize, cap: usize },
    #[error("internal invariant violated: {0}")]
    InvariantBreach(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
