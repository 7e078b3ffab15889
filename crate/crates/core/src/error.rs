// SPDX-License-Identifier: MIT OR Apache-2.0

use thiserror::Error;

/// Broad classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// The input data cannot support the requested computation.
    Data,
    /// The caller supplied an invalid configuration or argument.
    Config,
}

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error(
        "invalid domain [{a}, {b}]: lower bound must be finite and strictly below the upper bound"
    )]
    InvalidDomain { a: f64, b: f64 },

    #[error("knot {value} is not strictly inside the domain ({a}, {b})")]
    KnotOutsideDomain { value: f64, a: f64, b: f64 },

    #[error("knots must be finite and strictly increasing (violated at position {index})")]
    KnotsNotIncreasing { index: usize },

    #[error("evaluation point {x} lies outside the domain [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },

    #[error("natural cubic basis needs at least 2 knots, got {knots}")]
    NaturalNeedsTwoKnots { knots: usize },

    #[error("natural cubic splines have degree 3, got {degree}")]
    NaturalDegree { degree: usize },

    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    #[error("residual degrees of freedom are zero; noise variance is undefined")]
    UndefinedVariance,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no feasible placement of {k} knots on the candidate grid with spacing > {delta}")]
    Infeasible { k: usize, delta: f64 },

    #[error("cross-validation fold {fold} has {points} training points, fewer than the basis dimension {needed}")]
    FoldTooSmall {
        fold: usize,
        points: usize,
        needed: usize,
    },

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::InvalidDomain { .. }
            | Error::NaturalDegree { .. }
            | Error::InvalidArgument(_) => ErrorKind::Config,
            _ => ErrorKind::Data,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
