//! Error type shared by all modules of the crate.
//!
//! Variants split into two families: *validation* errors (the input violates a
//! documented precondition) and *numeric degeneracy* errors (the input sits so
//! close to a decision boundary that no classification is trustworthy). The
//! CLI maps the former to exit code 2 and the latter to exit code 3.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix determinant {det} is not positive")]
    NonPositiveDeterminant { det: f64 },
    #[error("branch representative within {margin:.3e} of the selection window boundary (corrupt lift?)")]
    BranchAmbiguity { margin: f64 },
    #[error("matrix has complex eigenvalues; no triangularizing conjugator exists")]
    NotTriangularizable,
    #[error("eigen classification falls within the tolerance band of a class boundary ({detail})")]
    Degenerate { detail: String },
    #[error("product is not associative: residual {residual:.3e} exceeds the membership tolerance")]
    NotInCone { residual: f64 },
    #[error("singular value {value:.3e} lies in the ambiguous band ({lo:.1e}, {hi:.1e}) of the rank test")]
    DegenerateRank { value: f64, lo: f64, hi: f64 },
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("invalid model-group parameters: {0}")]
    InvalidParams(String),
    #[error("the two affine maps do not commute (residual {residual:.3e})")]
    NonCommuting { residual: f64 },
    #[error("gluing datum is invalid: {0}")]
    InvalidGluing(String),
    #[error("quadrilateral cannot be embedded: {detail}")]
    NotEmbeddable { detail: String },
    #[error("matrix is not an expansion (real eigenvalues > 1 required)")]
    NotExpansion,
    #[error("matrix must have positive real eigenvalues")]
    NonPositiveEigenvalues,
    #[error("level parameter k must be nonzero")]
    ZeroLevel,
    #[error("operation requires a {expected} descriptor")]
    WrongTag { expected: &'static str },
    #[error("degenerate lattice: (log λ1)·k2 − (log λ2)·k1 vanishes")]
    DegenerateLattice,
    #[error("invalid structure descriptor: {0}")]
    InvalidDescriptor(String),
    #[error("tiling is empty")]
    EmptyTiling,
}

impl Error {
    /// True for errors caused by numerically ambiguous inputs rather than
    /// outright invalid ones.
    pub fn is_degeneracy(&self) -> bool {
        matches!(
            self,
            Error::BranchAmbiguity { .. } | Error::Degenerate { .. } | Error::DegenerateRank { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
