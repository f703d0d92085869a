//! Error type shared by every fallible operation in the crate.

/// Failure modes of operator construction, decomposition, and bound evaluation.
///
/// Variants split into two families: rejected input (bad matrices, empty
/// subspaces, out-of-range parameters) and numerical breakdown (a solver did
/// not converge, or two routes to the same quantity disagree beyond the
/// documented budget). The command-line frontend maps the first family to
/// exit code 2 and the second to exit code 3.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QslError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { asymmetry: f64, tol: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("eigensolver failed on a {dim}x{dim} Hermitian matrix")]
    EigensolverFailure { dim: usize },

    #[error("singular value decomposition failed on a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    #[error(
        "rank-deficient input: column {column} leaves residual {residual:.3e} \
         below threshold {threshold:.3e} after orthogonalization"
    )]
    RankDeficient {
        column: usize,
        residual: f64,
        threshold: f64,
    },

    #[error("columns are not orthonormal: defect {defect:.3e} exceeds {tol:.3e}")]
    NotOrthonormal { defect: f64, tol: f64 },

    #[error("matrix is not idempotent: defect {defect:.3e} exceeds {tol:.3e}")]
    NotIdempotent { defect: f64, tol: f64 },

    #[error("trace {trace:.6} is not an integer within {tol:.3e}")]
    NonIntegerTrace { trace: f64, tol: f64 },

    #[error("vector norm {norm:.17} is not 1 within {tol:.3e}")]
    NotUnit { norm: f64, tol: f64 },

    #[error("subspace is zero (projector trace {trace:.3e})")]
    ZeroSubspace { trace: f64 },

    #[error("numerical inconsistency in {context}: {magnitude:.3e} exceeds budget {limit:.3e}")]
    NumericalInconsistency {
        context: &'static str,
        magnitude: f64,
        limit: f64,
    },

    #[error("theta {theta} lies outside (0, pi/2]")]
    InvalidTheta { theta: f64 },

    #[error("horizon {horizon} must be positive")]
    NonpositiveHorizon { horizon: f64 },

    #[error("crossing tolerance {tol} must be positive")]
    NonpositiveTolerance { tol: f64 },

    #[error("sample grid needs at least 2 points, got {points}")]
    GridTooSmall { points: usize },

    #[error("energy dispersion vanishes: the state is stationary")]
    ZeroDispersion,

    #[error("mean excess energy vanishes: the state sits at the bottom of the spectrum")]
    ZeroMeanExcess,

    #[error("off-diagonal speed vanishes: the subspace is invariant")]
    ZeroSpeed,

    #[error("spectral width vanishes: the operator is a multiple of the identity")]
    ZeroWidth,
}

impl QslError {
    /// True when the error reports a solver or consistency breakdown rather
    /// than rejected input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QslError::EigensolverFailure { .. }
                | QslError::SvdFailure { .. }
                | QslError::NumericalInconsistency { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, QslError>;
