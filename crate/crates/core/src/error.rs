use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto exit codes via
/// [`Error::exit_code`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix has odd dimension {0}")]
    OddDimension(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not symplectic (residual {0:.3e})")]
    NotSymplectic(f64),
    #[error("E is not right-regular: E12 and E22 must both be invertible")]
    NotRightRegular,
    #[error("Schur complement E11 - E12 E22^-1 E21 is singular")]
    SingularSchur,
    #[error("tau = {0} is degenerate (tau must differ from 0 and 1)")]
    TauDegenerate(f64),
    #[error("numeric routines require d = 1, got d = {0}")]
    UnsupportedDimension(usize),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("signals live on different grids")]
    GridMismatch,
    #[error("rescaling factor must be nonzero")]
    ZeroScale,
    #[error("window is identically zero")]
    ZeroWindow,
    #[error("sampled window cannot be evaluated off-grid with interpolation disabled")]
    InterpolationUnavailable,
    #[error("shift {0:?} does not land on time-frequency grid nodes")]
    OffGridShift((f64, f64)),
    #[error("|<gamma, g>| = {0:.3e} is too small for reconstruction")]
    DegeneratePair(f64),
    #[error("factorization has C != 0; operation requires a totally decomposable distribution")]
    NotTotallyDecomposable,
    #[error("system is not a frame (lower bound {0:.3e})")]
    NotAFrame(f64),
    #[error("coefficient length {got} does not match atom count {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("eigen-decomposition failed: {0}")]
    EigenFailure(String),
    #[error("linear solve failed: {0}")]
    SolveFailure(String),
    #[error("weight condition fails for this factorization")]
    WeightConditionFailed,
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid norm exponent {0}")]
    InvalidExponent(f64),
    #[error("unknown verification suite {0:?}")]
    UnknownSuite(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for this error: 2 for configuration problems,
    /// 3 for numerical failures, 4 when a frame was required but absent.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotAFrame(_) => 4,
            Error::SingularMatrix
            | Error::SingularSchur
            | Error::EigenFailure(_)
            | Error::SolveFailure(_)
            | Error::DegeneratePair(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
