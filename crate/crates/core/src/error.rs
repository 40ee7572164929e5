use thiserror::Error;

/// Everything that can go wrong inside the library.
///
/// The variants are grouped so that a front end can map them onto a small
/// set of failure classes (see [`Error::class`]).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("leading coefficient is not lower triangular (max upper entry {0:e})")]
    NotLowerTriangular(f64),

    #[error("C0 not PD")]
    C0NotPd,

    #[error("T_n not positive definite (lambda_min = {lambda_min:e})")]
    DataNotPd { lambda_min: f64 },

    #[error("singular normalization factor")]
    SingularFactor,

    #[error("P not in P+ (min eigenvalue on grid {min_eig:e})")]
    PNotPositive { min_eig: f64 },

    #[error("factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("near-boundary A (condition number {cond:e})")]
    NearBoundary { cond: f64 },

    #[error("A not Schur: {0}")]
    NotSchur(String),

    #[error("newton diverged (residual {residual:e} after {iters} iterations)")]
    NewtonDiverged { residual: f64, iters: usize },

    #[error("left Schur class (residual {residual:e})")]
    LeftSchurClass { residual: f64 },

    #[error("singular Jacobian")]
    SingularJacobian,

    #[error("path stalled at t = {t} (dt = {dt:e})")]
    PathStalled { t: f64, dt: f64 },

    #[error("verification failed (max deviation {deviation:e})")]
    VerificationFailed { deviation: f64 },

    #[error("grid too small: {0}")]
    GridTooSmall(String),

    #[error("A near-singular on grid at theta = {theta}")]
    SingularOnGrid { theta: f64 },

    #[error("imaginary residue {0:e} exceeds bound")]
    ImaginaryResidue(f64),

    #[error("t = {0} out of range [0, 1]")]
    TOutOfRange(f64),

    #[error("resampling budget exhausted after {0} draws")]
    ResampleExhausted(usize),
}

/// Coarse failure class, one per process exit code of the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or inconsistent input.
    Input,
    /// Data infeasible: T_n not positive definite, or P not positive on the circle.
    Infeasible,
    /// Numerical failure of Newton, the path tracker or factorization.
    Numerical,
    /// A computed answer failed independent verification.
    Verification,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            DimensionMismatch(_)
            | InvalidInput(_)
            | NotLowerTriangular(_)
            | GridTooSmall(_)
            | TOutOfRange(_)
            | NotSchur(_)
            | SingularFactor => ErrorClass::Input,
            C0NotPd | DataNotPd { .. } | PNotPositive { .. } => ErrorClass::Infeasible,
            FactorizationFailed(_)
            | NearBoundary { .. }
            | NewtonDiverged { .. }
            | LeftSchurClass { .. }
            | SingularJacobian
            | PathStalled { .. }
            | SingularOnGrid { .. }
            | ResampleExhausted(_) => ErrorClass::Numerical,
            VerificationFailed { .. } | ImaginaryResidue(_) => ErrorClass::Verification,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
