use thiserror::Error;

use crate::crystal::CrystalConfiguration;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the dispersive model requires a nonzero atomic detuning Delta_0")]
    ZeroAtomicDetuning,

    #[error("expected {expected} ion positions, got {got}")]
    PositionCount { expected: usize, got: usize },

    #[error("ions {first} and {second} coincide (separation {distance:.3e} m)")]
    CoincidentIons {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("minimizer did not converge after {iterations} iterations (max force {gradient_norm:.3e} N)")]
    NotConverged {
        iterations: usize,
        gradient_norm: f64,
        best: Box<CrystalConfiguration>,
    },

    #[error("root bracketing failed: {0}")]
    Bracket(String),

    #[error(
        "configuration is not a minimum: mode {mode} has Hessian eigenvalue {eigenvalue:.6e} N/m"
    )]
    UnstableConfiguration { mode: usize, eigenvalue: f64 },

    #[error("mode {mode} has non-positive frequency {frequency:.6e} rad/s")]
    NonPositiveFrequency { mode: usize, frequency: f64 },

    #[error("linearized dynamics are unstable (max Re(lambda) = {max_real:.6e} s^-1)")]
    UnstableDynamics { max_real: f64 },

    #[error("stability verdicts disagree: max Re(lambda) = {max_real:.6e} s^-1, inequality {lhs:.6e} >= {rhs:.6e}")]
    StabilityInconsistency { max_real: f64, lhs: f64, rhs: f64 },

    #[error("Lyapunov solve failed (relative residual {residual:.3e})")]
    LyapunovFailed { residual: f64 },

    #[error("eigenvector matrix is near-defective (condition number {condition:.3e})")]
    NearDefective { condition: f64 },

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("unphysical covariance matrix: smallest symplectic eigenvalue {0:.12}")]
    UnphysicalCovariance(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
