//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An input violates a documented precondition (negative rate, value out
    /// of the supported range, malformed grid, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Modulation frequencies do not satisfy omega1 = omega_d - omega_L and
    /// omega2 = omega_L + omega_d.
    #[error(
        "modulation frequencies not matched: \
         |omega1 - (omega_d - omega_L)| = {residual1:.3e} rad/s, \
         |omega2 - (omega_L + omega_d)| = {residual2:.3e} rad/s"
    )]
    UnmatchedFrequencies { residual1: f64, residual2: f64 },

    /// The drift matrix has an eigenvalue with non-negative real part; the
    /// steady-state spectrum is undefined.
    #[error("unstable dynamics: {0}")]
    Unstable(String),

    /// |M1(omega)| = 0: no transduction of the probed field, additional noise
    /// is undefined at this frequency.
    #[error("no response: |M1| = 0 at omega = {omega:.6e} rad/s")]
    NoResponse { omega: f64 },

    /// Two independent computational routes disagree beyond tolerance.
    #[error("internal consistency failure: {0}")]
    Inconsistency(String),

    /// The integration step is too coarse for the fastest rate in the drift.
    #[error("stiffness guard: {0}")]
    Stiffness(String),

    /// Configuration could not be parsed or violates the schema.
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code contract: 1 for configuration problems, 2 for
    /// physics preconditions (instability, stiffness, undefined noise).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) => 1,
            Error::UnmatchedFrequencies { .. } => 1,
            Error::Unstable(_)
            | Error::NoResponse { .. }
            | Error::Inconsistency(_)
            | Error::Stiffness(_) => 2,
        }
    }
}
