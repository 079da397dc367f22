//! Simulator for a dual-frequency-modulated cavity-magnon weak-magnetic-field
//! sensor.
//!
//! A microwave cavity mode couples to the Kittel mode of a YIG sphere; a
//! two-tone modulation of the bias field synthesizes independently tunable
//! rotating (beam-splitter) and anti-rotating (two-mode-squeezing) couplings
//! from the bare dipole coupling. The crate computes:
//!
//! - effective couplings from the modulation indices ([`modulation`]),
//! - dynamical stability of the linearized quadrature dynamics ([`stability`]),
//! - frequency-domain transfer functions, output noise spectra, magnetic-signal
//!   response and additional noise relative to the standard quantum limit
//!   ([`spectra`]),
//! - stochastic time-domain cross-checks: Euler-Maruyama integration of the
//!   quadrature Langevin equations, Welch spectral estimation, and the
//!   steady-state Lyapunov covariance ([`timedomain`]).
//!
//! Every closed form is validated against an independent numerical route
//! (matrix resolvent, eigenvalue decomposition, Lyapunov solve, Monte Carlo).
//!
//! All frequencies and rates are angular (rad/s) throughout the library; the
//! CLI layer ([`config`], [`cli`]) accepts ordinary `/2pi` Hz quantities and
//! converts once at the boundary.

// validation uses negated comparisons (`!(x > 0.0)`) so NaN inputs fail too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen oracle constants are written with all 17 significant digits
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod config;
pub mod error;
pub mod model;
pub mod modulation;
pub mod spectra;
pub mod stability;
pub mod timedomain;

pub use error::{Error, Result};
pub use model::{NoiseOccupancies, ProbeCoupling, SystemParams};
pub use modulation::{EffectiveCouplings, ModulationSettings};
pub use spectra::{SpectrumResult, TransferFunctions, UltraStrongParams};
pub use stability::StabilityReport;
pub use timedomain::{PsdEstimate, SdeConfig, SignalSpec};
