//! Physical parameters, unit conventions, thermal occupancies, and calibration
//! helpers mapping laboratory quantities (fields, spin count, pump power) to
//! model rates.
//!
//! All frequencies and rates stored here are angular (rad/s). Temperatures are
//! kelvin. Pinned CODATA values of hbar and k_B make occupancy numbers
//! reproducible bit-for-bit.

use crate::error::{Error, Result};
use serde::Serialize;

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant (J/K).
pub const K_B: f64 = 1.380649e-23;

/// All physical rates and frequencies of cavity, magnon, and drives.
///
/// `delta_a = omega_a - omega_L` and `delta_m = omega_m - omega_d` are the
/// detunings from the respective drive frequencies and are the quantities that
/// enter the dynamics; `omega_a` and `omega_m` themselves enter only the
/// thermal occupancies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    /// Magnon (Kittel mode) angular frequency (rad/s).
    pub omega_m: f64,
    /// Cavity angular frequency (rad/s).
    pub omega_a: f64,
    /// Cavity detuning omega_a - omega_L (rad/s).
    pub delta_a: f64,
    /// Magnon detuning omega_m - omega_d (rad/s).
    pub delta_m: f64,
    /// Cavity energy decay rate (rad/s).
    pub kappa_a: f64,
    /// Magnon decay rate (rad/s).
    pub kappa_m: f64,
    /// Bare cavity-magnon coupling (rad/s).
    pub g: f64,
    /// Environment temperature (K).
    pub temperature: f64,
}

impl SystemParams {
    /// Check the hard invariants: positive decay rates, non-negative coupling
    /// and temperature, positive mode frequencies.
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_a > 0.0) || !(self.kappa_m > 0.0) {
            return Err(Error::Domain(format!(
                "decay rates must be positive: kappa_a = {:e}, kappa_m = {:e}",
                self.kappa_a, self.kappa_m
            )));
        }
        if !(self.g >= 0.0) {
            return Err(Error::Domain(format!("coupling must be >= 0: g = {:e}", self.g)));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Domain(format!(
                "temperature must be >= 0: T = {:e} K",
                self.temperature
            )));
        }
        if !(self.omega_m > 0.0) || !(self.omega_a > 0.0) {
            return Err(Error::Domain(format!(
                "mode frequencies must be positive: omega_m = {:e}, omega_a = {:e}",
                self.omega_m, self.omega_a
            )));
        }
        if !self.delta_a.is_finite() || !self.delta_m.is_finite() {
            return Err(Error::Domain("detunings must be finite".into()));
        }
        Ok(())
    }

    /// Thermal occupancies of the cavity and magnon baths at `temperature`.
    pub fn occupancies(&self) -> Result<NoiseOccupancies> {
        Ok(NoiseOccupancies {
            n_a: thermal_occupancy(self.omega_a, self.temperature)?,
            n_m: thermal_occupancy(self.omega_m, self.temperature)?,
        })
    }
}

/// Mean thermal photon/magnon numbers of the two baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseOccupancies {
    pub n_a: f64,
    pub n_m: f64,
}

impl NoiseOccupancies {
    pub fn new(n_a: f64, n_m: f64) -> Result<Self> {
        if !(n_a >= 0.0) || !(n_m >= 0.0) {
            return Err(Error::Domain(format!(
                "occupancies must be >= 0: n_a = {n_a:e}, n_m = {n_m:e}"
            )));
        }
        Ok(Self { n_a, n_m })
    }

    /// Zero-temperature baths.
    pub fn vacuum() -> Self {
        Self { n_a: 0.0, n_m: 0.0 }
    }
}

/// Bose-Einstein occupancy 1/(exp(hbar*omega/k_B T) - 1).
///
/// Returns exactly 0 at T = 0 and in the deep-quantum regime
/// hbar*omega/k_B T > 700, so millikelvin results never depend on exp
/// overflow behavior.
pub fn thermal_occupancy(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!(
            "thermal occupancy requires omega > 0, got {omega:e}"
        )));
    }
    if !(temperature >= 0.0) {
        return Err(Error::Domain(format!(
            "thermal occupancy requires T >= 0, got {temperature:e}"
        )));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    let x = HBAR * omega / (K_B * temperature);
    if x > 700.0 {
        return Ok(0.0);
    }
    // exp_m1 keeps the high-temperature limit (x << 1) accurate.
    Ok(1.0 / x.exp_m1())
}

/// Coupling of the probed field to the YIG sphere, with optional calibration
/// inputs retained for bookkeeping.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeCoupling {
    /// Gyromagnetic ratio (rad/s per tesla).
    pub gamma: f64,
    /// Total spin count N.
    pub n_spins: f64,
    /// Probe coupling epsilon = (gamma/2) sqrt(5 N) (rad/s per tesla).
    pub epsilon: f64,
    pub b0: Option<f64>,
    pub b_d: Option<f64>,
    pub p_l: Option<f64>,
    pub omega_l: Option<f64>,
}

impl ProbeCoupling {
    pub fn from_spin_count(gamma: f64, n_spins: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !(n_spins >= 0.0) {
            return Err(Error::Domain(format!(
                "probe coupling requires gamma, N >= 0: gamma = {gamma:e}, N = {n_spins:e}"
            )));
        }
        Ok(Self {
            gamma,
            n_spins,
            epsilon: 0.5 * gamma * (5.0 * n_spins).sqrt(),
            b0: None,
            b_d: None,
            p_l: None,
            omega_l: None,
        })
    }
}

/// Rates derived from laboratory drive quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedDrives {
    /// Cavity-magnon coupling g = (gamma B0 / 2) sqrt(5 N) (rad/s).
    pub g: f64,
    /// Magnon drive amplitude E_d = (gamma B_d / 4) sqrt(5 N) (rad/s).
    pub e_d: f64,
    /// Cavity drive amplitude E_L = sqrt(2 P_L kappa_a / (hbar omega_L)) (rad/s).
    pub e_l: f64,
    /// Probe coupling epsilon = (gamma / 2) sqrt(5 N) (rad/s per tesla).
    pub epsilon: f64,
}

/// Map field amplitudes, pump power, and spin count to model rates.
///
/// The drive amplitudes E_L and E_d only shift the steady-state means, which
/// decouple from the fluctuation spectra of this linear model; they are kept
/// for calibration bookkeeping.
pub fn calibrate_couplings(
    gamma: f64,
    n_spins: f64,
    b0: f64,
    b_d: f64,
    p_l: f64,
    omega_l: f64,
    kappa_a: f64,
) -> Result<CalibratedDrives> {
    for (name, v) in [
        ("gamma", gamma),
        ("n_spins", n_spins),
        ("b0", b0),
        ("b_d", b_d),
        ("p_l", p_l),
        ("omega_l", omega_l),
        ("kappa_a", kappa_a),
    ] {
        if !(v >= 0.0) {
            return Err(Error::Domain(format!("calibration input {name} must be >= 0, got {v:e}")));
        }
    }
    if p_l > 0.0 && omega_l == 0.0 {
        return Err(Error::Domain("omega_L must be positive when P_L > 0".into()));
    }
    let root = (5.0 * n_spins).sqrt();
    let e_l = if p_l == 0.0 {
        0.0
    } else {
        (2.0 * p_l * kappa_a / (HBAR * omega_l)).sqrt()
    };
    Ok(CalibratedDrives {
        g: 0.5 * gamma * b0 * root,
        e_d: 0.25 * gamma * b_d * root,
        e_l,
        epsilon: 0.5 * gamma * root,
    })
}

/// Advisory (non-fatal) regime checks; empty iff all pass.
///
/// The operating regime is strong coupling, kappa_a, kappa_m < g << omega_m.
pub fn validate_params(params: &SystemParams) -> Vec<String> {
    let mut warnings = Vec::new();
    if params.g <= params.kappa_a || params.g <= params.kappa_m {
        warnings.push(format!(
            "not in strong coupling regime: g = {:.4e} rad/s vs kappa_a = {:.4e}, kappa_m = {:.4e}",
            params.g, params.kappa_a, params.kappa_m
        ));
    }
    if params.g > 0.1 * params.omega_m {
        warnings.push(format!(
            "g not << omega_m: g = {:.4e} rad/s, omega_m = {:.4e} rad/s",
            params.g, params.omega_m
        ));
    }
    warnings
}
