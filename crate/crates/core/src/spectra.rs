//! Frequency-domain input-output solution: transfer functions M1..M4, phase
//! quadrature output spectrum, magnetic-signal response R_B, additional noise
//! N_ad, SQL comparison, and the ultra-strong-coupling reference scheme.
//!
//! The single source of truth for the transfer functions at all detunings is
//! the resolvent of the drift matrix. With the Fourier convention
//! O(omega) = (1/2pi) int dt O(t) e^{i omega t}, the quadrature vector obeys
//! V(omega) = (-i omega I - C)^{-1} V_in(omega), and the input-output relation
//! dP_out = sqrt(kappa_a) dP_a - p_in gives
//!
//! ```text
//! M1 = sqrt(ka km) R[Pa, Xm]    M2 = sqrt(ka km) R[Pa, Pm]
//! M3 = ka R[Pa, Xa]             M4 = ka R[Pa, Pa] - 1
//! ```
//!
//! with R = (-i omega I - C)^{-1}. The independently derived zero-detuning
//! reduction ships as a cross-check, not as a second authority.

use crate::error::{Error, Result};
use crate::model::{NoiseOccupancies, SystemParams};
use crate::modulation::EffectiveCouplings;
use crate::stability::{drift_matrix, routh_hurwitz, StabilityReport};
use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

/// Complex transfer coefficients from the four input quadratures to the
/// output phase quadrature at one probe frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferFunctions {
    /// Probe angular frequency (rad/s).
    pub omega: f64,
    /// From the (signal-carrying) magnon amplitude input x'_m.
    pub m1: Complex64,
    /// From the magnon phase input p'_m.
    pub m2: Complex64,
    /// From the cavity amplitude input x_a.
    pub m3: Complex64,
    /// From the cavity phase input p_a (includes the -1 reflection term).
    pub m4: Complex64,
}

/// Row (dP_a) of the normalized resolvent (-i w I - Cn)^{-1}.
fn resolvent_output_row(omega_n: f64, drift_n: &Matrix4<f64>) -> Result<Vector4<Complex64>> {
    // solve A^T y = e_Pa so that y_j = (A^{-1})[Pa, j]
    let mut at = drift_n.transpose().map(|x| Complex64::new(-x, 0.0));
    for i in 0..4 {
        at[(i, i)] -= Complex64::i() * omega_n;
    }
    let rhs = Vector4::new(Complex64::ZERO, Complex64::ONE, Complex64::ZERO, Complex64::ZERO);
    at.lu().solve(&rhs).ok_or_else(|| {
        Error::Unstable(format!(
            "singular resolvent at omega = {omega_n:e} kappa_m (instability boundary)"
        ))
    })
}

pub(crate) fn transfer_functions_unchecked(
    omega: f64,
    params: &SystemParams,
    couplings: &EffectiveCouplings,
) -> Result<TransferFunctions> {
    let km = params.kappa_m;
    let ka_n = params.kappa_a / km;
    let drift_n = drift_matrix(params, couplings) / km;
    let row = resolvent_output_row(omega / km, &drift_n)?;
    Ok(TransferFunctions {
        omega,
        m1: ka_n.sqrt() * row[2],
        m2: ka_n.sqrt() * row[3],
        m3: ka_n * row[0],
        m4: ka_n * row[1] - Complex64::ONE,
    })
}

/// Transfer functions at `omega` via the 4x4 resolvent solve.
///
/// Errors on unstable parameters: the stationary spectrum is undefined there.
pub fn transfer_functions(
    omega: f64,
    params: &SystemParams,
    couplings: &EffectiveCouplings,
) -> Result<TransferFunctions> {
    let report = routh_hurwitz(params, couplings)?;
    if !report.stable {
        return Err(Error::Unstable(format!(
            "max Re eig = {:.6e} rad/s >= 0",
            report.max_eigen_real
        )));
    }
    transfer_functions_unchecked(omega, params, couplings)
}

/// Independently derived zero-detuning reduction of (M1, M4):
///
/// ```text
/// M1 = -chi_a chi_m (g1 + g2) sqrt(ka km) / D
/// M4 = (chi_a ka - D) / D,   D = 1 + chi_a chi_m (g2^2 - g1^2)
/// ```
///
/// with chi(omega) = 1/(kappa/2 - i omega). Must agree with
/// [`transfer_functions`] to 1e-10 relative; M2 = M3 = 0 at zero detuning.
pub fn transfer_closed_form_zero_detuning(
    omega: f64,
    params: &SystemParams,
    couplings: &EffectiveCouplings,
) -> Result<(Complex64, Complex64)> {
    let km = params.kappa_m;
    if params.delta_a.abs() > 1e-12 * km || params.delta_m.abs() > 1e-12 * km {
        return Err(Error::Domain(format!(
            "zero-detuning reduction requires delta_a = delta_m = 0, \
             got delta_a = {:e}, delta_m = {:e} rad/s",
            params.delta_a, params.delta_m
        )));
    }
    let ka_n = params.kappa_a / km;
    let wn = omega / km;
    let g1 = couplings.g1 / km;
    let g2 = couplings.g2 / km;
    let chi_a = Complex64::ONE / Complex64::new(0.5 * ka_n, -wn);
    let chi_m = Complex64::ONE / Complex64::new(0.5, -wn);
    let d = Complex64::ONE + chi_a * chi_m * (g2 * g2 - g1 * g1);
    let m1 = -chi_a * chi_m * (g1 + g2) * ka_n.sqrt() / d;
    let m4 = (chi_a * ka_n - d) / d;
    Ok((m1, m4))
}

/// Symmetrized output spectral density of the phase quadrature:
///
/// ```text
/// Y_out = (n_a + 1/2)(|M3|^2 + |M4|^2) + (n_m + 1/2)(|M1|^2 + |M2|^2)
///         + |M1|^2 S_Bex
/// ```
///
/// At zero detuning M2 = M3 = 0 and this reduces to the two-term cavity +
/// probe form. The magnon-bath term (n_m + 1/2)|M1|^2 is probe-referred: it
/// divides out of the additional noise, which counts only the cavity term.
pub fn output_spectrum(
    tf: &TransferFunctions,
    occupancies: &NoiseOccupancies,
    s_bex: f64,
) -> Result<f64> {
    if !(s_bex >= 0.0) {
        return Err(Error::Domain(format!("signal density must be >= 0, got {s_bex:e}")));
    }
    let m1_sq = tf.m1.norm_sqr();
    Ok((occupancies.n_a + 0.5) * (tf.m3.norm_sqr() + tf.m4.norm_sqr())
        + (occupancies.n_m + 0.5) * (m1_sq + tf.m2.norm_sqr())
        + m1_sq * s_bex)
}

/// Response to the probed magnetic signal, R_B(omega) = |M1(omega)|^2.
pub fn response(
    omega: f64,
    params: &SystemParams,
    couplings: &EffectiveCouplings,
) -> Result<f64> {
    Ok(transfer_functions(omega, params, couplings)?.m1.norm_sqr())
}

/// Additional noise referred to the signal channel,
/// N_ad(omega) = (n_a + 1/2) |M4(omega)|^2 / |M1(omega)|^2.
///
/// Below 1/2 the sensor beats the standard quantum limit.
pub fn additional_noise(
    omega: f64,
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    n_a: f64,
) -> Result<f64> {
    if !(n_a >= 0.0) {
        return Err(Error::Domain(format!("occupancy must be >= 0, got {n_a:e}")));
    }
    let tf = transfer_functions(omega, params, couplings)?;
    let m1_sq = tf.m1.norm_sqr();
    if m1_sq == 0.0 {
        return Err(Error::NoResponse { omega });
    }
    Ok((n_a + 0.5) * tf.m4.norm_sqr() / m1_sq)
}

/// Reference scheme: static anti-rotating coupling reached by ultra-strong
/// coupling instead of modulation, parameterized by the electromagnetic
/// cooperativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UltraStrongParams {
    /// Electromagnetic cooperativity C (dimensionless, >= 1).
    pub cooperativity: f64,
    pub kappa_a: f64,
    pub kappa_m: f64,
    /// Cavity bath occupancy.
    pub n_a: f64,
}

impl UltraStrongParams {
    pub fn new(cooperativity: f64, kappa_a: f64, kappa_m: f64, n_a: f64) -> Result<Self> {
        if !(cooperativity >= 1.0) {
            return Err(Error::Domain(format!(
                "cooperativity must be >= 1, got {cooperativity:e}"
            )));
        }
        if !(kappa_a > 0.0) || !(kappa_m > 0.0) {
            return Err(Error::Domain("decay rates must be positive".into()));
        }
        if !(n_a >= 0.0) {
            return Err(Error::Domain(format!("occupancy must be >= 0, got {n_a:e}")));
        }
        Ok(Self { cooperativity, kappa_a, kappa_m, n_a })
    }
}

/// Zero-detuning response and additional noise of the reference scheme:
///
/// ```text
/// R_B2  = 4 ka^2 km^2 C |chi_m1 / (2 i omega + ka)|^2,  chi_m1 = 1/(km/2 + i omega)
/// N_ad2 = |1 + 2 ka / (2 i omega + ka)|^2 (n_a + 1/2) / R_B2
/// ```
///
/// At omega = 0: R_B2 = 16 C and N_ad2 = 9 (n_a + 1/2) / (16 C).
pub fn ultrastrong_reference(omega: f64, params: &UltraStrongParams) -> (f64, f64) {
    let km = params.kappa_m;
    let ka_n = params.kappa_a / km;
    let wn = omega / km;
    // chi_m1 and the denominator in units of kappa_m
    let chi = Complex64::ONE / Complex64::new(0.5, wn);
    let denom = Complex64::new(ka_n, 2.0 * wn);
    let r_b2 = 4.0 * ka_n * ka_n * params.cooperativity * (chi / denom).norm_sqr();
    let n_ad2 =
        (Complex64::ONE + 2.0 * ka_n / denom).norm_sqr() * (params.n_a + 0.5) / r_b2;
    (r_b2, n_ad2)
}

/// One evaluated grid point of a spectrum scan.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumPoint {
    /// Probe angular frequency (rad/s).
    pub omega: f64,
    pub y_out: f64,
    pub r_b: f64,
    pub n_ad: f64,
    pub below_sql: bool,
}

/// Scan result with the parameter snapshot and stability verdict it was
/// computed under.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    pub params: SystemParams,
    pub couplings: EffectiveCouplings,
    pub occupancies: NoiseOccupancies,
    pub s_bex: f64,
    pub stability: StabilityReport,
    pub points: Vec<SpectrumPoint>,
}

/// Evaluate Y_out, R_B, N_ad and the SQL flag on an omega grid (rad/s).
///
/// Stability is checked once before any evaluation; grid points evaluate in
/// parallel with deterministic ordering.
pub fn spectrum_scan(
    omegas: &[f64],
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    occupancies: &NoiseOccupancies,
    s_bex: f64,
) -> Result<SpectrumResult> {
    if omegas.is_empty() {
        return Err(Error::Domain("spectrum scan requires a non-empty grid".into()));
    }
    let stability = routh_hurwitz(params, couplings)?;
    if !stability.stable {
        return Err(Error::Unstable(format!(
            "max Re eig = {:.6e} rad/s >= 0",
            stability.max_eigen_real
        )));
    }
    let points = omegas
        .par_iter()
        .map(|&omega| {
            let tf = transfer_functions_unchecked(omega, params, couplings)?;
            let m1_sq = tf.m1.norm_sqr();
            if m1_sq == 0.0 {
                return Err(Error::NoResponse { omega });
            }
            let y_out = output_spectrum(&tf, occupancies, s_bex)?;
            let n_ad = (occupancies.n_a + 0.5) * tf.m4.norm_sqr() / m1_sq;
            Ok(SpectrumPoint {
                omega,
                y_out,
                r_b: m1_sq,
                n_ad,
                below_sql: n_ad < 0.5,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumResult {
        params: *params,
        couplings: *couplings,
        occupancies: *occupancies,
        s_bex,
        stability,
        points,
    })
}
