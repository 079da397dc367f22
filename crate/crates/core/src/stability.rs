//! Quadrature drift matrix and Routh-Hurwitz stability, cross-checked against
//! an eigenvalue oracle.
//!
//! The linearized quadrature dynamics are dV/dt = C V + V_in over the basis
//! (dX_a, dP_a, dX_m, dP_m). The characteristic polynomial of C is
//! s^4 + H3 s^3 + H2 s^2 + H1 s + H0; all Routh-Hurwitz arithmetic is done in
//! units of kappa_m to avoid catastrophic cancellation across ~1e10 rad/s
//! scales (H0 mixes 4th- and 2nd-order rate products).

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::modulation::{effective_couplings, EffectiveCouplings, ModulationSettings};
use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Normalized margin below which a verdict is reported marginal instead of
/// being asserted against the eigenvalue oracle.
const BOUNDARY_TOL: f64 = 1e-9;

/// Drift matrix C of the quadrature fluctuations (entries in rad/s):
///
/// ```text
///      | -ka/2     Da        0        g2-g1  |
/// C =  | -Da      -ka/2   -(g1+g2)    0      |
///      |  0        g2-g1   -km/2      Dm     |
///      | -(g1+g2)  0       -Dm       -km/2   |
/// ```
pub fn drift_matrix(params: &SystemParams, couplings: &EffectiveCouplings) -> Matrix4<f64> {
    let EffectiveCouplings { g1, g2 } = *couplings;
    Matrix4::new(
        -0.5 * params.kappa_a, params.delta_a, 0.0, g2 - g1,
        -params.delta_a, -0.5 * params.kappa_a, -(g1 + g2), 0.0,
        0.0, g2 - g1, -0.5 * params.kappa_m, params.delta_m,
        -(g1 + g2), 0.0, -params.delta_m, -0.5 * params.kappa_m,
    )
}

/// Stability verdict with the characteristic-polynomial coefficients, the
/// three Routh-Hurwitz inequality values, and the eigenvalue cross-check.
///
/// Coefficients and criteria are reported in units of kappa_m (h3 ~ km,
/// h2 ~ km^2, h1 ~ km^3, h0 ~ km^4); `max_eigen_real` is in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// True when some criterion sits within 1e-9 (normalized) of zero; the
    /// verdict is then not asserted against the eigenvalue oracle.
    pub marginal: bool,
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    /// The three inequality values: h3, h3 h2 - h1, h3 h2 h1 - (h1^2 + h3^2 h0).
    pub criteria: [f64; 3],
    /// Largest real part over the four drift-matrix eigenvalues (rad/s).
    pub max_eigen_real: f64,
}

/// Routh-Hurwitz stability of the drift matrix, cross-checked against the
/// eigenvalue oracle.
///
/// The quartic Hurwitz test requires the constant coefficient h0 to be
/// positive in addition to the three inequality criteria; h0 < 0 means a real
/// eigenvalue has already crossed into the right half plane (that sign is
/// invisible to the three criteria alone whenever h1, h2 remain large).
///
/// Errors with `Inconsistency` if the algebraic verdict and the eigenvalue
/// sign disagree away from a criterion boundary.
pub fn routh_hurwitz(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
) -> Result<StabilityReport> {
    if !(params.kappa_m > 0.0) || !(params.kappa_a > 0.0) {
        return Err(Error::Domain(format!(
            "decay rates must be positive: kappa_a = {:e}, kappa_m = {:e}",
            params.kappa_a, params.kappa_m
        )));
    }
    let km = params.kappa_m;
    let ka = params.kappa_a / km;
    let da = params.delta_a / km;
    let dm = params.delta_m / km;
    let g1 = couplings.g1 / km;
    let g2 = couplings.g2 / km;

    let diff = g2 * g2 - g1 * g1;
    let h3 = ka + 1.0;
    let h2 = 2.0 * diff + da * da + dm * dm + 0.25 * ka * ka + 0.25 + ka;
    let h1 = diff * (ka + 1.0) + dm * dm * ka + da * da + 0.25 * ka * ka + 0.25 * ka;
    let h0 = diff * diff - 2.0 * (g1 * g1 + g2 * g2) * da * dm + da * da * dm * dm
        + 0.25 * dm * dm * ka * ka
        + 0.5 * diff * ka
        + 0.25 * da * da
        + ka * ka / 16.0;

    let criteria = [h3, h3 * h2 - h1, h3 * h2 * h1 - (h1 * h1 + h3 * h3 * h0)];
    let stable = criteria.iter().all(|&c| c > 0.0) && h0 > 0.0;

    let normalized = drift_matrix(params, couplings) / km;
    let max_re_normalized = eigen_stable(&normalized);
    let eigen_verdict = max_re_normalized < 0.0;

    let margin = criteria
        .iter()
        .chain(std::iter::once(&h0))
        .fold(f64::INFINITY, |a, &c| a.min(c.abs()));
    let marginal = margin < BOUNDARY_TOL || max_re_normalized.abs() < BOUNDARY_TOL;

    if !marginal && stable != eigen_verdict {
        return Err(Error::Inconsistency(format!(
            "Routh-Hurwitz verdict ({stable}) disagrees with eigenvalue oracle \
             (max Re = {max_re_normalized:e} in units of kappa_m) away from a boundary"
        )));
    }

    Ok(StabilityReport {
        stable,
        marginal,
        h0,
        h1,
        h2,
        h3,
        criteria,
        max_eigen_real: max_re_normalized * km,
    })
}

/// Largest real part over the eigenvalues of a 4x4 real matrix.
pub fn eigen_stable(matrix: &Matrix4<f64>) -> f64 {
    matrix
        .complex_eigenvalues()
        .iter()
        .fold(f64::NEG_INFINITY, |acc, e| acc.max(e.re))
}

/// Parameter axes supported by [`stability_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridParam {
    Lambda1,
    Lambda2,
    DeltaA,
    DeltaM,
    G,
}

impl GridParam {
    pub fn name(&self) -> &'static str {
        match self {
            GridParam::Lambda1 => "lambda1",
            GridParam::Lambda2 => "lambda2",
            GridParam::DeltaA => "delta_a",
            GridParam::DeltaM => "delta_m",
            GridParam::G => "g",
        }
    }

    fn apply(&self, value: f64, params: &mut SystemParams, settings: &mut ModulationSettings) {
        match self {
            GridParam::Lambda1 => settings.lambda1 = value,
            GridParam::Lambda2 => settings.lambda2 = value,
            GridParam::DeltaA => params.delta_a = value,
            GridParam::DeltaM => params.delta_m = value,
            GridParam::G => params.g = value,
        }
    }
}

/// Element-wise stability verdicts over a two-parameter grid.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityGrid {
    pub x_param: GridParam,
    pub y_param: GridParam,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// stable[i][j] is the verdict at (x[i], y[j]).
    pub stable: Vec<Vec<bool>>,
}

/// Evaluate routh_hurwitz over a grid spanned by two of
/// {lambda1, lambda2, delta_a, delta_m, g}.
///
/// Grid points evaluate in parallel; the output ordering is deterministic.
pub fn stability_map(
    params: &SystemParams,
    settings: &ModulationSettings,
    x_param: GridParam,
    x: &[f64],
    y_param: GridParam,
    y: &[f64],
) -> Result<StabilityGrid> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Domain("stability map requires non-empty grids".into()));
    }
    let stable = x
        .par_iter()
        .map(|&xv| {
            y.iter()
                .map(|&yv| {
                    let mut p = *params;
                    let mut s = *settings;
                    x_param.apply(xv, &mut p, &mut s);
                    y_param.apply(yv, &mut p, &mut s);
                    let c = effective_couplings(p.g, &s)?;
                    Ok(routh_hurwitz(&p, &c)?.stable)
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<Vec<bool>>>>()?;
    Ok(StabilityGrid {
        x_param,
        y_param,
        x: x.to_vec(),
        y: y.to_vec(),
        stable,
    })
}
