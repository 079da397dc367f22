//! Effective rotating/anti-rotating couplings from the two-tone bias-field
//! modulation.
//!
//! Modulating the magnon frequency with two tones at omega_1 = omega_d -
//! omega_L and omega_2 = omega_L + omega_d converts, via the Jacobi-Anger
//! expansion e^{i lambda sin x} = sum_m J_m(lambda) e^{imx}, the bare coupling
//! g into sideband series for the beam-splitter (g2) and two-mode-squeezing
//! (g1) interactions. With matched frequencies each series contains exactly
//! one static term:
//!
//! ```text
//! g1 = g J_0(lambda_1) J_{-1}(lambda_2)      (anti-rotating weight)
//! g2 = g J_0(lambda_2) J_{-1}(lambda_1)      (rotating weight)
//! ```
//!
//! Signs are retained (J_{-1} = -J_1, so both weights are negative for small
//! indices); only (g1 +/- g2)^2 enters observable spectra.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

/// Relative tolerance for the frequency-matching check.
const MATCH_TOL: f64 = 1e-9;

/// Bessel function of the first kind J_n(x), by power series.
///
/// Supported for |x| <= 30; relative accuracy is full double precision for
/// |x| <= 2 (the operating range of the modulation indices). Negative orders
/// use J_{-n}(x) = (-1)^n J_n(x) exactly by construction.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    if !x.is_finite() || x.abs() > 30.0 {
        return Err(Error::Domain(format!(
            "bessel_j supports |x| <= 30, got x = {x:e}"
        )));
    }
    let n = order.unsigned_abs();
    let v = bessel_j_series(n, x);
    Ok(if order < 0 && n % 2 == 1 { -v } else { v })
}

/// J_n(x) = sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!) for n >= 0.
fn bessel_j_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // leading term (x/2)^n / n!, accumulated as a product to avoid overflow
    let mut term = 1.0;
    for j in 1..=n {
        term *= half / j as f64;
    }
    let mut sum = term;
    let ratio = -half * half;
    for k in 1..=220u32 {
        term *= ratio / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-20 * sum.abs() + 1e-300 {
            break;
        }
    }
    sum
}

/// Two-tone modulation of the magnon frequency plus the drive frequencies it
/// must be matched against.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulationSettings {
    /// Modulation indices lambda_i = gamma B_bi / omega_i (dimensionless).
    pub lambda1: f64,
    pub lambda2: f64,
    /// Modulation phases (rad).
    pub phi1: f64,
    pub phi2: f64,
    /// Modulation angular frequencies (rad/s).
    pub omega1: f64,
    pub omega2: f64,
    /// Cavity and magnon drive angular frequencies (rad/s).
    pub omega_l: f64,
    pub omega_d: f64,
}

impl ModulationSettings {
    /// Settings with omega_1, omega_2 chosen to satisfy the matching
    /// conditions exactly for the given drives.
    pub fn matched_for_drives(
        lambda1: f64,
        lambda2: f64,
        phi1: f64,
        phi2: f64,
        omega_l: f64,
        omega_d: f64,
    ) -> Self {
        Self {
            lambda1,
            lambda2,
            phi1,
            phi2,
            omega1: omega_d - omega_l,
            omega2: omega_l + omega_d,
            omega_l,
            omega_d,
        }
    }

    /// Absolute residuals (rad/s) of the two matching conditions.
    pub fn matching_residuals(&self) -> (f64, f64) {
        (
            (self.omega1 - (self.omega_d - self.omega_l)).abs(),
            (self.omega2 - (self.omega_l + self.omega_d)).abs(),
        )
    }

    /// True iff omega1 = omega_d - omega_L and omega2 = omega_L + omega_d to
    /// 1e-9 relative.
    pub fn matched(&self) -> bool {
        let (r1, r2) = self.matching_residuals();
        let t1 = (self.omega_d - self.omega_l).abs();
        let t2 = (self.omega_l + self.omega_d).abs();
        r1 <= MATCH_TOL * t1.max(f64::MIN_POSITIVE) && r2 <= MATCH_TOL * t2.max(f64::MIN_POSITIVE)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0) || !(self.lambda2 >= 0.0) {
            return Err(Error::Domain(format!(
                "modulation indices must be >= 0: lambda1 = {:e}, lambda2 = {:e}",
                self.lambda1, self.lambda2
            )));
        }
        if !self.phi1.is_finite() || !self.phi2.is_finite() {
            return Err(Error::Domain("modulation phases must be finite".into()));
        }
        Ok(())
    }

    /// Advisory warnings (indices outside the physically reasonable range).
    pub fn advisories(&self) -> Vec<String> {
        let mut w = Vec::new();
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if v > 2.0 {
                w.push(format!(
                    "{name} = {v} exceeds 2; modulation indices are expected in [0, 2]"
                ));
            }
        }
        w
    }
}

/// Signed static coupling weights of the two interaction types (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveCouplings {
    /// Anti-rotating (two-mode-squeezing) coupling.
    pub g1: f64,
    /// Rotating (beam-splitter) coupling.
    pub g2: f64,
}

/// Static effective couplings g1 = g J_0(l1) J_{-1}(l2), g2 = g J_0(l2) J_{-1}(l1).
///
/// Requires matched modulation frequencies (the static reduction only exists
/// there) and zero modulation phases: for phi != 0 the static Hamiltonian
/// carries phase factors that the quadrature drift matrix does not include,
/// so such settings are refused rather than silently mishandled.
pub fn effective_couplings(g: f64, settings: &ModulationSettings) -> Result<EffectiveCouplings> {
    settings.validate()?;
    if !(g >= 0.0) {
        return Err(Error::Domain(format!("coupling must be >= 0: g = {g:e}")));
    }
    if !settings.matched() {
        let (residual1, residual2) = settings.matching_residuals();
        return Err(Error::UnmatchedFrequencies { residual1, residual2 });
    }
    if settings.phi1 != 0.0 || settings.phi2 != 0.0 {
        return Err(Error::Domain(format!(
            "nonzero modulation phases are not supported by the static reduction \
             (phi1 = {:e}, phi2 = {:e}); set phi_i = 0",
            settings.phi1, settings.phi2
        )));
    }
    Ok(EffectiveCouplings {
        g1: g * bessel_j(0, settings.lambda1)? * bessel_j(-1, settings.lambda2)?,
        g2: g * bessel_j(0, settings.lambda2)? * bessel_j(-1, settings.lambda1)?,
    })
}

/// Time-dependent coupling series, truncated to |m1|, |m2| <= truncation:
///
/// ```text
/// g1(t)/g = sum J_{m1}(l1) J_{m2}(l2) e^{-i[(wL+wd+m1 w1+m2 w2) t + m1 phi1 + m2 phi2]}
/// g2(t)/g = sum J_{n1}(l1) J_{n2}(l2) e^{-i[(wL-wd-n1 w1-n2 w2) t - n1 phi1 - n2 phi2]}
/// ```
pub fn coupling_series(
    g: f64,
    settings: &ModulationSettings,
    t: f64,
    truncation: u32,
) -> Result<(Complex64, Complex64)> {
    settings.validate()?;
    let m = truncation as i32;
    let mut g1 = Complex64::ZERO;
    let mut g2 = Complex64::ZERO;
    for m1 in -m..=m {
        let j1 = bessel_j(m1, settings.lambda1)?;
        for m2 in -m..=m {
            let j2 = bessel_j(m2, settings.lambda2)?;
            let amp = g * j1 * j2;
            if amp == 0.0 {
                continue;
            }
            let w_anti =
                settings.omega_l + settings.omega_d + m1 as f64 * settings.omega1 + m2 as f64 * settings.omega2;
            let ph_anti = m1 as f64 * settings.phi1 + m2 as f64 * settings.phi2;
            g1 += amp * Complex64::from_polar(1.0, -(w_anti * t + ph_anti));

            let w_rot =
                settings.omega_l - settings.omega_d - m1 as f64 * settings.omega1 - m2 as f64 * settings.omega2;
            let ph_rot = -(m1 as f64 * settings.phi1 + m2 as f64 * settings.phi2);
            g2 += amp * Complex64::from_polar(1.0, -(w_rot * t + ph_rot));
        }
    }
    Ok((g1, g2))
}

/// One neglected sideband of the coupling series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SidebandTerm {
    /// Oscillation angular frequency (rad/s).
    pub frequency: f64,
    /// Signed amplitude g J_{m1}(lambda1) J_{m2}(lambda2) (rad/s).
    pub amplitude: f64,
}

/// Validity report for dropping the fast-oscillating coupling terms.
#[derive(Debug, Clone, Serialize)]
pub struct RwaReport {
    /// Neglected modulation sidebands up to the truncation order.
    pub terms: Vec<SidebandTerm>,
    /// max |amplitude| / |frequency| over the neglected sidebands; << 1 means
    /// the static Hamiltonian is a good approximation. Infinite if a neglected
    /// term is static (degenerate frequency choice).
    pub metric: f64,
}

/// Enumerate the modulation sidebands dropped by the static reduction.
///
/// The kept static pairs are (m1, m2) = (0, -1) for g1 and (-1, 0) for g2.
/// The (0, 0) carriers (the unmodulated counter-rotating and rotating terms at
/// omega_L + omega_d and |omega_d - omega_L|) are not modulation sidebands and
/// are excluded from the enumeration; their validity is governed by the drive
/// separation itself.
pub fn rwa_residual(g: f64, settings: &ModulationSettings, truncation: u32) -> Result<RwaReport> {
    settings.validate()?;
    if !settings.matched() {
        let (residual1, residual2) = settings.matching_residuals();
        return Err(Error::UnmatchedFrequencies { residual1, residual2 });
    }
    let scale = (settings.omega_l.abs() + settings.omega_d.abs()).max(f64::MIN_POSITIVE);
    let m = truncation as i32;
    let mut terms = Vec::new();
    let mut metric = 0.0f64;
    for m1 in -m..=m {
        let j1 = bessel_j(m1, settings.lambda1)?;
        for m2 in -m..=m {
            let j2 = bessel_j(m2, settings.lambda2)?;
            let amp = g * j1 * j2;
            if amp == 0.0 {
                continue;
            }
            // g1 series: keep (0,-1), skip carrier (0,0)
            if (m1, m2) != (0, -1) && (m1, m2) != (0, 0) {
                let freq = settings.omega_l
                    + settings.omega_d
                    + m1 as f64 * settings.omega1
                    + m2 as f64 * settings.omega2;
                terms.push(SidebandTerm { frequency: freq, amplitude: amp });
                metric = metric.max(ratio(amp, freq, scale));
            }
            // g2 series: keep (-1,0), skip carrier (0,0)
            if (m1, m2) != (-1, 0) && (m1, m2) != (0, 0) {
                let freq = settings.omega_l
                    - settings.omega_d
                    - m1 as f64 * settings.omega1
                    - m2 as f64 * settings.omega2;
                terms.push(SidebandTerm { frequency: freq, amplitude: amp });
                metric = metric.max(ratio(amp, freq, scale));
            }
        }
    }
    Ok(RwaReport { terms, metric })
}

fn ratio(amplitude: f64, frequency: f64, scale: f64) -> f64 {
    if frequency.abs() <= MATCH_TOL * scale {
        // a static neglected term: the frequency choice is degenerate
        f64::INFINITY
    } else {
        amplitude.abs() / frequency.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn drive_defaults(lambda1: f64, lambda2: f64) -> ModulationSettings {
        ModulationSettings::matched_for_drives(lambda1, lambda2, 0.0, 0.0, TAU * 27.5e9, TAU * 37.5e9)
    }

    #[test]
    fn bessel_at_zero() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_frozen_reference_values() {
        // frozen from an independent 30-digit power-series evaluation
        for (n, x, expected) in [
            (0, 0.16, 0.99361023272113419),
            (1, 0.16, 0.079744272921077705),
            (-1, 0.16, -0.079744272921077705),
            (0, 0.152, 0.99423233519315611),
            (1, 0.152, 0.075780723192107959),
            (0, 0.3, 0.97762624653829609),
            (0, 2.0, 0.22389077914123567),
            (1, 2.0, 0.57672480775687339),
            (2, 0.5, 0.030604023458682641),
            (3, 1.5, 0.060963951141139631),
        ] {
            assert_relative_eq!(bessel_j(n, x).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn bessel_rejects_out_of_range() {
        assert!(bessel_j(0, 31.0).is_err());
        assert!(bessel_j(0, -30.5).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
        assert!(bessel_j(0, 29.9).is_ok());
    }

    #[test]
    fn bessel_negative_order_symmetry_is_exact() {
        for n in 1..6i32 {
            for x in [0.05, 0.7, 1.9] {
                let pos = bessel_j(n, x).unwrap();
                let neg = bessel_j(-n, x).unwrap();
                let expected = if n % 2 == 1 { -pos } else { pos };
                assert_eq!(neg, expected); // sign flip only, bitwise equal
            }
        }
    }

    proptest! {
        #[test]
        fn bessel_recurrence(x in 0.01f64..=2.0, n in 1i32..8) {
            // J_{n-1}(x) + J_{n+1}(x) = (2n/x) J_n(x)
            let lhs = bessel_j(n - 1, x).unwrap() + bessel_j(n + 1, x).unwrap();
            let rhs = 2.0 * n as f64 / x * bessel_j(n, x).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-12));
        }

        #[test]
        fn effective_couplings_bounded_and_same_signed(
            l1 in 0.0f64..=2.0, l2 in 0.0f64..=2.0, g in 1e6f64..1e10
        ) {
            let c = effective_couplings(g, &drive_defaults(l1, l2)).unwrap();
            prop_assert!(c.g1.abs() <= g && c.g2.abs() <= g);
            prop_assert!(c.g1 * c.g2 >= 0.0); // both carry the J_{-1} sign
        }
    }

    #[test]
    fn effective_couplings_single_tone_cases() {
        let g = TAU * 375e6;
        // lambda2 = 0: only the rotating term survives
        let c = effective_couplings(g, &drive_defaults(0.16, 0.0)).unwrap();
        assert_eq!(c.g1, 0.0);
        assert_relative_eq!(c.g2, -g * 0.079744272921077705, max_relative = 1e-12);
        // lambda1 = lambda2: symmetric weights
        let c = effective_couplings(g, &drive_defaults(0.16, 0.16)).unwrap();
        assert_eq!(c.g1, c.g2);
    }

    #[test]
    fn effective_couplings_operating_point() {
        // lambda1 = 0.16, lambda2 = 0.95 lambda1; frozen independent values
        let g = TAU * 375e6;
        let c = effective_couplings(g, &drive_defaults(0.16, 0.152)).unwrap();
        assert_relative_eq!(c.g1 / g, -0.07529650200668624, max_relative = 1e-12);
        assert_relative_eq!(c.g2 / g, -0.079284334684603451, max_relative = 1e-12);
    }

    #[test]
    fn effective_couplings_rejects_unmatched_and_phased() {
        let mut s = drive_defaults(0.16, 0.152);
        s.omega1 *= 1.001;
        match effective_couplings(1.0, &s) {
            Err(Error::UnmatchedFrequencies { residual1, .. }) => {
                assert_relative_eq!(residual1, 0.001 * TAU * 10e9, max_relative = 1e-9)
            }
            other => panic!("expected unmatched-frequency error, got {other:?}"),
        }
        let mut s = drive_defaults(0.16, 0.152);
        s.phi1 = 0.3;
        assert!(matches!(effective_couplings(1.0, &s), Err(Error::Domain(_))));
    }

    #[test]
    fn series_single_term_at_zero_truncation() {
        let g = TAU * 375e6;
        let s = drive_defaults(0.3, 0.2);
        let (g1, g2) = coupling_series(g, &s, 0.0, 0).unwrap();
        let j00 = g * bessel_j(0, 0.3).unwrap() * bessel_j(0, 0.2).unwrap();
        assert_relative_eq!(g1.re, j00, max_relative = 1e-12);
        assert_relative_eq!(g1.im, 0.0, epsilon = 1e-9);
        assert_relative_eq!(g2.re, j00, max_relative = 1e-12);
    }

    #[test]
    fn series_time_average_recovers_static_couplings() {
        // all series frequencies are multiples of 5 GHz for the 27.5/37.5 GHz
        // drive split, so a rectangle rule over one 5 GHz period is exact for
        // the truncated trigonometric polynomial
        let g = TAU * 375e6;
        let s = drive_defaults(0.16, 0.152);
        let c = effective_couplings(g, &s).unwrap();
        let period = 1.0 / 5e9;
        let n = 512;
        let mut avg1 = Complex64::ZERO;
        let mut avg2 = Complex64::ZERO;
        for k in 0..n {
            let t = period * k as f64 / n as f64;
            let (g1, g2) = coupling_series(g, &s, t, 3).unwrap();
            avg1 += g1;
            avg2 += g2;
        }
        avg1 /= n as f64;
        avg2 /= n as f64;
        assert_relative_eq!(avg1.re, c.g1, max_relative = 1e-9);
        assert_relative_eq!(avg2.re, c.g2, max_relative = 1e-9);
        assert!(avg1.im.abs() < 1e-9 * g && avg2.im.abs() < 1e-9 * g);
    }

    #[test]
    fn matched_series_has_exactly_one_static_term_per_sum() {
        let s = drive_defaults(0.16, 0.152);
        let scale = s.omega_l + s.omega_d;
        let mut static_anti = Vec::new();
        let mut static_rot = Vec::new();
        for m1 in -3i32..=3 {
            for m2 in -3i32..=3 {
                let anti = s.omega_l + s.omega_d + m1 as f64 * s.omega1 + m2 as f64 * s.omega2;
                if anti.abs() < 1e-9 * scale {
                    static_anti.push((m1, m2));
                }
                let rot = s.omega_l - s.omega_d - m1 as f64 * s.omega1 - m2 as f64 * s.omega2;
                if rot.abs() < 1e-9 * scale {
                    static_rot.push((m1, m2));
                }
            }
        }
        assert_eq!(static_anti, vec![(0, -1)]);
        assert_eq!(static_rot, vec![(-1, 0)]);
        // and those terms carry exactly the static coupling weights
        let g = TAU * 375e6;
        let c = effective_couplings(g, &s).unwrap();
        let anti_amp = g * bessel_j(0, s.lambda1).unwrap() * bessel_j(-1, s.lambda2).unwrap();
        let rot_amp = g * bessel_j(-1, s.lambda1).unwrap() * bessel_j(0, s.lambda2).unwrap();
        assert_relative_eq!(anti_amp, c.g1, max_relative = 1e-12);
        assert_relative_eq!(rot_amp, c.g2, max_relative = 1e-12);
    }

    #[test]
    fn rwa_no_modulation_is_empty() {
        let r = rwa_residual(TAU * 375e6, &drive_defaults(0.0, 0.0), 3).unwrap();
        assert!(r.terms.is_empty());
        assert_eq!(r.metric, 0.0);
    }

    #[test]
    fn rwa_operating_point_metric_small() {
        let r = rwa_residual(TAU * 375e6, &drive_defaults(0.16, 0.152), 3).unwrap();
        assert!(!r.terms.is_empty());
        assert!(r.metric > 0.0 && r.metric < 1e-2, "metric = {}", r.metric);
    }

    #[test]
    fn rwa_degenerate_frequency_reported() {
        // omega_L = omega_d makes omega1 = 0: some neglected sidebands are static
        let s = ModulationSettings::matched_for_drives(0.16, 0.152, 0.0, 0.0, TAU * 37.5e9, TAU * 37.5e9);
        assert!(s.matched());
        let r = rwa_residual(TAU * 375e6, &s, 3).unwrap();
        assert!(r.metric.is_infinite());
    }
}
