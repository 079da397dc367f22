//! Stochastic time-domain oracle for the same linear dynamics the spectra
//! module solves in frequency space.
//!
//! The quantum Langevin equations are integrated as classical linear SDEs
//! whose noise variances equal the symmetrized quantum correlators,
//! (n + 1/2) per quadrature channel. For Gaussian linear dynamics and
//! symmetrized observables this correspondence is exact, which is what makes
//! the Monte-Carlo estimate a valid oracle for Y_out.
//!
//! The output sample reuses the integrator's own cavity-phase noise increment
//! for the -p_in term of the input-output relation; that correlation is what
//! produces the |M4| interference (the chi_a kappa_a - D cancellation) in the
//! estimated spectrum.

use crate::error::{Error, Result};
use crate::model::{NoiseOccupancies, SystemParams};
use crate::modulation::EffectiveCouplings;
use crate::stability::{drift_matrix, eigen_stable, routh_hurwitz};
use nalgebra::{Matrix4, SMatrix, SVector, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Integration and spectral-averaging configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    /// Step (s).
    pub dt: f64,
    /// Total integrated time (s).
    pub duration: f64,
    /// Discarded initial time (s).
    pub burn_in: f64,
    /// RNG seed; identical seeds give bit-identical trajectories.
    pub seed: u64,
    /// Segment count for Welch averaging.
    pub segments: usize,
    /// Segment overlap fraction in [0, 1).
    pub segment_overlap: f64,
}

impl SdeConfig {
    /// Defaults scaled to the system rates: dt resolves the fastest rate to
    /// 1e-3, the duration resolves frequencies down to ~1e-2 kappa_m.
    pub fn for_system(params: &SystemParams, couplings: &EffectiveCouplings, seed: u64) -> Self {
        let scale = params
            .kappa_a
            .max(params.kappa_m)
            .max(couplings.g1.abs() + couplings.g2.abs())
            .max(params.delta_a.abs())
            .max(params.delta_m.abs());
        Self {
            dt: 1e-3 / scale,
            duration: 2e4 / params.kappa_m,
            burn_in: 50.0 / params.kappa_m,
            seed,
            segments: 256,
            segment_overlap: 0.5,
        }
    }

    /// Check the invariants against the drift matrix the config will step.
    pub fn validate(&self, drift: &Matrix4<f64>) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Domain(format!("dt must be positive, got {:e}", self.dt)));
        }
        if !(self.burn_in >= 0.0) || !(self.duration > self.burn_in) {
            return Err(Error::Domain(format!(
                "need duration > burn_in >= 0, got duration = {:e}, burn_in = {:e}",
                self.duration, self.burn_in
            )));
        }
        if self.segments < 1 {
            return Err(Error::Domain("segments must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.segment_overlap) {
            return Err(Error::Domain(format!(
                "segment_overlap must be in [0, 1), got {}",
                self.segment_overlap
            )));
        }
        let max_rate = drift.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if self.dt * max_rate >= 0.1 {
            return Err(Error::Stiffness(format!(
                "dt * max|C| = {:.3} >= 0.1; suggested dt <= {:.3e} s",
                self.dt * max_rate,
                0.05 / max_rate
            )));
        }
        Ok(())
    }
}

/// Which magnon input quadrature carries the injected signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalChannel {
    #[serde(rename = "x_m")]
    XM,
    #[serde(rename = "p_m")]
    PM,
}

/// Deterministic drive added to a magnon input quadrature, standing in for
/// the probed-field envelope term of the modified input quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalSpec {
    /// Tone amplitude in input-quadrature units (dimensionless); 0 disables.
    pub amplitude: f64,
    /// Tone angular frequency (rad/s).
    pub omega_s: f64,
    pub channel: SignalChannel,
}

impl SignalSpec {
    pub fn none() -> Self {
        Self { amplitude: 0.0, omega_s: 0.0, channel: SignalChannel::XM }
    }

    pub fn tone(amplitude: f64, omega_s: f64, channel: SignalChannel) -> Self {
        Self { amplitude, omega_s, channel }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0) {
            return Err(Error::Domain(format!(
                "signal amplitude must be >= 0, got {:e}",
                self.amplitude
            )));
        }
        if !self.omega_s.is_finite() {
            return Err(Error::Domain("signal frequency must be finite".into()));
        }
        Ok(())
    }

    fn is_active(&self) -> bool {
        self.amplitude > 0.0
    }
}

/// Euler-Maruyama stepper for dV = C V dt + B dW with
/// B = diag(sqrt(ka), sqrt(ka), sqrt(km), sqrt(km)) and per-channel increment
/// variance (n + 1/2) dt.
struct Integrator {
    drift: Matrix4<f64>,
    dt: f64,
    sqrt_ka: f64,
    sqrt_km: f64,
    std_a: f64,
    std_m: f64,
    signal: SignalSpec,
    signal_row: usize,
    rng: ChaCha8Rng,
    state: Vector4<f64>,
    step_index: u64,
}

impl Integrator {
    fn new(
        params: &SystemParams,
        couplings: &EffectiveCouplings,
        occupancies: &NoiseOccupancies,
        cfg: &SdeConfig,
        signal: SignalSpec,
        with_noise: bool,
    ) -> Result<Self> {
        let report = routh_hurwitz(params, couplings)?;
        if !report.stable {
            return Err(Error::Unstable(format!(
                "max Re eig = {:.6e} rad/s >= 0",
                report.max_eigen_real
            )));
        }
        let drift = drift_matrix(params, couplings);
        cfg.validate(&drift)?;
        signal.validate()?;
        if signal.is_active() && signal.omega_s >= PI / cfg.dt {
            return Err(Error::Domain(format!(
                "tone frequency {:e} rad/s is above Nyquist {:e} rad/s",
                signal.omega_s,
                PI / cfg.dt
            )));
        }
        let signal_row = match signal.channel {
            SignalChannel::XM => 2,
            SignalChannel::PM => 3,
        };
        let (std_a, std_m) = if with_noise {
            (
                ((occupancies.n_a + 0.5) * cfg.dt).sqrt(),
                ((occupancies.n_m + 0.5) * cfg.dt).sqrt(),
            )
        } else {
            (0.0, 0.0)
        };
        Ok(Self {
            drift,
            dt: cfg.dt,
            sqrt_ka: params.kappa_a.sqrt(),
            sqrt_km: params.kappa_m.sqrt(),
            std_a,
            std_m,
            signal,
            signal_row,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            state: Vector4::zeros(),
            step_index: 0,
        })
    }

    /// Advance one step; returns the output sample
    /// y_k = sqrt(ka) P_a(t_k) - dW_pa(t_k)/dt, with the same increment
    /// dW_pa that drives the P_a equation over [t_k, t_k + dt).
    fn step(&mut self) -> f64 {
        let t = self.step_index as f64 * self.dt;
        let (w_xa, w_pa, w_xm, w_pm) = if self.std_a > 0.0 || self.std_m > 0.0 {
            (
                self.std_a * self.rng.sample::<f64, _>(StandardNormal),
                self.std_a * self.rng.sample::<f64, _>(StandardNormal),
                self.std_m * self.rng.sample::<f64, _>(StandardNormal),
                self.std_m * self.rng.sample::<f64, _>(StandardNormal),
            )
        } else {
            (0.0, 0.0, 0.0, 0.0)
        };
        let output = self.sqrt_ka * self.state[1] - w_pa / self.dt;

        let mut dv = self.drift * self.state * self.dt;
        if self.signal.is_active() {
            dv[self.signal_row] +=
                self.sqrt_km * self.signal.amplitude * (self.signal.omega_s * t).cos() * self.dt;
        }
        dv[0] += self.sqrt_ka * w_xa;
        dv[1] += self.sqrt_ka * w_pa;
        dv[2] += self.sqrt_km * w_xm;
        dv[3] += self.sqrt_km * w_pm;
        self.state += dv;
        self.step_index += 1;
        output
    }
}

fn step_counts(cfg: &SdeConfig) -> Result<(usize, usize)> {
    let total = (cfg.duration / cfg.dt).round() as usize;
    let burn = (cfg.burn_in / cfg.dt).round() as usize;
    if burn >= total {
        return Err(Error::Domain("burn-in leaves no samples".into()));
    }
    Ok((total, burn))
}

/// Integrate the quadrature Langevin equations and return the post-burn-in
/// output series dP_a_out sampled at dt. Deterministic for a given seed.
pub fn simulate(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    occupancies: &NoiseOccupancies,
    cfg: &SdeConfig,
    signal: &SignalSpec,
) -> Result<Vec<f64>> {
    let mut integrator = Integrator::new(params, couplings, occupancies, cfg, *signal, true)?;
    let (total, burn) = step_counts(cfg)?;
    let mut out = Vec::with_capacity(total - burn);
    for k in 0..total {
        let y = integrator.step();
        if k >= burn {
            out.push(y);
        }
    }
    Ok(out)
}

/// Noise-free run of the same integrator (deterministic response only); used
/// for injected-tone gain measurements.
pub fn simulate_noiseless(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    cfg: &SdeConfig,
    signal: &SignalSpec,
) -> Result<Vec<f64>> {
    let occ = NoiseOccupancies::vacuum();
    let mut integrator = Integrator::new(params, couplings, &occ, cfg, *signal, false)?;
    let (total, burn) = step_counts(cfg)?;
    let mut out = Vec::with_capacity(total - burn);
    for k in 0..total {
        let y = integrator.step();
        if k >= burn {
            out.push(y);
        }
    }
    Ok(out)
}

/// Welch estimate of the symmetrized output spectral density.
#[derive(Debug, Clone, Serialize)]
pub struct PsdEstimate {
    /// Bin angular frequencies (rad/s), spaced by 2 pi / (segment length).
    pub omega: Vec<f64>,
    /// Density in the same normalization as Y_out: a white series of
    /// intensity sigma^2 (sample variance sigma^2/dt) estimates flat sigma^2.
    pub psd: Vec<f64>,
    /// Standard error per bin from the inter-segment variance.
    pub std_err: Vec<f64>,
    pub segment_len: usize,
    pub segments_used: usize,
}

/// Segment-averaged periodogram with a periodic Hann window and the
/// configured overlap.
pub fn estimate_psd(series: &[f64], cfg: &SdeConfig) -> Result<PsdEstimate> {
    if !(cfg.dt > 0.0) {
        return Err(Error::Domain(format!("dt must be positive, got {:e}", cfg.dt)));
    }
    if cfg.segments < 1 || !(0.0..1.0).contains(&cfg.segment_overlap) {
        return Err(Error::Domain(
            "need segments >= 1 and segment_overlap in [0, 1)".into(),
        ));
    }
    let n = series.len();
    let denom = 1.0 + (cfg.segments as f64 - 1.0) * (1.0 - cfg.segment_overlap);
    let seg_len = (n as f64 / denom).floor() as usize;
    if seg_len < 8 {
        return Err(Error::Domain(format!(
            "series of {n} samples is too short for {} segments",
            cfg.segments
        )));
    }
    let hop = (((seg_len as f64) * (1.0 - cfg.segment_overlap)).floor() as usize).max(1);
    let n_seg = (n - seg_len) / hop + 1;
    if n_seg < 2 {
        return Err(Error::Domain("need at least 2 segments for error estimation".into()));
    }

    let window: Vec<f64> = (0..seg_len)
        .map(|j| 0.5 * (1.0 - (TAU * j as f64 / seg_len as f64).cos()))
        .collect();
    let window_power: f64 = window.iter().map(|w| w * w).sum();
    let norm = cfg.dt / window_power;

    let fft = rustfft::FftPlanner::<f64>::new().plan_fft_forward(seg_len);
    let n_bins = seg_len / 2 + 1;
    let mut sum = vec![0.0f64; n_bins];
    let mut sum_sq = vec![0.0f64; n_bins];
    let mut buf = vec![Complex64::ZERO; seg_len];
    for s in 0..n_seg {
        let start = s * hop;
        for (j, slot) in buf.iter_mut().enumerate() {
            *slot = Complex64::new(series[start + j] * window[j], 0.0);
        }
        fft.process(&mut buf);
        for j in 0..n_bins {
            let p = buf[j].norm_sqr() * norm;
            sum[j] += p;
            sum_sq[j] += p * p;
        }
    }

    let seg_time = seg_len as f64 * cfg.dt;
    let mut omega = Vec::with_capacity(n_bins);
    let mut psd = Vec::with_capacity(n_bins);
    let mut std_err = Vec::with_capacity(n_bins);
    for j in 0..n_bins {
        let mean = sum[j] / n_seg as f64;
        let var = (sum_sq[j] / n_seg as f64 - mean * mean).max(0.0) * n_seg as f64
            / (n_seg as f64 - 1.0);
        omega.push(TAU * j as f64 / seg_time);
        psd.push(mean);
        std_err.push((var / n_seg as f64).sqrt());
    }
    Ok(PsdEstimate { omega, psd, std_err, segment_len: seg_len, segments_used: n_seg })
}

/// Steady-state quadrature covariance from the continuous Lyapunov equation
/// C V + V C^T + D = 0 with D = diag(ka (n_a+1/2), ka (n_a+1/2),
/// km (n_m+1/2), km (n_m+1/2)).
pub fn steady_covariance(
    drift: &Matrix4<f64>,
    occupancies: &NoiseOccupancies,
    kappa_a: f64,
    kappa_m: f64,
) -> Result<Matrix4<f64>> {
    if !(kappa_a > 0.0) || !(kappa_m > 0.0) {
        return Err(Error::Domain("decay rates must be positive".into()));
    }
    if eigen_stable(drift) >= 0.0 {
        return Err(Error::Unstable(
            "no steady-state covariance for an unstable drift".into(),
        ));
    }
    // normalize rates by kappa_m; the solution V is unchanged
    let cn = drift / kappa_m;
    let da = kappa_a / kappa_m * (occupancies.n_a + 0.5);
    let dm = occupancies.n_m + 0.5;
    let diffusion = Matrix4::from_diagonal(&Vector4::new(da, da, dm, dm));

    // vec(C V + V C^T) = (I (x) C + C (x) I) vec(V) for column-stacked vec
    let eye = Matrix4::identity();
    let system: SMatrix<f64, 16, 16> = eye.kronecker(&cn) + cn.kronecker(&eye);
    let mut rhs = SVector::<f64, 16>::zeros();
    for j in 0..4 {
        for i in 0..4 {
            rhs[j * 4 + i] = -diffusion[(i, j)];
        }
    }
    let x = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Inconsistency("singular Lyapunov system".into()))?;
    let mut v = Matrix4::zeros();
    for j in 0..4 {
        for i in 0..4 {
            v[(i, j)] = x[j * 4 + i];
        }
    }
    v = 0.5 * (v + v.transpose());

    let residual = (cn * v + v * cn.transpose() + diffusion).norm();
    if residual > 1e-10 * diffusion.norm() {
        return Err(Error::Inconsistency(format!(
            "Lyapunov residual {residual:e} exceeds 1e-10 * |D|"
        )));
    }
    Ok(v)
}

/// Time-averaged quadrature covariance from a single stochastic trajectory,
/// with standard errors from contiguous batch means.
#[derive(Debug, Clone)]
pub struct CovarianceEstimate {
    pub mean: Matrix4<f64>,
    pub std_err: Matrix4<f64>,
    pub batches: usize,
}

/// Monte-Carlo cross-check for [`steady_covariance`]: integrates the SDE and
/// accumulates the outer product of the state over `batches` contiguous
/// batches after burn-in.
pub fn empirical_covariance(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    occupancies: &NoiseOccupancies,
    cfg: &SdeConfig,
    batches: usize,
) -> Result<CovarianceEstimate> {
    if batches < 2 {
        return Err(Error::Domain("need at least 2 batches".into()));
    }
    let mut integrator =
        Integrator::new(params, couplings, occupancies, cfg, SignalSpec::none(), true)?;
    let (total, burn) = step_counts(cfg)?;
    let usable = total - burn;
    let batch_len = usable / batches;
    if batch_len < 2 {
        return Err(Error::Domain("batches leave fewer than 2 samples each".into()));
    }
    for _ in 0..burn {
        integrator.step();
    }
    let mut batch_means: Vec<Matrix4<f64>> = Vec::with_capacity(batches);
    for _ in 0..batches {
        let mut acc = Matrix4::zeros();
        for _ in 0..batch_len {
            integrator.step();
            let v = integrator.state;
            acc += v * v.transpose();
        }
        batch_means.push(acc / batch_len as f64);
    }
    let mean = batch_means.iter().sum::<Matrix4<f64>>() / batches as f64;
    let mut var = Matrix4::zeros();
    for b in &batch_means {
        let d = b - mean;
        var += d.component_mul(&d);
    }
    var /= (batches - 1) as f64;
    let std_err = (var / batches as f64).map(f64::sqrt);
    Ok(CovarianceEstimate { mean, std_err, batches })
}

/// Inject a deterministic tone on the magnon amplitude quadrature, fit the
/// steady output amplitude by quadrature demodulation over an integer number
/// of periods, and return output/input amplitude. Contract: equals
/// |M1(omega_s)| within 2%.
pub fn measure_tone_gain(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    omega_s: f64,
    amplitude: f64,
    cfg: &SdeConfig,
) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::Domain(format!(
            "tone amplitude must be positive, got {amplitude:e}"
        )));
    }
    if !(omega_s > 0.0) {
        return Err(Error::Domain(format!(
            "tone frequency must be positive, got {omega_s:e}"
        )));
    }
    let signal = SignalSpec::tone(amplitude, omega_s, SignalChannel::XM);
    let y = simulate_noiseless(params, couplings, cfg, &signal)?;
    let samples_per_period = TAU / (omega_s * cfg.dt);
    let periods = (y.len() as f64 / samples_per_period).floor();
    if periods < 1.0 {
        return Err(Error::Domain(format!(
            "duration after burn-in covers {periods:.2} tone periods; need >= 1"
        )));
    }
    let m = (periods * samples_per_period).floor() as usize;
    let mut in_phase = 0.0;
    let mut quadrature = 0.0;
    for (k, &yk) in y[..m].iter().enumerate() {
        let phase = omega_s * (k as f64 * cfg.dt);
        in_phase += yk * phase.cos();
        quadrature += yk * phase.sin();
    }
    let fitted = 2.0 * (in_phase * in_phase + quadrature * quadrature).sqrt() / m as f64;
    Ok(fitted / amplitude)
}
