//! Command implementations behind the binary: deterministic CSV emission with
//! JSON metadata sidecars, parameter sweeps, stability maps, Monte-Carlo
//! cross-checks, and figure-data reproduction with a MATCH/DISCREPANCY report.
//!
//! Output files are written atomically (temp + rename). Every CSV is
//! accompanied by a sidecar holding the fully resolved configuration; feeding
//! a sidecar back through `--config` reproduces the CSV byte-for-byte.

use crate::config::{
    resolve, resolved_config, Resolved, RunConfig, SweepParameter,
};
use crate::error::{Error, Result};
use crate::model::thermal_occupancy;
use crate::modulation::{effective_couplings, EffectiveCouplings};
use crate::spectra::{
    additional_noise, spectrum_scan, transfer_functions, ultrastrong_reference, UltraStrongParams,
};
use crate::stability::{routh_hurwitz, stability_map, GridParam};
use crate::timedomain::{estimate_psd, measure_tone_gain, simulate, SignalSpec};
use crate::SystemParams;
use serde::Serialize;
use serde_json::json;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}

fn sidecar(
    command: &str,
    config: &RunConfig,
    resolved: &Resolved,
    details: serde_json::Value,
) -> serde_json::Value {
    json!({
        "artifact_version": ARTIFACT_VERSION,
        "command": command,
        "config": config,
        "resolved": {
            "params": resolved.params,
            "settings": resolved.settings,
            "couplings": resolved.couplings,
            "occupancies": resolved.occupancies,
            "notes": resolved.notes,
        },
        "details": details,
    })
}

fn check_stable(resolved: &Resolved) -> Result<crate::stability::StabilityReport> {
    let report = routh_hurwitz(&resolved.params, &resolved.couplings)?;
    if !report.stable {
        // the report is the diagnostic the exit-2 contract promises
        eprintln!(
            "{}",
            serde_json::to_string_pretty(&report).unwrap_or_default()
        );
        return Err(Error::Unstable(format!(
            "max Re eig = {:.6e} rad/s >= 0",
            report.max_eigen_real
        )));
    }
    Ok(report)
}

/// Frequency scan of Y_out, R_B, N_ad with SQL flags.
pub fn cmd_spectrum(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let resolved = resolve(config)?;
    let report = check_stable(&resolved)?;
    let omegas = config.grid.omegas(resolved.params.kappa_m)?;
    let result = spectrum_scan(
        &omegas,
        &resolved.params,
        &resolved.couplings,
        &resolved.occupancies,
        0.0,
    )?;

    let km = resolved.params.kappa_m;
    let mut csv = String::from("omega_over_kappa_m,y_out,r_b,n_ad,below_sql\n");
    for p in &result.points {
        writeln!(
            csv,
            "{},{},{},{},{}",
            p.omega / km,
            p.y_out,
            p.r_b,
            p.n_ad,
            p.below_sql as u8
        )
        .unwrap();
    }

    let outdir = &config.output.directory;
    let csv_path = outdir.join("spectrum.csv");
    write_atomic(&csv_path, &csv)?;
    let mut written = vec![csv_path];

    if config.output.metadata {
        let meta = sidecar(
            "spectrum",
            &resolved_config(config, &resolved, None),
            &resolved,
            json!({ "stability": report, "points": result.points.len(), "s_bex": 0.0 }),
        );
        let meta_path = outdir.join("spectrum.meta.json");
        write_json(&meta_path, &meta)?;
        written.push(meta_path);
    }
    println!(
        "spectrum: {} points, N_ad(min) = {:.6e}, R_B(max) = {:.6e}",
        result.points.len(),
        result.points.iter().map(|p| p.n_ad).fold(f64::INFINITY, f64::min),
        result.points.iter().map(|p| p.r_b).fold(0.0, f64::max),
    );
    Ok(written)
}

/// One-parameter sweep in long CSV format; unstable sweep points are emitted
/// with stable=0 and no spectrum values.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let resolved = resolve(config)?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep block required for the sweep command".into()))?;
    if sweep.values.is_empty() {
        return Err(Error::Config("sweep.values must be non-empty".into()));
    }
    if sweep.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep.values must be finite".into()));
    }
    let km = resolved.params.kappa_m;
    let omegas = config.grid.omegas(km)?;

    let mut csv = String::from("sweep_value,omega_over_kappa_m,r_b,n_ad,stable\n");
    let mut verdicts = Vec::new();
    for &value in &sweep.values {
        let rows = sweep_point(&resolved, sweep.parameter, value, &omegas)?;
        verdicts.push(json!({ "value": value, "stable": rows.is_some() }));
        match rows {
            None => writeln!(csv, "{value},,,,0").unwrap(),
            Some(points) => {
                for (omega, r_b, n_ad) in points {
                    writeln!(csv, "{value},{},{r_b},{n_ad},1", omega / km).unwrap();
                }
            }
        }
    }

    let outdir = &config.output.directory;
    let csv_path = outdir.join("sweep.csv");
    write_atomic(&csv_path, &csv)?;
    let mut written = vec![csv_path];
    if config.output.metadata {
        let meta = sidecar(
            "sweep",
            &resolved_config(config, &resolved, None),
            &resolved,
            json!({ "parameter": sweep.parameter.name(), "points": verdicts }),
        );
        let meta_path = outdir.join("sweep.meta.json");
        write_json(&meta_path, &meta)?;
        written.push(meta_path);
    }
    println!("sweep over {}: {} values", sweep.parameter.name(), sweep.values.len());
    Ok(written)
}

/// Rows for one sweep value, or None when that point is unstable.
#[allow(clippy::type_complexity)]
fn sweep_point(
    resolved: &Resolved,
    parameter: SweepParameter,
    value: f64,
    omegas: &[f64],
) -> Result<Option<Vec<(f64, f64, f64)>>> {
    let base = &resolved.params;
    match parameter {
        SweepParameter::Cooperativity => {
            let reference =
                UltraStrongParams::new(value, base.kappa_a, base.kappa_m, resolved.occupancies.n_a)
                    .map_err(|e| Error::Config(format!("cooperativity sweep: {e}")))?;
            Ok(Some(
                omegas
                    .iter()
                    .map(|&w| {
                        let (r_b2, n_ad2) = ultrastrong_reference(w, &reference);
                        (w, r_b2, n_ad2)
                    })
                    .collect(),
            ))
        }
        SweepParameter::Lambda2Ratio => {
            if !(value >= 0.0) {
                return Err(Error::Config(format!("lambda2_ratio must be >= 0, got {value}")));
            }
            let mut settings = resolved.settings;
            settings.lambda2 = value * settings.lambda1;
            let couplings = effective_couplings(base.g, &settings)?;
            evaluate_sweep_rows(base, &couplings, resolved.occupancies.n_a, omegas)
        }
        SweepParameter::Temperature => {
            if !(value >= 0.0) {
                return Err(Error::Config(format!("temperature must be >= 0, got {value}")));
            }
            let n_a = thermal_occupancy(base.omega_a, value)?;
            evaluate_sweep_rows(base, &resolved.couplings, n_a, omegas)
        }
        SweepParameter::Detuning => {
            let mut params = *base;
            params.delta_a = value * base.kappa_m;
            params.delta_m = value * base.kappa_m;
            evaluate_sweep_rows(&params, &resolved.couplings, resolved.occupancies.n_a, omegas)
        }
    }
}

#[allow(clippy::type_complexity)]
fn evaluate_sweep_rows(
    params: &SystemParams,
    couplings: &EffectiveCouplings,
    n_a: f64,
    omegas: &[f64],
) -> Result<Option<Vec<(f64, f64, f64)>>> {
    if !routh_hurwitz(params, couplings)?.stable {
        return Ok(None);
    }
    let occ = crate::model::NoiseOccupancies { n_a, n_m: 0.0 };
    let scan = spectrum_scan(omegas, params, couplings, &occ, 0.0)?;
    Ok(Some(scan.points.iter().map(|p| (p.omega, p.r_b, p.n_ad)).collect()))
}

/// Axes for the stability-map command. Lambda axes are dimensionless;
/// detuning and coupling axes are in units of kappa_m.
#[derive(Debug, Clone)]
pub struct StabilityAxes {
    pub x_param: GridParam,
    pub x: Vec<f64>,
    pub y_param: GridParam,
    pub y: Vec<f64>,
}

impl Default for StabilityAxes {
    fn default() -> Self {
        let axis: Vec<f64> = (0..41).map(|i| 0.05 * i as f64).collect();
        Self {
            x_param: GridParam::Lambda1,
            x: axis.clone(),
            y_param: GridParam::Lambda2,
            y: axis,
        }
    }
}

pub fn parse_grid_param(name: &str) -> Result<GridParam> {
    match name {
        "lambda1" => Ok(GridParam::Lambda1),
        "lambda2" => Ok(GridParam::Lambda2),
        "delta_a" => Ok(GridParam::DeltaA),
        "delta_m" => Ok(GridParam::DeltaM),
        "g" => Ok(GridParam::G),
        other => Err(Error::Config(format!(
            "unknown stability axis '{other}' (expected lambda1, lambda2, delta_a, delta_m, g)"
        ))),
    }
}

fn scale_axis(param: GridParam, values: &[f64], kappa_m: f64) -> Vec<f64> {
    match param {
        GridParam::Lambda1 | GridParam::Lambda2 => values.to_vec(),
        GridParam::DeltaA | GridParam::DeltaM | GridParam::G => {
            values.iter().map(|v| v * kappa_m).collect()
        }
    }
}

/// Routh-Hurwitz report at the configured point plus a two-parameter
/// stability map (CSV columns: param1, param2, stable).
pub fn cmd_stability(config: &RunConfig, axes: &StabilityAxes) -> Result<Vec<PathBuf>> {
    let resolved = resolve(config)?;
    let report = routh_hurwitz(&resolved.params, &resolved.couplings)?;
    let km = resolved.params.kappa_m;
    let grid = stability_map(
        &resolved.params,
        &resolved.settings,
        axes.x_param,
        &scale_axis(axes.x_param, &axes.x, km),
        axes.y_param,
        &scale_axis(axes.y_param, &axes.y, km),
    )?;

    let mut csv = String::from("param1,param2,stable\n");
    for (i, &xv) in axes.x.iter().enumerate() {
        for (j, &yv) in axes.y.iter().enumerate() {
            writeln!(csv, "{xv},{yv},{}", grid.stable[i][j] as u8).unwrap();
        }
    }

    let outdir = &config.output.directory;
    let csv_path = outdir.join("stability_map.csv");
    write_atomic(&csv_path, &csv)?;
    let mut written = vec![csv_path];
    if config.output.metadata {
        let meta = sidecar(
            "stability",
            &resolved_config(config, &resolved, None),
            &resolved,
            json!({
                "report_at_config_point": report,
                "x_param": axes.x_param.name(),
                "y_param": axes.y_param.name(),
                "axis_units": "lambda axes dimensionless; delta/g axes in kappa_m",
            }),
        );
        let meta_path = outdir.join("stability.meta.json");
        write_json(&meta_path, &meta)?;
        written.push(meta_path);
    }
    println!(
        "stability: config point {} (max Re eig = {:.3e} rad/s); map {}x{}",
        if report.stable { "stable" } else { "UNSTABLE" },
        report.max_eigen_real,
        axes.x.len(),
        axes.y.len()
    );
    Ok(written)
}

/// Monte-Carlo run: trajectory sample, Welch PSD with error bars, per-bin
/// analytic Y_out, RMS comparison, and (with a tone configured) the measured
/// gain against |M1(omega_s)|.
pub fn cmd_montecarlo(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let resolved = resolve(config)?;
    check_stable(&resolved)?;
    let mc = config
        .montecarlo
        .as_ref()
        .ok_or_else(|| Error::Config("montecarlo block required for the montecarlo command".into()))?;
    let sde = mc.resolve(&resolved.params, &resolved.couplings);
    let km = resolved.params.kappa_m;
    let signal = config
        .signal
        .as_ref()
        .map(|s| s.to_spec(km))
        .unwrap_or_else(SignalSpec::none);

    let series = simulate(
        &resolved.params,
        &resolved.couplings,
        &resolved.occupancies,
        &sde,
        &signal,
    )?;
    let est = estimate_psd(&series, &sde)?;

    // analytic density at the bin frequencies, emitted up to 10 kappa_m
    let tone_active = signal.amplitude > 0.0;
    let emit_limit = 10.0 * km;
    let mut csv = String::from("omega_over_kappa_m,psd,std_err,y_out\n");
    let mut band_sq = 0.0f64;
    let mut band_n = 0usize;
    for j in 0..est.omega.len() {
        let w = est.omega[j];
        if w > emit_limit {
            break;
        }
        let tf = crate::spectra::transfer_functions(w, &resolved.params, &resolved.couplings)?;
        let y = crate::spectra::output_spectrum(&tf, &resolved.occupancies, 0.0)?;
        writeln!(csv, "{},{},{},{}", w / km, est.psd[j], est.std_err[j], y).unwrap();
        let in_band = w >= 0.05 * km && w <= 5.0 * km;
        let near_tone = tone_active
            && (w - signal.omega_s).abs() < 3.0 * (est.omega[1] - est.omega[0]);
        if in_band && !near_tone {
            band_sq += ((est.psd[j] - y) / y).powi(2);
            band_n += 1;
        }
    }
    let rms = if band_n > 0 { (band_sq / band_n as f64).sqrt() } else { f64::NAN };

    let outdir = &config.output.directory;
    let psd_path = outdir.join("montecarlo_psd.csv");
    write_atomic(&psd_path, &csv)?;
    let mut written = vec![psd_path];

    // short trajectory excerpt
    let mut traj = String::from("t_after_burn_in_s,dp_a_out\n");
    for (k, y) in series.iter().take(8192).enumerate() {
        writeln!(traj, "{},{y}", k as f64 * sde.dt).unwrap();
    }
    let traj_path = outdir.join("trajectory.csv");
    write_atomic(&traj_path, &traj)?;
    written.push(traj_path);

    let mut gain_details = json!(null);
    if tone_active {
        let gain = measure_tone_gain(
            &resolved.params,
            &resolved.couplings,
            signal.omega_s,
            signal.amplitude,
            &sde,
        )?;
        let m1 = transfer_functions(signal.omega_s, &resolved.params, &resolved.couplings)?
            .m1
            .norm();
        let gain_csv = format!(
            "omega_s_over_kappa_m,measured_gain,m1_abs,rel_dev\n{},{gain},{m1},{}\n",
            signal.omega_s / km,
            (gain - m1).abs() / m1
        );
        let gain_path = outdir.join("montecarlo_gain.csv");
        write_atomic(&gain_path, &gain_csv)?;
        written.push(gain_path);
        gain_details = json!({
            "omega_s": signal.omega_s,
            "measured_gain": gain,
            "m1_abs": m1,
            "rel_dev": (gain - m1).abs() / m1,
        });
    }

    if config.output.metadata {
        let meta = sidecar(
            "montecarlo",
            &resolved_config(config, &resolved, Some(&sde)),
            &resolved,
            json!({
                "sde": sde,
                "samples": series.len(),
                "segments_used": est.segments_used,
                "segment_len": est.segment_len,
                "comparison_band_kappa_m": [0.05, 5.0],
                "rms_relative_deviation": rms,
                "tone": gain_details,
            }),
        );
        let meta_path = outdir.join("montecarlo.meta.json");
        write_json(&meta_path, &meta)?;
        written.push(meta_path);
    }
    println!(
        "montecarlo: {} samples, {} segments, RMS deviation vs analytic = {:.3}%",
        series.len(),
        est.segments_used,
        100.0 * rms
    );
    Ok(written)
}

// ---------------------------------------------------------------------------
// figure reproduction
// ---------------------------------------------------------------------------

/// One quantitative anchor checked during reproduction.
#[derive(Debug, Clone, Serialize)]
pub struct Anchor {
    pub figure: String,
    pub quantity: String,
    pub expected: String,
    pub computed: String,
    pub verdict: String,
    pub note: String,
}

impl Anchor {
    fn new(
        figure: &str,
        quantity: &str,
        expected: impl Into<String>,
        computed: impl Into<String>,
        matched: bool,
        note: impl Into<String>,
    ) -> Self {
        Self {
            figure: figure.into(),
            quantity: quantity.into(),
            expected: expected.into(),
            computed: computed.into(),
            verdict: if matched { "MATCH" } else { "DISCREPANCY" }.into(),
            note: note.into(),
        }
    }
}

pub const FIGURE_IDS: [&str; 8] = [
    "fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b", "fig7a", "fig7b",
];

struct ReproContext {
    params: SystemParams,
    /// lambda2/lambda1 family used by several figures.
    ratios: [f64; 4],
    n_a_cold: f64,
}

impl ReproContext {
    fn new() -> Result<Self> {
        let resolved = resolve(&RunConfig::default())?;
        Ok(Self {
            params: resolved.params,
            ratios: [0.0, 0.3, 0.6, 0.95],
            n_a_cold: resolved.occupancies.n_a,
        })
    }

    fn couplings_for_ratio(&self, ratio: f64) -> Result<EffectiveCouplings> {
        let resolved = resolve(&RunConfig::default())?;
        let mut settings = resolved.settings;
        settings.lambda2 = ratio * settings.lambda1;
        effective_couplings(self.params.g, &settings)
    }

    /// Rotating-wave-only bundle (lambda2 = 0): g1 = 0.
    fn rotating_only(&self) -> Result<EffectiveCouplings> {
        let resolved = resolve(&RunConfig::default())?;
        let mut settings = resolved.settings;
        settings.lambda2 = 0.0;
        effective_couplings(self.params.g, &settings)
    }

    /// Anti-rotating-only bundle: lambda1 = 0 with lambda2 chosen
    /// stability-limited (4 g1^2 / (ka km) = 0.15 < 1) so the response stays
    /// bounded; the full modulation index would sit far past the instability
    /// threshold |g1| = sqrt(ka km)/2.
    fn anti_rotating_only(&self) -> Result<EffectiveCouplings> {
        let resolved = resolve(&RunConfig::default())?;
        let mut settings = resolved.settings;
        settings.lambda1 = 0.0;
        settings.lambda2 = 0.023;
        effective_couplings(self.params.g, &settings)
    }

    fn n_ad_curve(&self, couplings: &EffectiveCouplings, n_a: f64, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas
            .iter()
            .map(|&w| additional_noise(w, &self.params, couplings, n_a))
            .collect()
    }

    fn r_b_curve(&self, couplings: &EffectiveCouplings, omegas: &[f64]) -> Result<Vec<f64>> {
        omegas
            .iter()
            .map(|&w| crate::spectra::response(w, &self.params, couplings))
            .collect()
    }
}

fn linear_grid(lo: f64, hi: f64, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64) * scale)
        .collect()
}

fn log_grid(lo: f64, hi: f64, n: usize, scale: f64) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp() * scale)
        .collect()
}

fn csv_from_columns(header: &str, omega_over_km: &[f64], columns: &[&[f64]]) -> String {
    let mut csv = String::from(header);
    csv.push('\n');
    for (i, &w) in omega_over_km.iter().enumerate() {
        let mut row = format!("{w}");
        for col in columns {
            write!(row, ",{}", col[i]).unwrap();
        }
        csv.push_str(&row);
        csv.push('\n');
    }
    csv
}

/// Emit the data behind one figure (or all), returning the written files and
/// the quantitative anchors. The command succeeds even when anchors record
/// DISCREPANCY: the report exists to quantify them.
pub fn cmd_reproduce(figure: &str, outdir: &Path) -> Result<Vec<PathBuf>> {
    let figures: Vec<&str> = if figure == "all" {
        FIGURE_IDS.to_vec()
    } else if FIGURE_IDS.contains(&figure) {
        vec![figure]
    } else {
        return Err(Error::Config(format!(
            "unknown figure id '{figure}' (expected one of {} or all)",
            FIGURE_IDS.join(", ")
        )));
    };

    let ctx = ReproContext::new()?;
    let mut anchors = Vec::new();
    let mut written = Vec::new();
    for id in &figures {
        let path = match *id {
            "fig2a" => repro_fig2a(&ctx, outdir, &mut anchors)?,
            "fig2b" => repro_fig2b(&ctx, outdir, &mut anchors)?,
            "fig3a" => repro_fig3a(&ctx, outdir, &mut anchors)?,
            "fig3b" => repro_fig3b(&ctx, outdir, &mut anchors)?,
            "fig4a" => repro_fig4a(&ctx, outdir, &mut anchors)?,
            "fig4b" => repro_fig4b(&ctx, outdir, &mut anchors)?,
            "fig7a" => repro_fig7a(&ctx, outdir, &mut anchors)?,
            "fig7b" => repro_fig7b(&ctx, outdir, &mut anchors)?,
            _ => unreachable!(),
        };
        written.push(path);
    }

    let report = json!({
        "artifact_version": ARTIFACT_VERSION,
        "figures": figures,
        "files": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "anchors": anchors,
    });
    let report_path = outdir.join("reproduction_report.json");
    write_json(&report_path, &report)?;
    written.push(report_path.clone());

    for a in report["anchors"].as_array().unwrap() {
        println!(
            "{} [{}] {}: expected {}, computed {}",
            a["figure"].as_str().unwrap(),
            a["verdict"].as_str().unwrap(),
            a["quantity"].as_str().unwrap(),
            a["expected"].as_str().unwrap(),
            a["computed"].as_str().unwrap(),
        );
    }
    Ok(written)
}

fn repro_fig2a(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = linear_grid(0.0, 5.0, 501, km);
    let rot = ctx.r_b_curve(&ctx.rotating_only()?, &omegas)?;
    let anti = ctx.r_b_curve(&ctx.anti_rotating_only()?, &omegas)?;
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let csv = csv_from_columns(
        "omega_over_kappa_m,r_b_rotating_only,r_b_anti_rotating_only",
        &over_km,
        &[&rot, &anti],
    );
    let path = outdir.join("fig2a.csv");
    write_atomic(&path, &csv)?;

    let max_rb = rot.iter().chain(anti.iter()).fold(0.0f64, |a, &b| a.max(b));
    anchors.push(Anchor::new(
        "fig2a",
        "max R_B over rotating-only and anti-rotating-only curves",
        "<= 1 (single-interaction curves stay below unit response)",
        format!("{max_rb:.6}"),
        max_rb <= 1.0 + 1e-9,
        "anti-rotating-only bundle is stability-limited (u = 4 g1^2/(ka km) = 0.15)",
    ));
    Ok(path)
}

fn repro_fig2b(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = linear_grid(0.0, 5.0, 501, km);
    let rot = ctx.n_ad_curve(&ctx.rotating_only()?, ctx.n_a_cold, &omegas)?;
    let anti = ctx.n_ad_curve(&ctx.anti_rotating_only()?, ctx.n_a_cold, &omegas)?;
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let csv = csv_from_columns(
        "omega_over_kappa_m,n_ad_rotating_only,n_ad_anti_rotating_only",
        &over_km,
        &[&rot, &anti],
    );
    let path = outdir.join("fig2b.csv");
    write_atomic(&path, &csv)?;

    anchors.push(Anchor::new(
        "fig2b",
        "resonant additional noise, rotating-only vs anti-rotating-only",
        "rotating-only suppresses more at omega ~ 0",
        format!("rotating {:.4}, anti-rotating {:.4}", rot[0], anti[0]),
        rot[0] < anti[0],
        "",
    ));
    Ok(path)
}

fn repro_fig3a(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = log_grid(1e-2, 10.0, 600, km);
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let mut curves = Vec::new();
    for r in ctx.ratios {
        curves.push(ctx.r_b_curve(&ctx.couplings_for_ratio(r)?, &omegas)?);
    }
    let cols: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
    let csv = csv_from_columns(
        "omega_over_kappa_m,r_b_ratio_0,r_b_ratio_0_3,r_b_ratio_0_6,r_b_ratio_0_95",
        &over_km,
        &cols,
    );
    let path = outdir.join("fig3a.csv");
    write_atomic(&path, &csv)?;

    let resonant: Vec<f64> = ctx
        .ratios
        .iter()
        .map(|&r| crate::spectra::response(0.0, &ctx.params, &ctx.couplings_for_ratio(r).unwrap()))
        .collect::<Result<_>>()?;
    let monotone = resonant.windows(2).all(|w| w[1] > w[0]);
    anchors.push(Anchor::new(
        "fig3a",
        "resonant response vs anti-rotating weight lambda2/lambda1",
        "R_B(0) increases with the ratio (response improves with anti-rotating weight)",
        format!(
            "R_B(0) = {:.4}, {:.4}, {:.4}, {:.4} for ratios 0, 0.3, 0.6, 0.95",
            resonant[0], resonant[1], resonant[2], resonant[3]
        ),
        monotone,
        "",
    ));
    Ok(path)
}

fn repro_fig3b(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = log_grid(1e-2, 10.0, 600, km);
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let mut curves = Vec::new();
    for r in ctx.ratios {
        curves.push(ctx.n_ad_curve(&ctx.couplings_for_ratio(r)?, ctx.n_a_cold, &omegas)?);
    }
    let cols: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
    let csv = csv_from_columns(
        "omega_over_kappa_m,n_ad_ratio_0,n_ad_ratio_0_3,n_ad_ratio_0_6,n_ad_ratio_0_95",
        &over_km,
        &cols,
    );
    let path = outdir.join("fig3b.csv");
    write_atomic(&path, &csv)?;

    // headline value and the 0.95-vs-1.0 ordering
    let best = additional_noise(0.0, &ctx.params, &ctx.couplings_for_ratio(0.95)?, ctx.n_a_cold)?;
    let equal = additional_noise(0.0, &ctx.params, &ctx.couplings_for_ratio(1.0)?, ctx.n_a_cold)?;
    anchors.push(Anchor::new(
        "fig3b",
        "N_ad(0) at lambda2 = 0.95 lambda1, 50 mK",
        "0.0004",
        format!("{best:.6e}"),
        (best - 4e-4).abs() <= 0.15 * 4e-4,
        "",
    ));
    anchors.push(Anchor::new(
        "fig3b",
        "best resonant suppression not at equal weights",
        "N_ad(0) at ratio 0.95 < N_ad(0) at ratio 1.0",
        format!("{best:.4e} vs {equal:.4e}"),
        best < equal,
        "",
    ));
    anchors.push(valley_anchor(ctx)?);
    Ok(path)
}

/// Look for the reported valley near omega = 0.33 kappa_m on the 0.95-ratio
/// additional-noise curve.
fn valley_anchor(ctx: &ReproContext) -> Result<Anchor> {
    let km = ctx.params.kappa_m;
    let couplings = ctx.couplings_for_ratio(0.95)?;
    let omegas = linear_grid(0.01, 2.0, 399, km);
    let n_ad = ctx.n_ad_curve(&couplings, ctx.n_a_cold, &omegas)?;
    let mut valley: Option<(f64, f64)> = None;
    for j in 1..n_ad.len() - 1 {
        if n_ad[j] < n_ad[j - 1] && n_ad[j] < n_ad[j + 1] {
            let w = omegas[j] / km;
            if (0.2..=0.5).contains(&w) {
                valley = Some((w, n_ad[j]));
                break;
            }
        }
    }
    let at_resonance = additional_noise(0.0, &ctx.params, &couplings, ctx.n_a_cold)?;
    let at_033 = additional_noise(0.33 * km, &ctx.params, &couplings, ctx.n_a_cold)?;
    Ok(match valley {
        Some((w, depth)) => Anchor::new(
            "fig3b",
            "valley region near omega = 0.33 kappa_m (ratio 0.95)",
            "local minimum of N_ad near 0.33 kappa_m",
            format!("local minimum {depth:.4e} at omega = {w:.3} kappa_m"),
            true,
            "",
        ),
        None => Anchor::new(
            "fig3b",
            "valley region near omega = 0.33 kappa_m (ratio 0.95)",
            "local minimum of N_ad near 0.33 kappa_m",
            format!(
                "no interior local minimum on (0.01, 2.0) kappa_m; \
                 N_ad(0.33 kappa_m) = {at_033:.4e} = {:.2}x N_ad(0) = {at_resonance:.4e}",
                at_033 / at_resonance
            ),
            false,
            "N_ad increases monotonically away from resonance for this parameter set",
        ),
    })
}

fn repro_fig4a(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let n_a_hot = thermal_occupancy(ctx.params.omega_a, 300.0)?;
    let omegas = log_grid(1e-2, 10.0, 600, km);
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let mut curves = Vec::new();
    for r in ctx.ratios {
        curves.push(ctx.n_ad_curve(&ctx.couplings_for_ratio(r)?, n_a_hot, &omegas)?);
    }
    let cols: Vec<&[f64]> = curves.iter().map(|c| c.as_slice()).collect();
    let csv = csv_from_columns(
        "omega_over_kappa_m,n_ad_ratio_0,n_ad_ratio_0_3,n_ad_ratio_0_6,n_ad_ratio_0_95",
        &over_km,
        &cols,
    );
    let path = outdir.join("fig4a.csv");
    write_atomic(&path, &csv)?;

    let resonant = additional_noise(0.0, &ctx.params, &ctx.couplings_for_ratio(0.95)?, n_a_hot)?;
    anchors.push(Anchor::new(
        "fig4a",
        "N_ad(0) at lambda2 = 0.95 lambda1, T = 300 K",
        "< 0.5 (below the SQL at room temperature)",
        format!("{resonant:.4}"),
        resonant < 0.5,
        "",
    ));
    Ok(path)
}

fn repro_fig4b(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let couplings = ctx.couplings_for_ratio(0.95)?;
    let temps = log_grid(0.05, 300.0, 61, 1.0);
    let mut n_ad = Vec::with_capacity(temps.len());
    for &t in &temps {
        let n_a = thermal_occupancy(ctx.params.omega_a, t)?;
        n_ad.push(additional_noise(0.0, &ctx.params, &couplings, n_a)?);
    }
    let mut csv = String::from("temperature_k,n_ad_0,sql\n");
    for (t, n) in temps.iter().zip(&n_ad) {
        writeln!(csv, "{t},{n},0.5").unwrap();
    }
    let path = outdir.join("fig4b.csv");
    write_atomic(&path, &csv)?;

    let max = n_ad.iter().fold(0.0f64, |a, &b| a.max(b));
    let monotone = n_ad.windows(2).all(|w| w[1] >= w[0]);
    anchors.push(Anchor::new(
        "fig4b",
        "N_ad(0) across T in [0.05, 300] K",
        "monotone in T and below the SQL over the whole range",
        format!("max N_ad(0) = {max:.4}, monotone = {monotone}"),
        max < 0.5 && monotone,
        "",
    ));
    Ok(path)
}

fn repro_fig7a(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = log_grid(1e-2, 10.0, 600, km);
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let modulated = ctx.n_ad_curve(&ctx.couplings_for_ratio(0.95)?, ctx.n_a_cold, &omegas)?;
    // without modulation the bare coupling g enters as a pure beam-splitter
    // interaction (the counter-rotating carrier averages out at the drive
    // separation): g2 = -g, g1 = 0
    let unmodulated_couplings = EffectiveCouplings { g1: 0.0, g2: -ctx.params.g };
    let unmodulated = ctx.n_ad_curve(&unmodulated_couplings, ctx.n_a_cold, &omegas)?;
    let csv = csv_from_columns(
        "omega_over_kappa_m,n_ad_modulated,n_ad_unmodulated",
        &over_km,
        &[&modulated, &unmodulated],
    );
    let path = outdir.join("fig7a.csv");
    write_atomic(&path, &csv)?;

    let n_mod = additional_noise(0.0, &ctx.params, &ctx.couplings_for_ratio(0.95)?, ctx.n_a_cold)?;
    let n_unmod = additional_noise(0.0, &ctx.params, &unmodulated_couplings, ctx.n_a_cold)?;
    let ratio = n_unmod / n_mod;
    anchors.push(Anchor::new(
        "fig7a",
        "resonant suppression gain of the modulated over the unmodulated scheme",
        "nearly five orders of magnitude",
        format!("{ratio:.4e} (log10 = {:.2})", ratio.log10()),
        (4.5..=6.5).contains(&ratio.log10()),
        "unmodulated scheme evaluated as rotating-wave-only at the bare coupling",
    ));
    Ok(path)
}

fn repro_fig7b(ctx: &ReproContext, outdir: &Path, anchors: &mut Vec<Anchor>) -> Result<PathBuf> {
    let km = ctx.params.kappa_m;
    let omegas = log_grid(1e-2, 10.0, 600, km);
    let over_km: Vec<f64> = omegas.iter().map(|w| w / km).collect();
    let scheme = ctx.n_ad_curve(&ctx.couplings_for_ratio(0.95)?, ctx.n_a_cold, &omegas)?;
    let mut reference_curves = Vec::new();
    for c in [10.0, 100.0, 1000.0] {
        let u = UltraStrongParams::new(c, ctx.params.kappa_a, ctx.params.kappa_m, ctx.n_a_cold)?;
        reference_curves.push(
            omegas
                .iter()
                .map(|&w| ultrastrong_reference(w, &u).1)
                .collect::<Vec<f64>>(),
        );
    }
    let csv = csv_from_columns(
        "omega_over_kappa_m,n_ad_scheme,n_ad2_c10,n_ad2_c100,n_ad2_c1000",
        &over_km,
        &[&scheme, &reference_curves[0], &reference_curves[1], &reference_curves[2]],
    );
    let path = outdir.join("fig7b.csv");
    write_atomic(&path, &csv)?;

    let ours = additional_noise(0.0, &ctx.params, &ctx.couplings_for_ratio(0.95)?, ctx.n_a_cold)?;
    anchors.push(Anchor::new(
        "fig7b",
        "this scheme's N_ad(0)",
        "0.0004",
        format!("{ours:.6e}"),
        (ours - 4e-4).abs() <= 0.15 * 4e-4,
        "",
    ));
    let u1000 = UltraStrongParams::new(1000.0, ctx.params.kappa_a, ctx.params.kappa_m, ctx.n_a_cold)?;
    let n1000 = ultrastrong_reference(0.0, &u1000).1;
    anchors.push(Anchor::new(
        "fig7b",
        "reference scheme N_ad2(0) at C = 1000",
        "2.8125e-4, same order as this scheme",
        format!("{n1000:.6e}, ratio to this scheme {:.3}", ours / n1000),
        (n1000 - 2.8125e-4).abs() <= 1e-9 && (ours / n1000) < 2.0 && (n1000 / ours) < 2.0,
        "",
    ));
    let u100 = UltraStrongParams::new(100.0, ctx.params.kappa_a, ctx.params.kappa_m, ctx.n_a_cold)?;
    let n100 = ultrastrong_reference(0.0, &u100).1;
    anchors.push(Anchor::new(
        "fig7b",
        "text attribution of 0.0002 to the C = 100 curve",
        "0.0002",
        format!("N_ad2(0, C=100) = {n100:.6e}"),
        (n100 - 2e-4).abs() <= 0.5 * 2e-4,
        "the closed form puts the quoted order of magnitude at C = 1000, not C = 100",
    ));
    Ok(path)
}
