//! JSON run configuration: `/2pi` frequency parsing, strict schema
//! validation, and resolution into library types.
//!
//! Frequencies in config files are ordinary (`/2pi`) values, either a bare
//! number in Hz or a string with units ("37.5 GHz", "15 MHz"), because that is
//! how experimental parameters are quoted. Conversion to angular frequencies
//! happens once, here. Unknown keys are rejected rather than ignored: silent
//! default substitution is the dominant failure mode in reproduction work.

use crate::error::{Error, Result};
use crate::model::{validate_params, NoiseOccupancies, SystemParams};
use crate::modulation::{effective_couplings, EffectiveCouplings, ModulationSettings};
use crate::timedomain::{SdeConfig, SignalChannel, SignalSpec};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

/// Ordinary (`/2pi`) frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Freq(pub f64);

impl Freq {
    pub fn angular(&self) -> f64 {
        TAU * self.0
    }

    fn parse(text: &str) -> std::result::Result<f64, String> {
        let t = text.trim();
        let (number, scale) = if let Some(v) = t.strip_suffix("THz") {
            (v, 1e12)
        } else if let Some(v) = t.strip_suffix("GHz") {
            (v, 1e9)
        } else if let Some(v) = t.strip_suffix("MHz") {
            (v, 1e6)
        } else if let Some(v) = t.strip_suffix("kHz") {
            (v, 1e3)
        } else if let Some(v) = t.strip_suffix("Hz") {
            (v, 1.0)
        } else {
            return Err(format!(
                "frequency '{t}' needs a unit suffix (Hz, kHz, MHz, GHz, THz) or a bare number in Hz"
            ));
        };
        number
            .trim()
            .parse::<f64>()
            .map(|v| v * scale)
            .map_err(|e| format!("frequency '{t}': {e}"))
    }
}

impl Serialize for Freq {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for Freq {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Number(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Number(hz) => Ok(Freq(hz)),
            Repr::Text(s) => Freq::parse(&s).map(Freq).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub omega_m: Freq,
    /// Defaults to omega_m (resonant cavity); flagged in output metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_a: Option<Freq>,
    #[serde(default)]
    pub delta_a: Freq,
    #[serde(default)]
    pub delta_m: Freq,
    pub kappa_a: Freq,
    pub kappa_m: Freq,
    pub g: Freq,
    /// Kelvin.
    #[serde(default = "default_temperature")]
    pub temperature: f64,
}

fn default_temperature() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModulationConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(default)]
    pub phi1: f64,
    #[serde(default)]
    pub phi2: f64,
    /// Cavity drive frequency. Defaults to omega_d - 10 GHz so the matched
    /// modulation tones are non-degenerate; only the sideband bookkeeping
    /// depends on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_l: Option<Freq>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub omega_min_over_kappa_m: f64,
    pub omega_max_over_kappa_m: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            omega_min_over_kappa_m: 1e-2,
            omega_max_over_kappa_m: 10.0,
            points: 500,
            spacing: Spacing::Log,
        }
    }
}

impl GridConfig {
    /// Probe frequencies in rad/s.
    pub fn omegas(&self, kappa_m: f64) -> Result<Vec<f64>> {
        let (lo, hi, n) = (self.omega_min_over_kappa_m, self.omega_max_over_kappa_m, self.points);
        if n < 1 {
            return Err(Error::Config("grid.points must be >= 1".into()));
        }
        if !lo.is_finite() || !hi.is_finite() || hi < lo {
            return Err(Error::Config(format!(
                "grid range must be finite with max >= min, got [{lo}, {hi}]"
            )));
        }
        if n == 1 {
            return Ok(vec![lo * kappa_m]);
        }
        let values = match self.spacing {
            Spacing::Linear => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect::<Vec<_>>(),
            Spacing::Log => {
                if !(lo > 0.0) {
                    return Err(Error::Config(
                        "log spacing requires omega_min_over_kappa_m > 0".into(),
                    ));
                }
                let (llo, lhi) = (lo.ln(), hi.ln());
                (0..n)
                    .map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        };
        Ok(values.into_iter().map(|v| v * kappa_m).collect())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// lambda2 = value * lambda1.
    Lambda2Ratio,
    /// Kelvin.
    Temperature,
    /// Cooperativity of the ultra-strong-coupling reference scheme.
    Cooperativity,
    /// delta_a = delta_m = value * kappa_m.
    Detuning,
}

impl SweepParameter {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParameter::Lambda2Ratio => "lambda2_ratio",
            SweepParameter::Temperature => "temperature",
            SweepParameter::Cooperativity => "cooperativity",
            SweepParameter::Detuning => "detuning",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    /// Step (s); defaults to 1e-3 over the fastest rate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Total time (s); defaults to 2e4 / kappa_m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Discarded initial time (s); defaults to 50 / kappa_m.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_segments")]
    pub segments: usize,
    #[serde(default = "default_overlap")]
    pub segment_overlap: f64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            dt: None,
            duration: None,
            burn_in: None,
            seed: default_seed(),
            segments: default_segments(),
            segment_overlap: default_overlap(),
        }
    }
}

fn default_seed() -> u64 {
    42
}
fn default_segments() -> usize {
    256
}
fn default_overlap() -> f64 {
    0.5
}

impl MonteCarloConfig {
    /// Fill unset fields from the system-scaled defaults.
    pub fn resolve(&self, params: &SystemParams, couplings: &EffectiveCouplings) -> SdeConfig {
        let base = SdeConfig::for_system(params, couplings, self.seed);
        SdeConfig {
            dt: self.dt.unwrap_or(base.dt),
            duration: self.duration.unwrap_or(base.duration),
            burn_in: self.burn_in.unwrap_or(base.burn_in),
            seed: self.seed,
            segments: self.segments,
            segment_overlap: self.segment_overlap,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SignalKind {
    None,
    Tone,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SignalConfig {
    pub kind: SignalKind,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub omega_s_over_kappa_m: f64,
    #[serde(default = "default_channel")]
    pub channel: SignalChannel,
}

fn default_channel() -> SignalChannel {
    SignalChannel::XM
}

impl SignalConfig {
    pub fn to_spec(&self, kappa_m: f64) -> SignalSpec {
        match self.kind {
            SignalKind::None => SignalSpec::none(),
            SignalKind::Tone => SignalSpec::tone(
                self.amplitude,
                self.omega_s_over_kappa_m * kappa_m,
                self.channel,
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_outdir")]
    pub directory: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "default_true")]
    pub metadata: bool,
}

fn default_outdir() -> PathBuf {
    PathBuf::from("out")
}
fn default_true() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: default_outdir(),
            format: OutputFormat::Csv,
            metadata: true,
        }
    }
}

/// Complete run configuration. Exactly the documented keys; unknown keys are
/// a hard error.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub modulation: ModulationConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub montecarlo: Option<MonteCarloConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<SignalConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for RunConfig {
    /// The feasible experimental operating point: omega_m/2pi = 37.5 GHz,
    /// g = 1e-2 omega_m, kappa_a/2pi = 33 MHz, kappa_m/2pi = 15 MHz,
    /// lambda1 = 0.16, lambda2 = 0.95 lambda1, zero detunings, 50 mK.
    fn default() -> Self {
        Self {
            system: SystemConfig {
                omega_m: Freq(37.5e9),
                omega_a: None,
                delta_a: Freq(0.0),
                delta_m: Freq(0.0),
                kappa_a: Freq(33e6),
                kappa_m: Freq(15e6),
                g: Freq(375e6),
                temperature: 0.05,
            },
            modulation: ModulationConfig {
                lambda1: 0.16,
                lambda2: 0.152,
                phi1: 0.0,
                phi2: 0.0,
                omega_l: None,
            },
            sweep: None,
            grid: GridConfig::default(),
            montecarlo: None,
            signal: None,
            output: OutputConfig::default(),
        }
    }
}

/// Config resolved into library types, with provenance notes for the
/// metadata sidecar.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub params: SystemParams,
    pub settings: ModulationSettings,
    pub couplings: EffectiveCouplings,
    pub occupancies: NoiseOccupancies,
    pub omega_a_defaulted: bool,
    pub omega_l_defaulted: bool,
    pub notes: Vec<String>,
}

/// Resolve a configuration. All defaulting happens in Hz space so that the
/// resolved config re-loads to bit-identical parameters.
pub fn resolve(config: &RunConfig) -> Result<Resolved> {
    let sys = &config.system;
    let omega_m_hz = sys.omega_m.0;
    let omega_a_hz = sys.omega_a.map(|f| f.0).unwrap_or(omega_m_hz);
    let omega_a_defaulted = sys.omega_a.is_none();

    let params = SystemParams {
        omega_m: TAU * omega_m_hz,
        omega_a: TAU * omega_a_hz,
        delta_a: sys.delta_a.angular(),
        delta_m: sys.delta_m.angular(),
        kappa_a: sys.kappa_a.angular(),
        kappa_m: sys.kappa_m.angular(),
        g: sys.g.angular(),
        temperature: sys.temperature,
    };
    params.validate()?;

    let omega_d_hz = omega_m_hz - sys.delta_m.0;
    let omega_l_hz = config
        .modulation
        .omega_l
        .map(|f| f.0)
        .unwrap_or(omega_d_hz - 10e9);
    let omega_l_defaulted = config.modulation.omega_l.is_none();
    if !(omega_l_hz > 0.0) || !(omega_d_hz > 0.0) {
        return Err(Error::Config(format!(
            "drive frequencies must be positive: omega_L = {omega_l_hz:e} Hz, \
             omega_d = {omega_d_hz:e} Hz; set modulation.omega_l explicitly"
        )));
    }

    let settings = ModulationSettings::matched_for_drives(
        config.modulation.lambda1,
        config.modulation.lambda2,
        config.modulation.phi1,
        config.modulation.phi2,
        TAU * omega_l_hz,
        TAU * omega_d_hz,
    );
    settings.validate()?;
    let couplings = effective_couplings(params.g, &settings)?;
    let occupancies = params.occupancies()?;

    let mut notes = validate_params(&params);
    notes.extend(settings.advisories());
    if omega_a_defaulted {
        notes.push("omega_a defaulted to omega_m (resonant cavity)".into());
    }
    if omega_l_defaulted {
        notes.push("omega_L defaulted to omega_d - 10 GHz for the modulation bookkeeping".into());
    }
    if config.modulation.lambda1 == config.modulation.lambda2 {
        notes.push(
            "unit-modulus M4 regime: lambda1 == lambda2 gives |M4(omega)| = 1 at all frequencies"
                .into(),
        );
    }

    Ok(Resolved {
        params,
        settings,
        couplings,
        occupancies,
        omega_a_defaulted,
        omega_l_defaulted,
        notes,
    })
}

/// A copy of `config` with every defaulted quantity made explicit, suitable
/// for the metadata sidecar: re-loading it reproduces the run byte-for-byte.
pub fn resolved_config(
    config: &RunConfig,
    resolved: &Resolved,
    montecarlo: Option<&SdeConfig>,
) -> RunConfig {
    let mut out = config.clone();
    if out.system.omega_a.is_none() {
        out.system.omega_a = Some(out.system.omega_m);
    }
    if out.modulation.omega_l.is_none() {
        out.modulation.omega_l = Some(Freq(resolved.settings.omega_l / TAU));
    }
    if let Some(sde) = montecarlo {
        out.montecarlo = Some(MonteCarloConfig {
            dt: Some(sde.dt),
            duration: Some(sde.duration),
            burn_in: Some(sde.burn_in),
            seed: sde.seed,
            segments: sde.segments,
            segment_overlap: sde.segment_overlap,
        });
    }
    out
}

/// Load a config file; metadata sidecars (which embed the config under a
/// `config` key next to `artifact_version`) are accepted directly.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let config_value = match (&value.get("artifact_version"), value.get("config")) {
        (Some(_), Some(inner)) => inner.clone(),
        _ => value,
    };
    serde_json::from_value(config_value)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frequency_parsing() {
        for (text, hz) in [
            ("37.5 GHz", 37.5e9),
            ("15 MHz", 15e6),
            ("0 Hz", 0.0),
            ("1.5kHz", 1.5e3),
            ("2 THz", 2e12),
        ] {
            assert_eq!(Freq::parse(text).unwrap(), hz, "{text}");
        }
        assert!(Freq::parse("37.5").is_err());
        assert!(Freq::parse("10 mhz").is_err());
        assert!(Freq::parse("fast").is_err());
    }

    #[test]
    fn json_freq_number_or_string() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{
                "system": {"omega_m": "37.5 GHz", "kappa_a": 33e6, "kappa_m": "15 MHz", "g": 375e6},
                "modulation": {"lambda1": 0.16, "lambda2": 0.152}
            }"#,
        )
        .unwrap();
        assert_eq!(cfg.system.omega_m.0, 37.5e9);
        assert_eq!(cfg.system.kappa_a.0, 33e6);
        assert_eq!(cfg.system.kappa_m.0, 15e6);
        assert_eq!(cfg.system.temperature, 0.05);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = serde_json::from_str::<RunConfig>(
            r#"{
                "system": {"omega_m": 37.5e9, "kappa_a": 33e6, "kappa_m": 15e6, "g": 375e6,
                           "kappa_x": 1.0},
                "modulation": {"lambda1": 0.16, "lambda2": 0.152}
            }"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("kappa_x"), "{err}");
        assert!(serde_json::from_str::<RunConfig>(
            r#"{
                "system": {"omega_m": 37.5e9, "kappa_a": 33e6, "kappa_m": 15e6, "g": 375e6},
                "modulation": {"lambda1": 0.16, "lambda2": 0.152},
                "extra_block": {}
            }"#,
        )
        .is_err());
    }

    #[test]
    fn default_config_resolves_to_operating_point() {
        let r = resolve(&RunConfig::default()).unwrap();
        assert_relative_eq!(r.params.g, TAU * 375e6, max_relative = 1e-15);
        assert_relative_eq!(r.couplings.g1 / r.params.g, -0.07529650200668624, max_relative = 1e-12);
        assert!(r.omega_a_defaulted && r.omega_l_defaulted);
        assert!(r.settings.matched());
        // advisory-free operating point, only the defaulting notes
        assert!(r.notes.iter().all(|n| n.contains("defaulted")));
    }

    #[test]
    fn resolved_config_is_idempotent() {
        let cfg = RunConfig::default();
        let r = resolve(&cfg).unwrap();
        let explicit = resolved_config(&cfg, &r, None);
        let r2 = resolve(&explicit).unwrap();
        assert_eq!(r.params, r2.params);
        assert_eq!(r.settings, r2.settings);
        let explicit2 = resolved_config(&explicit, &r2, None);
        assert_eq!(explicit, explicit2);
    }

    #[test]
    fn grid_generation() {
        let g = GridConfig {
            omega_min_over_kappa_m: 0.0,
            omega_max_over_kappa_m: 0.0,
            points: 1,
            spacing: Spacing::Linear,
        };
        assert_eq!(g.omegas(2.0).unwrap(), vec![0.0]);

        let g = GridConfig {
            omega_min_over_kappa_m: 1e-2,
            omega_max_over_kappa_m: 1e2,
            points: 5,
            spacing: Spacing::Log,
        };
        let w = g.omegas(1.0).unwrap();
        assert_eq!(w.len(), 5);
        assert_relative_eq!(w[0], 1e-2, max_relative = 1e-12);
        assert_relative_eq!(w[2], 1.0, max_relative = 1e-12);
        assert_relative_eq!(w[4], 1e2, max_relative = 1e-12);

        let bad = GridConfig { omega_min_over_kappa_m: 0.0, ..g };
        assert!(bad.omegas(1.0).is_err());
        let bad = GridConfig { points: 0, ..g };
        assert!(bad.omegas(1.0).is_err());
    }
}
