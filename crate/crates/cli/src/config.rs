//! Run configuration: built-in defaults, overlaid by a JSON file, overlaid by
//! `--set` overrides and dedicated flags, then deserialized and validated.

use std::f64::consts::PI;
use std::path::PathBuf;

use rydberg_core::dynamics::{energy, kepler_period, principal_action, PhasePoint};
use rydberg_core::ensemble::{EnsembleSpec, ScanSettings};
use rydberg_core::fields::{DrivePulse, PulseKind};
use rydberg_core::thresholds::ChaosLaw;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Trajectory,
    Scan,
    Compare,
    ScalingCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Drive pulse as written in a config. A half-cycle pulse may omit `omega`,
/// which then follows from its duration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub kind: PulseKind,
    pub amplitude: f64,
    pub omega: Option<f64>,
    pub phi: f64,
    pub duration: f64,
    pub ramp: f64,
}

impl PulseConfig {
    pub fn to_pulse(self) -> Result<DrivePulse, CliError> {
        let omega = match (self.kind, self.omega) {
            (PulseKind::HalfCycle, None) => PI / self.duration,
            (PulseKind::Static, None) => 0.0,
            (PulseKind::Sinusoidal, None) => return Err(CliError::config("pulse.omega", "a sinusoid needs omega")),
            (_, Some(w)) => w,
        };
        let pulse = DrivePulse {
            kind: self.kind,
            amplitude: self.amplitude,
            omega,
            phi: self.phi,
            duration: self.duration,
            ramp: self.ramp,
        };
        pulse.validate().map_err(|e| CliError::core("pulse", e))?;
        Ok(pulse)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub x0: f64,
    pub p0: f64,
    /// Defaults to the end of the pulse plus one Kepler period of the initial state.
    pub t_end: Option<f64>,
    pub tol: f64,
    /// Accepted-step budget; exhausting it is a numerical failure.
    pub max_steps: u64,
}

impl TrajectoryConfig {
    pub fn initial(&self) -> Result<PhasePoint, CliError> {
        let point = PhasePoint::new(self.x0, self.p0);
        energy(&point).map_err(|e| CliError::core("trajectory", e))?;
        Ok(point)
    }

    pub fn resolved_t_end(&self, pulse: &DrivePulse) -> Result<f64, CliError> {
        Ok(match self.t_end {
            Some(t) => t,
            None => {
                let e0 = energy(&self.initial()?).map_err(|e| CliError::core("trajectory", e))?;
                pulse.duration + principal_action(e0).map_or(0.0, kepler_period)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub kind: PulseKind,
    pub settings: ScanSettings,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    pub chaos_mw: ChaosLaw,
}

/// Random pairs of physical setups sharing `(s0, F_s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingCheckConfig {
    pub pairs: usize,
    pub periods: f64,
    pub tol: f64,
    /// Largest acceptable scaled-trajectory deviation.
    pub threshold: f64,
    pub s0_range: [f64; 2],
    pub fs_range: [f64; 2],
    pub n0_range: [f64; 2],
    /// Relative error deliberately put on the second setup's `F_s`; zero in a real check.
    pub fs_mismatch: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    pub pulse: PulseConfig,
    pub ensemble: EnsembleSpec,
    pub s0_grid: Vec<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub trajectory: TrajectoryConfig,
    pub scan: ScanConfig,
    pub compare: CompareConfig,
    pub scaling_check: ScalingCheckConfig,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            pulse: PulseConfig {
                kind: PulseKind::HalfCycle,
                amplitude: 0.0,
                omega: None,
                phi: 0.0,
                duration: 2.0 * PI,
                ramp: 0.0,
            },
            ensemble: EnsembleSpec::default(),
            s0_grid: vec![1.0, 2.0, 4.0, 8.0],
            output_path: None,
            format: if command == Command::ScalingCheck { Format::Json } else { Format::Csv },
            trajectory: TrajectoryConfig {
                x0: 2.0,
                p0: 0.0,
                t_end: None,
                tol: 1e-10,
                max_steps: 10_000_000,
            },
            scan: ScanConfig {
                kind: PulseKind::HalfCycle,
                settings: ScanSettings::default(),
            },
            compare: CompareConfig {
                chaos_mw: ChaosLaw::default(),
            },
            scaling_check: ScalingCheckConfig {
                pairs: 20,
                periods: 10.0,
                tol: 1e-11,
                threshold: 1e-6,
                s0_range: [0.3, 3.0],
                fs_range: [0.0, 0.15],
                n0_range: [5.0, 60.0],
                fs_mismatch: 0.0,
            },
        }
    }

    /// The config as embedded in outputs: everything that determines the
    /// result, without the output location.
    pub fn provenance(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Value::Object(map) = &mut value {
            map.remove("output_path");
        }
        value
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let core = |section: &'static str| move |e| CliError::core(section, e);
        self.ensemble.validate().map_err(core("ensemble"))?;
        match self.command {
            Command::Trajectory => {
                let pulse = self.pulse.to_pulse()?;
                let t = &self.trajectory;
                if !(1e-14..=1e-6).contains(&t.tol) {
                    return Err(CliError::config("trajectory.tol", format!("must lie in [1e-14, 1e-6], got {}", t.tol)));
                }
                t.initial()?;
                let t_end = t.resolved_t_end(&pulse)?;
                if !(t_end >= pulse.duration) || !t_end.is_finite() {
                    return Err(CliError::config(
                        "trajectory.t_end",
                        format!("must be finite and not before the pulse ends at {}, got {t_end}", pulse.duration),
                    ));
                }
            }
            Command::Scan | Command::Compare => {
                if self.s0_grid.is_empty() {
                    return Err(CliError::config("s0_grid", "needs at least one relative frequency"));
                }
                if let Some(bad) = self.s0_grid.iter().find(|s| !(**s > 0.0) || !s.is_finite()) {
                    return Err(CliError::config("s0_grid", format!("entries must be finite and > 0, got {bad}")));
                }
                self.scan.settings.validate().map_err(core("scan.settings"))?;
                self.compare.chaos_mw.validate().map_err(core("compare.chaos_mw"))?;
            }
            Command::ScalingCheck => {
                let c = &self.scaling_check;
                if c.pairs == 0 {
                    return Err(CliError::config("scaling_check.pairs", "needs at least one pair"));
                }
                if !(c.periods > 0.0) || !c.periods.is_finite() {
                    return Err(CliError::config("scaling_check.periods", format!("must be > 0, got {}", c.periods)));
                }
                if !(1e-14..=1e-6).contains(&c.tol) {
                    return Err(CliError::config("scaling_check.tol", format!("must lie in [1e-14, 1e-6], got {}", c.tol)));
                }
                if !(c.threshold > 0.0) {
                    return Err(CliError::config("scaling_check.threshold", "must be > 0"));
                }
                for (name, [lo, hi], min) in [
                    ("scaling_check.s0_range", c.s0_range, f64::MIN_POSITIVE),
                    ("scaling_check.fs_range", c.fs_range, 0.0),
                    ("scaling_check.n0_range", c.n0_range, f64::MIN_POSITIVE),
                ] {
                    if !(lo >= min && hi >= lo && hi.is_finite()) {
                        return Err(CliError::config(name, format!("need {min} <= lo <= hi < inf, got [{lo}, {hi}]")));
                    }
                }
                if !c.fs_mismatch.is_finite() || c.fs_mismatch <= -1.0 {
                    return Err(CliError::config("scaling_check.fs_mismatch", "must be finite and > -1"));
                }
            }
        }
        Ok(())
    }
}

/// Overrides applied on top of the defaults and the config file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub config_file: Option<PathBuf>,
    pub set: Vec<String>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(base), Value::Object(overlay)) => {
            for (key, value) in overlay {
                match base.get_mut(&key) {
                    Some(slot) => merge(slot, value),
                    None => {
                        base.insert(key, value);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut node = root;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        if key.is_empty() {
            return Err(CliError::config(path, "empty key in dotted path"));
        }
        let map = match node {
            Value::Object(map) => map,
            _ => return Err(CliError::config(path, format!("`{key}` is not inside an object"))),
        };
        if keys.peek().is_none() {
            map.insert(key.to_owned(), value);
            return Ok(());
        }
        node = map.entry(key.to_owned()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Parses `key=value`; the value is JSON when it parses as JSON, otherwise a string.
fn parse_assignment(raw: &str) -> Result<(&str, Value), CliError> {
    let (key, text) = raw
        .split_once('=')
        .ok_or_else(|| CliError::config("--set", format!("expected key=value, got `{raw}`")))?;
    let value = serde_json::from_str(text).unwrap_or_else(|_| Value::String(text.to_owned()));
    Ok((key.trim(), value))
}

pub fn resolve(command: Command, overrides: &Overrides) -> Result<RunConfig, CliError> {
    let mut value = serde_json::to_value(RunConfig::defaults(command)).expect("defaults serialize");
    if let Some(path) = &overrides.config_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        let file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        if !file.is_object() {
            return Err(CliError::config("--config", "top level must be a JSON object"));
        }
        merge(&mut value, file);
    }
    for raw in &overrides.set {
        let (key, v) = parse_assignment(raw)?;
        set_path(&mut value, key, v)?;
    }
    if let Some(seed) = overrides.seed {
        set_path(&mut value, "ensemble.seed", seed.into())?;
    }
    if let Some(out) = &overrides.output {
        set_path(&mut value, "output_path", Value::String(out.display().to_string()))?;
    }
    if let Some(format) = overrides.format {
        set_path(&mut value, "format", serde_json::to_value(format).expect("format serializes"))?;
    }

    let config: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::config(&path, e.into_inner().to_string())
    })?;
    if config.command != command {
        return Err(CliError::config(
            "command",
            format!("config names {:?} but {:?} was invoked", config.command, command),
        ));
    }
    config.validate()?;
    Ok(config)
}
