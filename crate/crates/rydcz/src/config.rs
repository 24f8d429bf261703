//! TOML run configuration.
//!
//! Every frequency is a plain frequency in MHz (converted to `2π·f` rad/μs
//! internally) and every time is in μs. Missing keys take their defaults, so
//! an empty file is a complete configuration.

use std::fmt;
use std::path::Path;

use rydcz_core::metrics::{linspace, BenchmarkCase, CellSetup, SweepSpec};
use rydcz_core::tomography::TargetConvention;
use rydcz_core::units::mhz_to_angular;
use rydcz_core::{
    DetuningShape, DriveMode, Method, ModelParams, PropagationConfig, PulseParams, PulseSchedule,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Serde adapters for core enums, written as their kebab-case names.
macro_rules! named {
    ($module:ident, $ty:ty, $what:literal, $names:expr) => {
        mod $module {
            use super::*;

            pub fn serialize<S: serde::Serializer>(v: &$ty, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(v.name())
            }

            pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<$ty, D::Error> {
                let s = String::deserialize(d)?;
                <$ty>::parse(&s).ok_or_else(|| {
                    serde::de::Error::custom(format!(
                        concat!("unknown ", $what, " {:?}, expected one of {}"),
                        s,
                        $names
                    ))
                })
            }
        }
    };
}

named!(drive_mode, DriveMode, "drive mode", "adiabatic, exact-cd, ecd-only, separable");
named!(method, Method, "method", "midpoint, fourth-order");
named!(shape, DetuningShape, "detuning shape", "phase-sweep, full-sine");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for the random states drawn by `verify`.
    pub seed: u64,
    pub pulses: PulseSection,
    pub model: ModelSection,
    pub propagation: PropagationSection,
    pub sweep: SweepSection,
    pub qpt: QptSection,
    pub qec: QecSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 2024,
            pulses: PulseSection::default(),
            model: ModelSection::default(),
            propagation: PropagationSection::default(),
            sweep: SweepSection::default(),
            qpt: QptSection::default(),
            qec: QecSection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSection {
    pub omega_max_mhz: f64,
    pub delta_max_mhz: f64,
    pub total_time_us: f64,
    pub width_us: f64,
    pub phase2_fraction: f64,
    /// Duration at which `omega_max_mhz`, `delta_max_mhz` and `width_us`
    /// apply; other durations rescale them.
    pub reference_time_us: f64,
    #[serde(with = "shape")]
    pub detuning_shape: DetuningShape,
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            omega_max_mhz: 17.0,
            delta_max_mhz: 23.0,
            total_time_us: 0.594,
            width_us: 0.0945,
            phase2_fraction: 0.1,
            reference_time_us: 0.594,
            detuning_shape: DetuningShape::PhaseSweep,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    #[serde(with = "drive_mode")]
    pub drive_mode: DriveMode,
    pub blockade_mhz: f64,
    /// ω/2π of the oscillating fields; defaults per drive mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ecd_frequency_mhz: Option<f64>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            drive_mode: DriveMode::EcdOnly,
            blockade_mhz: 500.0,
            ecd_frequency_mhz: None,
        }
    }
}

impl ModelSection {
    pub fn ecd_frequency_mhz(&self) -> f64 {
        self.ecd_frequency_mhz
            .unwrap_or_else(|| self.drive_mode.default_ecd_frequency_mhz())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PropagationSection {
    #[serde(with = "method")]
    pub method: Method,
    pub steps_per_fastest_period: usize,
    pub convergence_target: f64,
    pub max_halvings: u32,
}

impl Default for PropagationSection {
    fn default() -> Self {
        PropagationSection {
            method: Method::FourthOrder,
            steps_per_fastest_period: 64,
            convergence_target: 1e-9,
            max_halvings: 12,
        }
    }
}

/// `points` evenly spaced values from `min` to `max` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.min, self.max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub total_time_us: Axis,
    pub blockade_mhz: Axis,
    /// `"bell"` or a qubit basis label such as `"11"`.
    pub case: String,
    /// Overrides the propagation target for sweep cells.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence_target: Option<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            total_time_us: Axis {
                min: 0.15,
                max: 0.7,
                points: 40,
            },
            blockade_mhz: Axis {
                min: 10.0,
                max: 500.0,
                points: 40,
            },
            case: "bell".into(),
            convergence_target: None,
        }
    }
}

/// Which target χ the simulated gate is compared with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionChoice {
    /// Whichever of the two conventions gives the smaller deviation.
    #[default]
    Best,
    Native,
    Canonical,
}

impl ConventionChoice {
    pub fn fixed(self) -> Option<TargetConvention> {
        match self {
            ConventionChoice::Best => None,
            ConventionChoice::Native => Some(TargetConvention::Native),
            ConventionChoice::Canonical => Some(TargetConvention::Canonical),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QptSection {
    pub convention: ConventionChoice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QecSection {
    /// ω/2π of the gate used in the code.
    pub ecd_frequency_mhz: f64,
    /// Also run the code with the adiabatic gate of the same duration.
    pub adiabatic_baseline: bool,
}

impl Default for QecSection {
    fn default() -> Self {
        QecSection {
            ecd_frequency_mhz: 350.0,
            adiabatic_baseline: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
    pub pulse_samples: usize,
    pub trajectory_samples: usize,
    pub hamiltonian_samples: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            directory: "out".into(),
            pulse_samples: 2000,
            trajectory_samples: 400,
            hamiltonian_samples: 9,
        }
    }
}

/// A configuration problem, anchored to a line of the source when known.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// File the configuration came from, if any.
    pub file: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.file, self.line) {
            (Some(file), Some(line)) => write!(f, "{file}:{line}: {}", self.message),
            (Some(file), None) => write!(f, "{file}: {}", self.message),
            (None, Some(line)) => write!(f, "line {line}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_toml(source: &str) -> Result<Self, ConfigError> {
        let config: RunConfig = toml::from_str(source).map_err(|e| ConfigError {
            file: None,
            line: e.span().map(|s| line_of(source, s.start)),
            message: e.message().to_string(),
        })?;
        config.validate().map_err(|(key, message)| ConfigError {
            file: None,
            line: locate_key(source, key),
            message,
        })?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical serialization, lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Checks everything the core types check, plus the CLI-only fields.
    /// Errors carry the dotted key they refer to.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        self.pulse_params().validate().map_err(|e| {
            let key = match core_field(&e) {
                Some("omega_max") => "pulses.omega_max_mhz",
                Some("delta_max") => "pulses.delta_max_mhz",
                Some("total_time") => "pulses.total_time_us",
                Some("width") => "pulses.width_us",
                Some("reference_time") => "pulses.reference_time_us",
                Some("phase2_fraction") => "pulses.phase2_fraction",
                _ => "pulses",
            };
            (key, e.to_string())
        })?;
        if !(self.model.blockade_mhz.is_finite() && self.model.blockade_mhz > 0.0) {
            return Err((
                "model.blockade_mhz",
                format!("must be positive, got {}", self.model.blockade_mhz),
            ));
        }
        for (key, value) in [
            ("model.ecd_frequency_mhz", self.model.ecd_frequency_mhz),
            ("qec.ecd_frequency_mhz", Some(self.qec.ecd_frequency_mhz)),
        ] {
            if let Some(f) = value {
                if !(f.is_finite() && f > 0.0) {
                    return Err((key, format!("must be positive, got {f}")));
                }
            }
        }
        self.propagation_config().validate().map_err(|e| {
            let key = match core_field(&e) {
                Some("steps_per_fastest_period") => "propagation.steps_per_fastest_period",
                Some("convergence_target") => "propagation.convergence_target",
                _ => "propagation",
            };
            (key, e.to_string())
        })?;
        if let Some(t) = self.sweep.convergence_target {
            if !(t.is_finite() && t > 0.0) {
                return Err(("sweep.convergence_target", format!("must be positive, got {t}")));
            }
        }
        for (key, axis) in [
            ("sweep.total_time_us", &self.sweep.total_time_us),
            ("sweep.blockade_mhz", &self.sweep.blockade_mhz),
        ] {
            if axis.points == 0 || !(axis.min > 0.0 && axis.max >= axis.min && axis.max.is_finite()) {
                return Err((key, "needs 0 < min <= max and at least one point".into()));
            }
        }
        BenchmarkCase::parse(&self.sweep.case).map_err(|e| ("sweep.case", e.to_string()))?;
        if self.output.pulse_samples < 2 {
            return Err(("output.pulse_samples", "must be at least 2".into()));
        }
        if self.output.hamiltonian_samples == 0 {
            return Err(("output.hamiltonian_samples", "must be at least 1".into()));
        }
        Ok(())
    }

    pub fn pulse_params(&self) -> PulseParams {
        let p = &self.pulses;
        PulseParams {
            omega_max: mhz_to_angular(p.omega_max_mhz),
            delta_max: mhz_to_angular(p.delta_max_mhz),
            total_time: p.total_time_us,
            width: p.width_us,
            phase2_fraction: p.phase2_fraction,
            reference_time: p.reference_time_us,
        }
    }

    pub fn schedule(&self) -> rydcz_core::Result<PulseSchedule> {
        PulseSchedule::new(self.pulse_params(), self.pulses.detuning_shape)
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams::from_mhz(
            self.model.blockade_mhz,
            self.model.ecd_frequency_mhz(),
            self.model.drive_mode,
        )
    }

    pub fn propagation_config(&self) -> PropagationConfig {
        let p = &self.propagation;
        PropagationConfig {
            steps_per_fastest_period: p.steps_per_fastest_period,
            method: p.method,
            convergence_target: p.convergence_target,
            max_halvings: p.max_halvings,
            trajectory_samples: 0,
        }
    }

    pub fn benchmark_case(&self) -> rydcz_core::Result<BenchmarkCase> {
        BenchmarkCase::parse(&self.sweep.case)
    }

    /// Sweep axes with blockades in rad/μs.
    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            total_times: self.sweep.total_time_us.values(),
            blockades: self
                .sweep
                .blockade_mhz
                .values()
                .into_iter()
                .map(mhz_to_angular)
                .collect(),
        }
    }

    pub fn cell_setup(&self) -> rydcz_core::Result<CellSetup> {
        let mut config = self.propagation_config();
        if let Some(t) = self.sweep.convergence_target {
            config.convergence_target = t;
        }
        Ok(CellSetup {
            pulses: self.pulse_params(),
            shape: self.pulses.detuning_shape,
            model: self.model_params(),
            config,
            case: self.benchmark_case()?,
        })
    }

    pub fn qec_model(&self) -> ModelParams {
        ModelParams::from_mhz(
            self.model.blockade_mhz,
            self.qec.ecd_frequency_mhz,
            self.model.drive_mode,
        )
    }
}

/// Reads and validates a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let file = Some(path.display().to_string());
    let source = std::fs::read_to_string(path).map_err(|e| ConfigError {
        file: file.clone(),
        line: None,
        message: format!("cannot read: {e}"),
    })?;
    RunConfig::from_toml(&source).map_err(|e| ConfigError { file, ..e })
}

fn core_field(e: &rydcz_core::Error) -> Option<&'static str> {
    match e {
        rydcz_core::Error::InvalidParameter { name, .. } => Some(name),
        _ => None,
    }
}

fn line_of(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

/// 1-based line of `key` (dotted, e.g. `"model.blockade_mhz"`) or of its
/// section header.
fn locate_key(source: &str, key: &str) -> Option<usize> {
    let (section, leaf) = match key.rsplit_once('.') {
        Some((s, l)) => (Some(s), l),
        None => (None, key),
    };
    let mut current: Option<&str> = None;
    let mut header = None;
    for (i, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = Some(name.trim());
            if current == section.or(Some(leaf)) {
                header = Some(i + 1);
            }
            continue;
        }
        let Some((k, _)) = line.split_once('=') else {
            continue;
        };
        let k = k.trim();
        let hit = match (section, current) {
            (Some(s), Some(c)) => s == c && k == leaf,
            (Some(s), None) => k == format!("{s}.{leaf}"),
            (None, None) => k == leaf,
            (None, Some(_)) => false,
        };
        if hit {
            return Some(i + 1);
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.pulses.omega_max_mhz, 17.0);
        assert_eq!(c.pulses.delta_max_mhz, 23.0);
        assert_eq!(c.pulses.total_time_us, 0.594);
        assert_eq!(c.pulses.width_us, 0.0945);
        assert_eq!(c.pulses.phase2_fraction, 0.1);
    }

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.model.ecd_frequency_mhz = Some(1000.0);
        c.model.drive_mode = DriveMode::Separable;
        c.pulses.detuning_shape = DetuningShape::FullSine;
        c.qpt.convention = ConventionChoice::Canonical;
        c.sweep.convergence_target = Some(1e-7);
        let text = c.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_toml(), text);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn frequencies_are_plain_mhz() {
        let c = RunConfig::from_toml("[model]\nblockade_mhz = 100\n").unwrap();
        assert!((c.model_params().blockade - 2.0 * std::f64::consts::PI * 100.0).abs() < 1e-12);
        // ecd-only default ω/2π
        assert_eq!(c.model.ecd_frequency_mhz(), 300.0);
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let e = RunConfig::from_toml("seed = 1\n[model]\nblokade_mhz = 3\n").unwrap_err();
        assert_eq!(e.line, Some(3), "{e}");
        assert!(e.message.contains("blokade_mhz"));
    }

    #[test]
    fn bad_enum_value_names_the_choices() {
        let e = RunConfig::from_toml("[model]\ndrive_mode = \"fast\"\n").unwrap_err();
        assert_eq!(e.line, Some(2));
        assert!(e.message.contains("ecd-only"), "{e}");
    }

    #[test]
    fn validation_errors_point_at_the_key() {
        let src = "[pulses]\ntotal_time_us = 0.5\n\n[model]\nblockade_mhz = -4\n";
        let e = RunConfig::from_toml(src).unwrap_err();
        assert_eq!(e.line, Some(5), "{e}");
        let e = RunConfig::from_toml("[sweep]\ncase = \"0r\"\n").unwrap_err();
        assert_eq!(e.line, Some(2), "{e}");
        let e = RunConfig::from_toml("pulses.phase2_fraction = 1.5\n").unwrap_err();
        assert_eq!(e.line, Some(1), "{e}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
