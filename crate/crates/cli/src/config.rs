//! TOML run configuration and its translation into core parameter records.

use std::path::{Path, PathBuf};

use psr_core::ensemble::{
    Line, LineManifold, RB87_D1_LINES, RB87_D1_WAVELENGTH, RB87_D2_LINES, RB87_D2_WAVELENGTH,
    RB87_MASS_AMU,
};
use psr_core::params::{
    thermal_doppler_width, EnsembleParams, UnitSystem, RB87_D1_GAMMA, RB87_D2_GAMMA,
};
use serde::Deserialize;

use crate::error::CliError;

pub const PRESETS: [(&str, &str); 3] = [
    (
        "hot-vapour-d2",
        include_str!("../presets/hot-vapour-d2.toml"),
    ),
    (
        "hot-vapour-d1",
        include_str!("../presets/hot-vapour-d1.toml"),
    ),
    (
        "cold-atom-kerr",
        include_str!("../presets/cold-atom-kerr.toml"),
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Transition {
    #[default]
    Rb87D2,
    Rb87D1,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub offset_ghz: f64,
    pub strength: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct AtomConfig {
    #[serde(default)]
    pub transition: Transition,
    /// Coherence decay rate γ in rad/s.
    pub gamma: Option<f64>,
    pub wavelength: Option<f64>,
    /// W/m².
    pub saturation_intensity: Option<f64>,
    pub transition_strength: Option<f64>,
    pub lines: Option<Vec<LineSpec>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    #[serde(default = "default_length")]
    pub length: f64,
    /// Atoms per m³.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    /// Overrides `n σ l`.
    pub cooperativity: Option<f64>,
    /// Doppler 1/e half-width in units of γ; thermal when absent.
    pub doppler_width: Option<f64>,
}

fn default_length() -> f64 {
    0.075
}
fn default_density() -> f64 {
    1e17
}
fn default_temperature() -> f64 {
    345.15
}

impl Default for CellConfig {
    fn default() -> Self {
        Self {
            length: default_length(),
            density: default_density(),
            temperature: default_temperature(),
            cooperativity: None,
            doppler_width: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    #[serde(default = "default_waist")]
    pub waist: f64,
    #[serde(default)]
    pub ellipticity: f64,
}

fn default_waist() -> f64 {
    425e-6
}

impl Default for BeamConfig {
    fn default() -> Self {
        Self {
            waist: default_waist(),
            ellipticity: 0.0,
        }
    }
}

/// Either an explicit list or an evenly spaced range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    List(Vec<f64>),
    Range {
        start: f64,
        stop: f64,
        points: usize,
    },
}

impl Axis {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let v = match self {
            Axis::List(v) => v.clone(),
            Axis::Range {
                start,
                stop,
                points,
            } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|k| start + (stop - start) * k as f64 / (*n - 1) as f64)
                    .collect(),
            },
        };
        if v.is_empty() {
            return Err(CliError::Config(format!("{field}: axis is empty")));
        }
        if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
            return Err(CliError::Config(format!("{field}: non-finite value {bad}")));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub detuning_ghz: Axis,
    pub power_mw: Axis,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Exactly one of `detuning_ghz` and `detuning` (units of γ).
    pub detuning_ghz: Option<Axis>,
    pub detuning: Option<Axis>,
    /// Exactly one of `power_mw` and `intensity` (units of γ²).
    pub power_mw: Option<Axis>,
    pub intensity: Option<Axis>,
    /// Sideband frequencies in units of γ.
    pub omega: Axis,
    #[serde(default = "default_thetas")]
    pub thetas: usize,
    #[serde(default)]
    pub frame: psr_core::fluctuations::Frame,
    #[serde(default)]
    pub drift: psr_core::fluctuations::DriftModel,
    #[serde(default = "yes")]
    pub langevin: bool,
    #[serde(default = "default_floor")]
    pub omega_floor: f64,
}

fn default_thetas() -> usize {
    36
}
fn default_floor() -> f64 {
    0.01
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitPoint {
    pub intensity: f64,
    pub detuning: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    pub points: Vec<LimitPoint>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatskoConfig {
    pub rotation_strength: Axis,
    #[serde(default = "zero_axis")]
    pub absorption: Axis,
}

fn zero_axis() -> Axis {
    Axis::List(vec![0.0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceFileKind {
    Transmission,
    Rotation,
    /// `detuning_ghz,v1,v2` polarimeter voltages, converted to `𝒢l` through
    /// the beam ellipticity.
    Polarimeter,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceFile {
    pub file: PathBuf,
    pub kind: TraceFileKind,
    pub power_mw: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub traces: Vec<TraceFile>,
    #[serde(default = "one")]
    pub density_scale: f64,
    #[serde(default)]
    pub offset_ghz: f64,
    #[serde(default = "one")]
    pub intensity_scale: f64,
    #[serde(default = "yes")]
    pub per_trace_intensity: bool,
    #[serde(default = "yes")]
    pub fit_strengths: bool,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
}

fn one() -> f64 {
    1.0
}
fn default_iterations() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarimetryConfig {
    pub input: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub atom: AtomConfig,
    #[serde(default)]
    pub cell: CellConfig,
    #[serde(default)]
    pub beam: BeamConfig,
    pub sweep: Option<SweepConfig>,
    pub noise: Option<NoiseConfig>,
    pub limits: Option<LimitsConfig>,
    pub matsko: Option<MatskoConfig>,
    pub fit: Option<FitConfig>,
    pub polarimetry: Option<PolarimetryConfig>,
}

/// Config text and the directory relative paths resolve against.
pub struct Source {
    pub text: String,
    pub base_dir: PathBuf,
    pub name: String,
}

/// A file path, or the name of a bundled preset when no such file exists.
pub fn load_source(arg: &Path) -> Result<Source, CliError> {
    if arg.exists() {
        let text = std::fs::read_to_string(arg)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", arg.display())))?;
        let base_dir = arg
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        return Ok(Source {
            text,
            base_dir,
            name: arg.display().to_string(),
        });
    }
    let key = arg.to_string_lossy();
    let key = key.strip_prefix("preset:").unwrap_or(&key);
    match PRESETS.iter().find(|(n, _)| *n == key) {
        Some((name, text)) => Ok(Source {
            text: text.to_string(),
            base_dir: PathBuf::from("."),
            name: format!("preset:{name}"),
        }),
        None => Err(CliError::Config(format!(
            "config {} not found (and not a preset: {})",
            arg.display(),
            PRESETS.iter().map(|p| p.0).collect::<Vec<_>>().join(", ")
        ))),
    }
}

pub fn parse(text: &str) -> Result<Config, CliError> {
    toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

/// Medium description shared by every command.
pub struct Medium {
    pub units: UnitSystem,
    pub manifold: LineManifold,
    pub ensemble: EnsembleParams,
}

fn require(field: &str, v: Option<f64>) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Config(format!("atom.{field} is required for a custom transition")))
}

pub fn medium(cfg: &Config) -> Result<Medium, CliError> {
    let a = &cfg.atom;
    let (gamma, wavelength, isat, default_lines): (f64, f64, f64, &[(f64, f64)]) =
        match a.transition {
            Transition::Rb87D2 => (RB87_D2_GAMMA, RB87_D2_WAVELENGTH, 16.69, &RB87_D2_LINES),
            Transition::Rb87D1 => (RB87_D1_GAMMA, RB87_D1_WAVELENGTH, 44.84, &RB87_D1_LINES),
            Transition::Custom => (
                require("gamma", a.gamma)?,
                require("wavelength", a.wavelength)?,
                require("saturation_intensity", a.saturation_intensity)?,
                &[(0.0, 1.0)],
            ),
        };
    let units = UnitSystem {
        gamma: a.gamma.unwrap_or(gamma),
        beam_waist: cfg.beam.waist,
        saturation_intensity: a.saturation_intensity.unwrap_or(isat),
        wavelength: a.wavelength.unwrap_or(wavelength),
        transition_strength: a.transition_strength.unwrap_or(1.0),
    };
    for (field, v) in [
        ("atom.gamma", units.gamma),
        ("atom.wavelength", units.wavelength),
        ("atom.saturation_intensity", units.saturation_intensity),
        ("atom.transition_strength", units.transition_strength),
        ("beam.waist", units.beam_waist),
        ("cell.length", cfg.cell.length),
        ("cell.density", cfg.cell.density),
        ("cell.temperature", cfg.cell.temperature),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!(
                "{field} must be positive, got {v}"
            )));
        }
    }
    let lines: Vec<(f64, f64)> = match &a.lines {
        Some(l) => l.iter().map(|l| (l.offset_ghz, l.strength)).collect(),
        None => default_lines.to_vec(),
    };
    let width = match cfg.cell.doppler_width {
        Some(w) => w,
        None => thermal_doppler_width(
            cfg.cell.temperature,
            RB87_MASS_AMU,
            units.wavelength,
            units.gamma,
        ),
    };
    let manifold = LineManifold::new(
        lines
            .iter()
            .map(|&(c, s)| Line {
                center: units.detuning_from_ghz(c),
                strength: s,
            })
            .collect(),
        width,
    )
    .map_err(|e| CliError::Config(format!("atom.lines / cell.doppler_width: {e}")))?;
    let cooperativity = cfg
        .cell
        .cooperativity
        .unwrap_or(cfg.cell.density * units.cross_section() * cfg.cell.length);
    let ensemble = EnsembleParams::from_cooperativity(
        units.gamma,
        cooperativity,
        cfg.cell.length,
        cfg.cell.density,
        cfg.cell.temperature,
        units.beam_area(),
    )
    .map_err(|e| CliError::Config(format!("cell: {e}")))?;
    Ok(Medium {
        units,
        manifold,
        ensemble,
    })
}

pub fn section<'a, T>(s: &'a Option<T>, name: &str) -> Result<&'a T, CliError> {
    s.as_ref()
        .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}
