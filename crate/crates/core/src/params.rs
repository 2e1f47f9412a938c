//! Parameter records and the dimensionless unit system.
//!
//! Every rate inside the simulator is expressed in units of the optical
//! coherence decay rate γ (so γ = 1), and positions along the cell in units of
//! the cell length. Physical inputs are converted once, by
//! [`normalize_units`], and never re-derived elsewhere.
//!
//! Laser power is mapped onto the drive intensity `I_x = |g<a_x>|²` through
//!
//! ```text
//! I_x / γ² = I_peak / I_sat,      I_peak = 2 P / (π w²)
//! ```
//!
//! i.e. the on-resonance saturation parameter equals the laboratory peak
//! intensity in units of the saturation intensity. This is an assumption of the
//! model (the transverse profile is not resolved); fits treat the resulting
//! scale as a free parameter.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const BOLTZMANN: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Relative tolerance of the `C = g²Nl/(γc)` consistency check.
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("`{field}` must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("`{field}` must be non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("`{field}` must be finite, got {value}")]
    NotFinite { field: &'static str, value: f64 },
    #[error("`{field}` = {value} lies outside {range}")]
    OutOfRange {
        field: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("cooperativity {stored} disagrees with g²Nl/(γc) = {derived}")]
    Inconsistent { stored: f64, derived: f64 },
    #[error("linear dephasing is undefined at zero detuning")]
    ZeroDetuning,
    #[error("`{field}` must not be empty")]
    Empty { field: &'static str },
    #[error("`{field}` must be strictly increasing (violated at index {index})")]
    NotIncreasing { field: &'static str, index: usize },
}

pub(crate) fn finite(field: &'static str, value: f64) -> Result<f64, ParamError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ParamError::NotFinite { field, value })
    }
}

pub(crate) fn positive(field: &'static str, value: f64) -> Result<f64, ParamError> {
    finite(field, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(ParamError::NonPositive { field, value })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<f64, ParamError> {
    finite(field, value)?;
    if value >= 0.0 {
        Ok(value)
    } else {
        Err(ParamError::Negative { field, value })
    }
}

/// Checks that `values` is non-empty and strictly increasing.
pub fn strictly_increasing(field: &'static str, values: &[f64]) -> Result<(), ParamError> {
    if values.is_empty() {
        return Err(ParamError::Empty { field });
    }
    for (i, v) in values.iter().enumerate() {
        finite(field, *v)?;
        if i > 0 && *v <= values[i - 1] {
            return Err(ParamError::NotIncreasing { field, index: i });
        }
    }
    Ok(())
}

/// The atomic medium.
///
/// `gamma` and `coupling` are angular frequencies (rad/s), `cell_length` in
/// metres, `density` in atoms/m³, `temperature` in kelvin. The cooperativity
/// `C = g²Nl/(γc)` is the only combination the dimensionless dynamics see.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    gamma: f64,
    cooperativity: f64,
    cell_length: f64,
    density: f64,
    temperature: f64,
    coupling: f64,
    atom_number: f64,
}

/// Rb-87 D2 coherence decay rate, half the natural linewidth (rad/s).
pub const RB87_D2_GAMMA: f64 = 2.0 * PI * 3.0333e6;
/// Rb-87 D1 coherence decay rate (rad/s).
pub const RB87_D1_GAMMA: f64 = 2.0 * PI * 2.8728e6;

impl EnsembleParams {
    /// Builds the record from the microscopic coupling; `C` is derived.
    pub fn new(
        gamma: f64,
        cell_length: f64,
        density: f64,
        temperature: f64,
        coupling: f64,
        atom_number: f64,
    ) -> Result<Self, ParamError> {
        positive("gamma", gamma)?;
        positive("cell_length", cell_length)?;
        non_negative("density", density)?;
        positive("temperature", temperature)?;
        non_negative("coupling", coupling)?;
        non_negative("atom_number", atom_number)?;
        let cooperativity =
            coupling * coupling * atom_number * cell_length / (gamma * SPEED_OF_LIGHT);
        Ok(Self {
            gamma,
            cooperativity,
            cell_length,
            density,
            temperature,
            coupling,
            atom_number,
        })
    }

    /// Builds the record from a target cooperativity. The atom number is the
    /// number of atoms inside the beam volume `beam_area · l` and `g` is
    /// chosen so that `C = g²Nl/(γc)` holds.
    pub fn from_cooperativity(
        gamma: f64,
        cooperativity: f64,
        cell_length: f64,
        density: f64,
        temperature: f64,
        beam_area: f64,
    ) -> Result<Self, ParamError> {
        positive("gamma", gamma)?;
        non_negative("cooperativity", cooperativity)?;
        positive("cell_length", cell_length)?;
        positive("density", density)?;
        positive("temperature", temperature)?;
        positive("beam_area", beam_area)?;
        let atom_number = density * beam_area * cell_length;
        let coupling =
            (cooperativity * gamma * SPEED_OF_LIGHT / (atom_number * cell_length)).sqrt();
        let ens = Self {
            gamma,
            cooperativity,
            cell_length,
            density,
            temperature,
            coupling,
            atom_number,
        };
        ens.check_consistency()?;
        Ok(ens)
    }

    /// A hot Rb-87 cell (75 mm, 10¹¹ cm⁻³, 72 °C, 425 µm waist) with the
    /// cooperativity overridden. Convenient for dimensionless work.
    pub fn with_cooperativity(cooperativity: f64) -> Result<Self, ParamError> {
        let waist = 425e-6;
        Self::from_cooperativity(
            RB87_D2_GAMMA,
            cooperativity,
            0.075,
            1e17,
            345.15,
            PI * waist * waist / 2.0,
        )
    }

    pub fn check_consistency(&self) -> Result<(), ParamError> {
        let derived = self.coupling * self.coupling * self.atom_number * self.cell_length
            / (self.gamma * SPEED_OF_LIGHT);
        let scale = self.cooperativity.abs().max(derived.abs());
        if scale == 0.0 || (derived - self.cooperativity).abs() <= CONSISTENCY_TOL * scale {
            Ok(())
        } else {
            Err(ParamError::Inconsistent {
                stored: self.cooperativity,
                derived,
            })
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn cooperativity(&self) -> f64 {
        self.cooperativity
    }
    pub fn cell_length(&self) -> f64 {
        self.cell_length
    }
    pub fn density(&self) -> f64 {
        self.density
    }
    pub fn temperature(&self) -> f64 {
        self.temperature
    }
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
    pub fn atom_number(&self) -> f64 {
        self.atom_number
    }

    /// Free-space transit time through the cell in units of 1/γ, i.e. the
    /// `l/c` of the `-iωl/c` propagation phase.
    pub fn transit_time(&self) -> f64 {
        self.gamma * self.cell_length / SPEED_OF_LIGHT
    }

    /// Same medium with the density (and hence `N` and `C`) scaled.
    pub fn scaled_density(&self, factor: f64) -> Result<Self, ParamError> {
        positive("density_scale", factor)?;
        Self::new(
            self.gamma,
            self.cell_length,
            self.density * factor,
            self.temperature,
            self.coupling,
            self.atom_number * factor,
        )
    }
}

/// The driving field, in units where γ = 1.
///
/// The saturation parameter and the linear dephasing are derived on demand so
/// they can never go stale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    intensity: f64,
    detuning: f64,
    ellipticity: f64,
}

impl DriveParams {
    pub fn new(intensity: f64, detuning: f64, ellipticity: f64) -> Result<Self, ParamError> {
        non_negative("intensity", intensity)?;
        finite("detuning", detuning)?;
        finite("ellipticity", ellipticity)?;
        if ellipticity.abs() >= PI / 4.0 {
            return Err(ParamError::OutOfRange {
                field: "ellipticity",
                value: ellipticity,
                range: "(-π/4, π/4)",
            });
        }
        Ok(Self {
            intensity,
            detuning,
            ellipticity,
        })
    }

    /// Linearly polarized drive.
    pub fn linear(intensity: f64, detuning: f64) -> Result<Self, ParamError> {
        Self::new(intensity, detuning, 0.0)
    }

    pub fn intensity(&self) -> f64 {
        self.intensity
    }
    pub fn detuning(&self) -> f64 {
        self.detuning
    }
    pub fn ellipticity(&self) -> f64 {
        self.ellipticity
    }

    /// `s = I_x / (γ² + Δ²)`.
    pub fn saturation(&self) -> f64 {
        self.intensity / (1.0 + self.detuning * self.detuning)
    }

    /// `δ₀ = Cγ / (2Δ)`.
    pub fn linear_dephasing(&self, cooperativity: f64) -> Result<f64, ParamError> {
        if self.detuning == 0.0 {
            return Err(ParamError::ZeroDetuning);
        }
        Ok(cooperativity / (2.0 * self.detuning))
    }

    pub fn with_detuning(&self, detuning: f64) -> Result<Self, ParamError> {
        Self::new(self.intensity, detuning, self.ellipticity)
    }

    pub fn with_intensity(&self, intensity: f64) -> Result<Self, ParamError> {
        Self::new(intensity, self.detuning, self.ellipticity)
    }

    /// Rabi amplitudes `g<a_±>` of the two circular components.
    ///
    /// The x-polarized part splits evenly, `|Ω₊|² + |Ω₋|² = I_x`, with
    /// `Ω₋ = -Ω₊` so that the orthogonal `y` mode
    /// `a_y = -i(a₊ + a₋)/√2` is empty. A nonzero ellipticity ε shifts power
    /// between the components: `Ω± ∝ cos ε ± sin ε`.
    pub fn circular_amplitudes(&self) -> (f64, f64) {
        let half = (self.intensity / 2.0).sqrt();
        let (s, c) = self.ellipticity.sin_cos();
        (half * (c + s), -half * (c - s))
    }
}

/// Sideband analysis frequencies ω (units of γ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandGrid {
    frequencies: Vec<f64>,
}

impl SidebandGrid {
    pub fn new(frequencies: Vec<f64>) -> Result<Self, ParamError> {
        strictly_increasing("frequencies", &frequencies)?;
        if let Some(&f) = frequencies.first() {
            non_negative("frequencies", f)?;
        }
        Ok(Self { frequencies })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }
}

/// Laboratory parameters prior to normalization. Rates are angular (rad/s).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    pub gamma: f64,
    pub detuning: f64,
    pub power_mw: f64,
    pub beam_waist: f64,
    /// W/m² (1 mW/cm² = 10 W/m²).
    pub saturation_intensity: f64,
    pub cell_length: f64,
    pub density: f64,
    pub temperature: f64,
    pub wavelength: f64,
    /// Multiplies the two-level resonant cross-section `3λ²/2π`.
    pub transition_strength: f64,
    pub ellipticity: f64,
    /// Overrides `n σ l` when set.
    pub cooperativity: Option<f64>,
}

/// Conversion factors between laboratory and normalized units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub gamma: f64,
    pub beam_waist: f64,
    pub saturation_intensity: f64,
    pub wavelength: f64,
    pub transition_strength: f64,
}

impl UnitSystem {
    pub fn beam_area(&self) -> f64 {
        PI * self.beam_waist * self.beam_waist / 2.0
    }

    /// Drive intensity `I_x` (units of γ²) for a beam power in mW.
    pub fn intensity_from_power(&self, power_mw: f64) -> f64 {
        let peak = 2.0 * power_mw * 1e-3 / (PI * self.beam_waist * self.beam_waist);
        peak / self.saturation_intensity
    }

    pub fn power_from_intensity(&self, intensity: f64) -> f64 {
        intensity * self.saturation_intensity * PI * self.beam_waist * self.beam_waist / 2.0 * 1e3
    }

    /// Detuning in units of γ for a frequency offset in GHz.
    pub fn detuning_from_ghz(&self, ghz: f64) -> f64 {
        2.0 * PI * ghz * 1e9 / self.gamma
    }

    pub fn ghz_from_detuning(&self, detuning: f64) -> f64 {
        detuning * self.gamma / (2.0 * PI * 1e9)
    }

    /// Resonant two-level cross-section `3λ²/2π` scaled by the transition
    /// strength (m²).
    pub fn cross_section(&self) -> f64 {
        3.0 * self.wavelength * self.wavelength / (2.0 * PI) * self.transition_strength
    }
}

/// 1/e half-width of the Maxwell-Boltzmann Doppler shift distribution in
/// units of γ: `k·sqrt(2 k_B T / m) / γ`.
pub fn thermal_doppler_width(temperature: f64, mass_amu: f64, wavelength: f64, gamma: f64) -> f64 {
    let v = (2.0 * BOLTZMANN * temperature / (mass_amu * ATOMIC_MASS_UNIT)).sqrt();
    2.0 * PI / wavelength * v / gamma
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub ensemble: EnsembleParams,
    pub drive: DriveParams,
    pub units: UnitSystem,
}

/// Converts laboratory parameters into the γ = 1 unit system.
pub fn normalize_units(raw: &RawParams) -> Result<Normalized, ParamError> {
    positive("gamma", raw.gamma)?;
    positive("cell_length", raw.cell_length)?;
    positive("temperature", raw.temperature)?;
    positive("density", raw.density)?;
    positive("beam_waist", raw.beam_waist)?;
    positive("saturation_intensity", raw.saturation_intensity)?;
    positive("wavelength", raw.wavelength)?;
    positive("transition_strength", raw.transition_strength)?;
    non_negative("power_mw", raw.power_mw)?;
    finite("detuning", raw.detuning)?;

    let units = UnitSystem {
        gamma: raw.gamma,
        beam_waist: raw.beam_waist,
        saturation_intensity: raw.saturation_intensity,
        wavelength: raw.wavelength,
        transition_strength: raw.transition_strength,
    };
    let cooperativity = match raw.cooperativity {
        Some(c) => non_negative("cooperativity", c)?,
        None => raw.density * units.cross_section() * raw.cell_length,
    };
    let ensemble = EnsembleParams::from_cooperativity(
        raw.gamma,
        cooperativity,
        raw.cell_length,
        raw.density,
        raw.temperature,
        units.beam_area(),
    )?;
    let drive = DriveParams::new(
        units.intensity_from_power(raw.power_mw),
        raw.detuning / raw.gamma,
        raw.ellipticity,
    )?;
    Ok(Normalized {
        ensemble,
        drive,
        units,
    })
}

impl Normalized {
    /// Inverse of [`normalize_units`]. The cooperativity is always reported
    /// as an explicit override.
    pub fn denormalize(&self) -> RawParams {
        let u = &self.units;
        RawParams {
            gamma: u.gamma,
            detuning: self.drive.detuning() * u.gamma,
            power_mw: u.power_from_intensity(self.drive.intensity()),
            beam_waist: u.beam_waist,
            saturation_intensity: u.saturation_intensity,
            cell_length: self.ensemble.cell_length(),
            density: self.ensemble.density(),
            temperature: self.ensemble.temperature(),
            wavelength: u.wavelength,
            transition_strength: u.transition_strength,
            ellipticity: self.drive.ellipticity(),
            cooperativity: Some(self.ensemble.cooperativity()),
        }
    }
}
