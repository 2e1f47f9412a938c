//! Asymptotic forms of the fluctuation equation and their comparison with
//! the full response.
//!
//! Every limit is written as coefficients of `∂δâ_y/∂z̄`:
//! `(coefficient of δâ_y) δâ_y + (coefficient of δâ_y†) δâ_y† + noise`.
//! The full equation has `κ − Γ` and `−κ` in these slots. The free-space
//! phase `−iωl/c` carried by `Γ` is not part of any limit and is removed
//! before comparing.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::response::response;
use super::{relative_error, FluctuationError};
use crate::params::{DriveParams, EnsembleParams};

fn i() -> Complex64 {
    Complex64::i()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    LowSideband,
    HighSideband,
    Kerr,
    HighSaturation,
}

impl Regime {
    pub const ALL: [Regime; 4] = [
        Regime::LowSideband,
        Regime::HighSideband,
        Regime::Kerr,
        Regime::HighSaturation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::LowSideband => "low-sideband",
            Regime::HighSideband => "high-sideband",
            Regime::Kerr => "kerr",
            Regime::HighSaturation => "high-saturation",
        }
    }

    /// Validity gate at `(I_x, Δ, ω)`.
    pub fn applies(&self, intensity: f64, detuning: f64, omega: f64) -> bool {
        let d = detuning.abs();
        let root = intensity.sqrt();
        match self {
            Regime::LowSideband => {
                let s = intensity / (1.0 + detuning * detuning);
                d >= 10.0 && omega <= 0.01 * s.min(1.0)
            }
            Regime::HighSideband => d >= 50.0 && omega >= 5.0,
            Regime::Kerr => d > 0.0 && d >= 10.0 * root && root >= 10.0,
            Regime::HighSaturation => d > 0.0 && intensity >= 100.0 * d * d && omega >= 1.0,
        }
    }
}

/// `ω ≪ γ` and `ω ≪ γs`, `Δ ≫ γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowSidebandLimit {
    /// `iδ₀/(1+s)` on `δâ_y†`.
    pub coefficient_adag: Complex64,
    /// `gNl/(2γc) = C/(2g)` multiplying `f_y + f_y† + (Δ/2√I) f_z`.
    pub noise_prefactor: f64,
    /// `Δ/(2√I_x)`, the weight of the population noise.
    pub population_weight: f64,
}

pub fn limit_low_sideband(
    ens: &EnsembleParams,
    drive: &DriveParams,
) -> Result<LowSidebandLimit, FluctuationError> {
    let d0 = drive.linear_dephasing(ens.cooperativity())?;
    let s = drive.saturation();
    let g = ens.coupling() / ens.gamma();
    Ok(LowSidebandLimit {
        coefficient_adag: i() * d0 / (1.0 + s),
        noise_prefactor: if g > 0.0 {
            ens.cooperativity() / (2.0 * g)
        } else {
            0.0
        },
        population_weight: drive.detuning() / (2.0 * drive.intensity().sqrt()),
    })
}

/// `ω ≥ γ`, `Δ ≫ γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighSidebandLimit {
    pub kappa: Complex64,
    pub gamma_prop: Complex64,
}

pub fn limit_high_sideband(
    ens: &EnsembleParams,
    drive: &DriveParams,
    _omega: f64,
) -> Result<HighSidebandLimit, FluctuationError> {
    let d0 = drive.linear_dephasing(ens.cooperativity())?;
    let s = drive.saturation();
    Ok(HighSidebandLimit {
        kappa: -i() * d0 * s / ((1.0 + s) * (1.0 + 2.0 * s)),
        gamma_prop: -i() * d0 / (1.0 + s),
    })
}

/// `Δ ≫ √I_x ≫ γ`, low saturation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KerrLimit {
    /// `iδ₀`.
    pub linear_dephasing: Complex64,
    /// `−iδ₀s(2δâ_y − δâ_y†)`: `−2iδ₀s` on `δâ_y`.
    pub cross_kerr_a: Complex64,
    /// `+iδ₀s` on `δâ_y†`.
    pub cross_kerr_adag: Complex64,
    /// `Cγ²/Δ²`.
    pub noise_scale: f64,
    /// `δ₀s`, of order one for useful squeezing.
    pub squeezing_parameter: f64,
    pub regime_valid: bool,
}

impl KerrLimit {
    pub fn coefficient_a(&self) -> Complex64 {
        self.linear_dephasing + self.cross_kerr_a
    }
}

pub fn limit_kerr(
    ens: &EnsembleParams,
    drive: &DriveParams,
) -> Result<KerrLimit, FluctuationError> {
    let c = ens.cooperativity();
    let d0 = drive.linear_dephasing(c)?;
    let s = drive.saturation();
    let valid = Regime::Kerr.applies(drive.intensity(), drive.detuning(), 0.0);
    if !valid {
        warn!(
            "Kerr limit used outside Δ ≥ 10√I_x, √I_x ≥ 10γ (I_x = {}, Δ = {})",
            drive.intensity(),
            drive.detuning()
        );
    }
    Ok(KerrLimit {
        linear_dephasing: i() * d0,
        cross_kerr_a: -2.0 * i() * d0 * s,
        cross_kerr_adag: i() * d0 * s,
        noise_scale: c / (drive.detuning() * drive.detuning()),
        squeezing_parameter: d0 * s,
        regime_valid: valid,
    })
}

/// `I_x ≫ Δ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HighSaturationLimit {
    /// `iδ₀/(2s)` on both `δâ_y` and `δâ_y†`.
    pub coefficient: Complex64,
    /// `Cγ²/ω²`.
    pub noise_scale: f64,
    pub regime_valid: bool,
}

pub fn limit_high_saturation(
    ens: &EnsembleParams,
    drive: &DriveParams,
    omega: f64,
) -> Result<HighSaturationLimit, FluctuationError> {
    let c = ens.cooperativity();
    let d0 = drive.linear_dephasing(c)?;
    let s = drive.saturation();
    Ok(HighSaturationLimit {
        coefficient: i() * d0 / (2.0 * s),
        noise_scale: c / (omega * omega),
        regime_valid: Regime::HighSaturation.applies(drive.intensity(), drive.detuning(), omega),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientComparison {
    pub name: &'static str,
    pub full: Complex64,
    pub limit: Complex64,
    pub relative_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitComparison {
    pub regime: Regime,
    pub valid: bool,
    /// Empty when the regime does not apply.
    pub coefficients: Vec<CoefficientComparison>,
}

impl LimitComparison {
    pub fn max_relative_error(&self) -> Option<f64> {
        self.coefficients
            .iter()
            .map(|c| c.relative_error)
            .fold(None, |a, e| Some(a.map_or(e, |a: f64| a.max(e))))
    }
}

fn entry(name: &'static str, full: Complex64, limit: Complex64) -> CoefficientComparison {
    CoefficientComparison {
        name,
        full,
        limit,
        relative_error: relative_error(full, limit),
    }
}

/// Full-versus-limit comparison for every regime at one parameter point.
pub fn compare_limits(
    ens: &EnsembleParams,
    drive: &DriveParams,
    omega: f64,
) -> Result<Vec<LimitComparison>, FluctuationError> {
    let (intensity, detuning) = (drive.intensity(), drive.detuning());
    let mut out = Vec::with_capacity(4);
    for regime in Regime::ALL {
        let valid = regime.applies(intensity, detuning, omega);
        let mut coefficients = Vec::new();
        if valid {
            let mut full = response(ens, drive, omega)?;
            full.gamma_prop += i() * omega * ens.transit_time();
            match regime {
                Regime::LowSideband => {
                    let l = limit_low_sideband(ens, drive)?;
                    coefficients.push(entry("adag", full.drift_adag(), l.coefficient_adag));
                }
                Regime::HighSideband => {
                    let l = limit_high_sideband(ens, drive, omega)?;
                    coefficients.push(entry("kappa", full.kappa, l.kappa));
                    coefficients.push(entry("gamma", full.gamma_prop, l.gamma_prop));
                }
                Regime::Kerr => {
                    let l = limit_kerr(ens, drive)?;
                    coefficients.push(entry("a", full.drift_a(), l.coefficient_a()));
                    coefficients.push(entry("adag", full.drift_adag(), l.cross_kerr_adag));
                }
                Regime::HighSaturation => {
                    let l = limit_high_saturation(ens, drive, omega)?;
                    coefficients.push(entry("a", full.drift_a(), l.coefficient));
                    coefficients.push(entry("adag", full.drift_adag(), l.coefficient));
                }
            }
        }
        out.push(LimitComparison {
            regime,
            valid,
            coefficients,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::RB87_D2_GAMMA;

    fn setup(c: f64, i: f64, d: f64) -> (EnsembleParams, DriveParams) {
        (
            EnsembleParams::with_cooperativity(c).unwrap(),
            DriveParams::linear(i, d).unwrap(),
        )
    }

    #[test]
    fn high_sideband_closed_forms() {
        let (e, _) = setup(100.0, 0.0, 10.0);
        let d = DriveParams::linear(0.0, 10.0).unwrap();
        let l = limit_high_sideband(&e, &d, 5.0).unwrap();
        assert_eq!(l.kappa.norm(), 0.0);
        assert!((l.gamma_prop + i() * 5.0).norm() < 1e-14);
        // s = 1
        let d = DriveParams::linear(101.0, 10.0).unwrap();
        let l = limit_high_sideband(&e, &d, 5.0).unwrap();
        assert!((l.kappa + i() * 5.0 / 6.0).norm() < 1e-14);
    }

    #[test]
    fn resonance_gates_every_detuned_limit() {
        let (e, d) = setup(100.0, 1e4, 0.0);
        let rows = compare_limits(&e, &d, 10.0).unwrap();
        assert!(rows.iter().all(|r| !r.valid && r.coefficients.is_empty()));
        assert!(limit_high_sideband(&e, &d, 10.0).is_err());
    }

    #[test]
    fn kerr_flags_its_regime() {
        let (e, d) = setup(1e6, 400.0, 1e3);
        assert!(limit_kerr(&e, &d).unwrap().regime_valid);
        let (e, d) = setup(1e6, 400.0, 50.0);
        assert!(!limit_kerr(&e, &d).unwrap().regime_valid);
    }

    #[test]
    fn comparison_ignores_cell_length() {
        let d = DriveParams::linear(1250.0, 50.0).unwrap();
        let errors = |length: f64| {
            let e = EnsembleParams::from_cooperativity(
                RB87_D2_GAMMA,
                100.0,
                length,
                1e17,
                345.15,
                1e-7,
            )
            .unwrap();
            compare_limits(&e, &d, 5.0).unwrap()[1]
                .max_relative_error()
                .unwrap()
        };
        assert!((errors(1e-3) - errors(1.0)).abs() < 1e-12);
    }

    #[test]
    fn low_sideband_coefficient_matches_full_response() {
        let (e, d) = setup(100.0, 50.0, 200.0);
        let full = response(&e, &d, 1e-6).unwrap();
        let l = limit_low_sideband(&e, &d).unwrap();
        assert!(relative_error(full.drift_adag(), l.coefficient_adag) < 0.02);
    }
}
