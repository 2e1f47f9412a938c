//! Phenomenological PSR squeezing model.
//!
//! A rotation strength `𝒢l` couples the amplitude quadrature of the
//! y-polarized vacuum into its phase quadrature. Absorption `αl` is a beam
//! splitter that mixes fresh vacuum back in.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatskoError {
    #[error("absorption must be non-negative, got {0}")]
    NegativeAbsorption(f64),
    #[error("variance is flat in χ when 𝒢l = 0")]
    FlatVariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhenomenologicalParams {
    pub rotation_strength: f64,
    pub absorption: f64,
    pub phase: f64,
}

impl PhenomenologicalParams {
    pub fn new(rotation_strength: f64, absorption: f64, phase: f64) -> Result<Self, MatskoError> {
        if !(absorption >= 0.0) {
            return Err(MatskoError::NegativeAbsorption(absorption));
        }
        Ok(Self {
            rotation_strength,
            absorption,
            phase,
        })
    }
}

/// Self-rotation angle `φ = 𝒢l · ε`.
pub fn psr_angle(g_l: f64, ellipticity: f64) -> f64 {
    g_l * ellipticity
}

/// Quadrature variance of the output vacuum, QNL = 1.
pub fn variance(p: &PhenomenologicalParams) -> f64 {
    let g = p.rotation_strength;
    let (s, c) = p.phase.sin_cos();
    let t = (-p.absorption).exp();
    (1.0 - 2.0 * g * s * c + g * g * c * c) * t + (1.0 - t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalPhase {
    /// Minimizing angle in `[0, π)`.
    pub chi: f64,
    pub variance: f64,
}

impl OptimalPhase {
    pub fn db(&self) -> f64 {
        to_db(self.variance)
    }

    /// Positive when squeezed.
    pub fn squeezing_db(&self) -> f64 {
        -self.db()
    }
}

/// Closed-form minimum over χ.
///
/// The χ-dependent part is `(𝒢²/2) cos 2χ − 𝒢 sin 2χ`, whose minimum is
/// `−𝒢 sqrt(1 + 𝒢²/4)`.
pub fn optimal_phase(g_l: f64, alpha_l: f64) -> Result<OptimalPhase, MatskoError> {
    if g_l == 0.0 {
        return Err(MatskoError::FlatVariance);
    }
    if !(alpha_l >= 0.0) {
        return Err(MatskoError::NegativeAbsorption(alpha_l));
    }
    let g = g_l;
    let chi = (0.5 * g.atan2(-0.5 * g * g)).rem_euclid(PI);
    let amp = g.abs() * (1.0 + 0.25 * g * g).sqrt();
    let t = (-alpha_l).exp();
    let lossless = 1.0 + 0.5 * g * g - amp;
    Ok(OptimalPhase {
        chi,
        variance: lossless * t + (1.0 - t),
    })
}

pub fn to_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
