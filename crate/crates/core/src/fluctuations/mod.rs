//! Linearized quantum fluctuations of the y-polarized vacuum mode.
//!
//! The mode `â_y = −i(â₊ + â₋)/√2` obeys, in the Fourier domain,
//!
//! ```text
//! ∂δâ_y/∂z̄ = −Γ(ω) δâ_y + κ(ω) (δâ_y − δâ_y†) + F_y
//! ```
//!
//! Pairing it with the conjugate equation at `−ω` gives a 2×2 linear system
//! for `v = (δâ_y(ω), δâ_y†(−ω))`. Second moments of `v` are transported
//! through the medium together with the distributed Langevin sources, and the
//! symmetrized homodyne spectrum is read off at the exit face.

mod diffusion;
mod limits;
mod propagate;
mod response;

pub use diffusion::{diffusion, diffusion_for_drive, diffusion_for_state, DiffusionMatrix};
pub use limits::{
    compare_limits, limit_high_saturation, limit_high_sideband, limit_kerr, limit_low_sideband,
    CoefficientComparison, HighSaturationLimit, HighSidebandLimit, KerrLimit, LimitComparison,
    LowSidebandLimit, Regime,
};
pub use propagate::{
    output_covariance, propagate_noise, propagate_noise_manifold, DriftModel, Frame, NoiseOptions,
    OutputCovariance, QuadratureSpectrum, SpectrumPoint,
};
pub use response::{langevin_coeffs, response, ComplexResponse, LangevinCoeffs};

use num_complex::Complex64;
use thiserror::Error;

use crate::bloch::BlochError;
use crate::ensemble::{EnsembleError, QuadratureError};
use crate::params::ParamError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FluctuationError {
    #[error("response denominator vanishes at I = {intensity}, Δ = {detuning}, ω = {omega}")]
    Pole {
        intensity: f64,
        detuning: f64,
        omega: f64,
    },
    #[error("sideband frequency must be finite and non-negative, got {0}")]
    InvalidFrequency(f64),
    #[error("diffusion matrix has eigenvalue {eigenvalue:e}")]
    NotPositive { eigenvalue: f64 },
    #[error("noise transport failed at I = {intensity}, Δ = {detuning}, ω = {omega}: {reason}")]
    Transport {
        intensity: f64,
        detuning: f64,
        omega: f64,
        reason: String,
    },
    #[error("output spectrum is negative ({value}) at ω = {omega}")]
    NegativeSpectrum { omega: f64, value: f64 },
    #[error(transparent)]
    Bloch(#[from] BlochError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
}

/// Relative deviation `|a − b| / |b|`.
pub fn relative_error(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
