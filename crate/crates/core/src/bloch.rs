//! Semi-classical four-level steady state and mean-field propagation.
//!
//! Levels 1 and 2 are the ground states, 3 and 4 the excited states. The σ₊
//! component drives 1↔4 with Rabi amplitude `Ω₊ = g⟨â₊⟩`, the σ₋ component
//! drives 2↔3 with `Ω₋ = g⟨â₋⟩`. Both optical coherences decay at γ, each
//! excited state decays at 2γ and feeds both ground states at γ. All rates
//! are in units of γ, so γ = 1 below.
//!
//! With `⟨σ_ij⟩` the expectation of `|i⟩⟨j|`, the equations of motion are
//!
//! ```text
//! σ̇₄₄ = −2σ₄₄ + 2 Im(Ω₊* σ₁₄)            σ̇₁₁ = σ₃₃ + σ₄₄ − 2 Im(Ω₊* σ₁₄)
//! σ̇₃₃ = −2σ₃₃ + 2 Im(Ω₋* σ₂₃)            σ̇₂₂ = σ₃₃ + σ₄₄ − 2 Im(Ω₋* σ₂₃)
//! σ̇₁₄ = −(1 + iΔ) σ₁₄ + iΩ₊ (σ₁₁ − σ₄₄)
//! σ̇₂₃ = −(1 + iΔ) σ₂₃ + iΩ₋ (σ₂₂ − σ₃₃)
//! ```
//!
//! and the fields obey `∂Ω₊/∂z̄ = iC σ₁₄`, `∂Ω₋/∂z̄ = iC σ₂₃`.

use nalgebra::{SMatrix, SVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{self, OdeError, OdeOptions};
use crate::params::{DriveParams, EnsembleParams};

/// Sign applied to `Im κ(0)` to obtain `𝒢l`. With −1, `𝒢l > 0` for blue
/// detuning (Δ > 0), which puts the D2 composite peak at positive detuning.
pub const GL_SIGN: f64 = -1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlochError {
    #[error("singular Bloch system at Ω₊ = {rabi_plus}, Ω₋ = {rabi_minus}, Δ = {detuning}")]
    Singular {
        rabi_plus: Complex64,
        rabi_minus: Complex64,
        detuning: f64,
    },
    #[error("non-finite input at Ω₊ = {rabi_plus}, Ω₋ = {rabi_minus}, Δ = {detuning}")]
    NonFinite {
        rabi_plus: Complex64,
        rabi_minus: Complex64,
        detuning: f64,
    },
    #[error("mean-field integration failed at Δ = {detuning}, C = {cooperativity}: {reason}")]
    Integration {
        detuning: f64,
        cooperativity: f64,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// `σ₁₁, σ₂₂, σ₃₃, σ₄₄`.
    pub populations: [f64; 4],
    pub sigma14: Complex64,
    pub sigma23: Complex64,
}

impl SteadyState {
    /// Unpolarized ground state, the zero-drive convention.
    pub fn unpolarized() -> Self {
        Self {
            populations: [0.5, 0.5, 0.0, 0.0],
            sigma14: Complex64::new(0.0, 0.0),
            sigma23: Complex64::new(0.0, 0.0),
        }
    }

    pub fn trace(&self) -> f64 {
        self.populations.iter().sum()
    }

    fn to_vector(self) -> [f64; 8] {
        let p = self.populations;
        [
            p[0],
            p[1],
            p[2],
            p[3],
            self.sigma14.re,
            self.sigma14.im,
            self.sigma23.re,
            self.sigma23.im,
        ]
    }

    fn from_vector(x: &[f64]) -> Self {
        Self {
            populations: [x[0], x[1], x[2], x[3]],
            sigma14: Complex64::new(x[4], x[5]),
            sigma23: Complex64::new(x[6], x[7]),
        }
    }

    /// 4×4 density matrix `ρ` with `ρ_ji = ⟨σ_ij⟩`.
    pub fn density_matrix(&self) -> SMatrix<Complex64, 4, 4> {
        let mut rho = SMatrix::<Complex64, 4, 4>::zeros();
        for i in 0..4 {
            rho[(i, i)] = Complex64::new(self.populations[i], 0.0);
        }
        rho[(3, 0)] = self.sigma14;
        rho[(0, 3)] = self.sigma14.conj();
        rho[(2, 1)] = self.sigma23;
        rho[(1, 2)] = self.sigma23.conj();
        rho
    }
}

/// Real 8×8 drift matrix of the Bloch equations in the variable order
/// `(σ₁₁, σ₂₂, σ₃₃, σ₄₄, Re σ₁₄, Im σ₁₄, Re σ₂₃, Im σ₂₃)`.
fn drift(rabi_plus: Complex64, rabi_minus: Complex64, detuning: f64) -> SMatrix<f64, 8, 8> {
    let (u, v) = (rabi_plus.re, rabi_plus.im);
    let (up, vp) = (rabi_minus.re, rabi_minus.im);
    let d = detuning;
    let mut m = SMatrix::<f64, 8, 8>::zeros();
    // Im(Ω₊* σ₁₄) = u·Im σ₁₄ − v·Re σ₁₄
    m[(0, 2)] = 1.0;
    m[(0, 3)] = 1.0;
    m[(0, 5)] = -2.0 * u;
    m[(0, 4)] = 2.0 * v;
    m[(1, 2)] = 1.0;
    m[(1, 3)] = 1.0;
    m[(1, 7)] = -2.0 * up;
    m[(1, 6)] = 2.0 * vp;
    m[(2, 2)] = -2.0;
    m[(2, 7)] = 2.0 * up;
    m[(2, 6)] = -2.0 * vp;
    m[(3, 3)] = -2.0;
    m[(3, 5)] = 2.0 * u;
    m[(3, 4)] = -2.0 * v;
    // σ̇₁₄ = −(1 + iΔ)σ₁₄ + (iu − v)(σ₁₁ − σ₄₄)
    m[(4, 4)] = -1.0;
    m[(4, 5)] = d;
    m[(4, 0)] = -v;
    m[(4, 3)] = v;
    m[(5, 4)] = -d;
    m[(5, 5)] = -1.0;
    m[(5, 0)] = u;
    m[(5, 3)] = -u;
    m[(6, 6)] = -1.0;
    m[(6, 7)] = d;
    m[(6, 1)] = -vp;
    m[(6, 2)] = vp;
    m[(7, 6)] = -d;
    m[(7, 7)] = -1.0;
    m[(7, 1)] = up;
    m[(7, 2)] = -up;
    m
}

/// Time derivatives of the Bloch variables at `state`.
pub fn derivatives(
    state: &SteadyState,
    rabi_plus: Complex64,
    rabi_minus: Complex64,
    detuning: f64,
) -> [f64; 8] {
    let x = SVector::<f64, 8>::from(state.to_vector());
    let dx = drift(rabi_plus, rabi_minus, detuning) * x;
    let mut out = [0.0; 8];
    out.copy_from_slice(dx.as_slice());
    out
}

/// Stationary solution of the Bloch equations.
///
/// The population-conservation redundancy is removed by replacing the σ̇₁₁
/// row with the trace condition. At zero drive every ground-state split is
/// stationary and the unpolarized state is returned.
pub fn steady_state(
    rabi_plus: Complex64,
    rabi_minus: Complex64,
    detuning: f64,
) -> Result<SteadyState, BlochError> {
    if !(rabi_plus.is_finite() && rabi_minus.is_finite() && detuning.is_finite()) {
        return Err(BlochError::NonFinite {
            rabi_plus,
            rabi_minus,
            detuning,
        });
    }
    if rabi_plus.norm_sqr() == 0.0 && rabi_minus.norm_sqr() == 0.0 {
        return Ok(SteadyState::unpolarized());
    }
    let mut a = drift(rabi_plus, rabi_minus, detuning);
    let mut b = SVector::<f64, 8>::zeros();
    for j in 0..8 {
        a[(0, j)] = if j < 4 { 1.0 } else { 0.0 };
    }
    b[0] = 1.0;
    let singular = || BlochError::Singular {
        rabi_plus,
        rabi_minus,
        detuning,
    };
    let x = a.lu().solve(&b).ok_or_else(singular)?;
    if !x.iter().all(|v| v.is_finite()) {
        return Err(singular());
    }
    let mut ss = SteadyState::from_vector(x.as_slice());
    for p in ss.populations.iter_mut() {
        // round-off can leave −1e-17 on a dark level
        *p = p.clamp(0.0, 1.0);
    }
    Ok(ss)
}

/// Closed-form steady state for the linearly polarized drive
/// `Ω₊ = −Ω₋ = sqrt(I/2)`.
pub fn symmetric_steady_state(intensity: f64, detuning: f64) -> SteadyState {
    if intensity == 0.0 {
        return SteadyState::unpolarized();
    }
    let s = intensity / (1.0 + detuning * detuning);
    let w = 0.5 / (1.0 + s);
    let e = 0.25 * s / (1.0 + s);
    let g = w + e;
    let rabi = (intensity / 2.0).sqrt();
    let sigma14 = Complex64::i() * rabi * w / Complex64::new(1.0, detuning);
    SteadyState {
        populations: [g, g, e, e],
        sigma14,
        sigma23: -sigma14,
    }
}

/// `κ(0) = C / (2(1 + iΔ)(1 + s))`, the mean-field absorption/dispersion rate
/// of one circular component per unit z̄.
pub fn kappa0(cooperativity: f64, intensity: f64, detuning: f64) -> Complex64 {
    let s = intensity / (1.0 + detuning * detuning);
    cooperativity / (2.0 * Complex64::new(1.0, detuning) * (1.0 + s))
}

/// `𝒢l` of a single velocity class: `GL_SIGN · Im κ(0)`.
pub fn psr_gl_single_class(ens: &EnsembleParams, drive: &DriveParams) -> f64 {
    GL_SIGN * kappa0(ens.cooperativity(), drive.intensity(), drive.detuning()).im
}

/// Rabi amplitudes `g⟨â±⟩` of the two circular components, in units of γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub amp_plus: Complex64,
    pub amp_minus: Complex64,
}

impl FieldState {
    pub fn new(amp_plus: Complex64, amp_minus: Complex64) -> Self {
        Self {
            amp_plus,
            amp_minus,
        }
    }

    pub fn from_drive(drive: &DriveParams) -> Self {
        let (p, m) = drive.circular_amplitudes();
        Self::new(Complex64::new(p, 0.0), Complex64::new(m, 0.0))
    }

    /// `|Ω₊|² + |Ω₋|²`, equal to `I_x` for a linear drive.
    pub fn intensity(&self) -> f64 {
        self.amp_plus.norm_sqr() + self.amp_minus.norm_sqr()
    }

    fn to_vector(self) -> [f64; 4] {
        [
            self.amp_plus.re,
            self.amp_plus.im,
            self.amp_minus.re,
            self.amp_minus.im,
        ]
    }

    fn from_vector(y: &[f64]) -> Self {
        Self::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldOutput {
    pub output: FieldState,
    pub transmission: f64,
}

fn mean_field_options(input: &FieldState) -> OdeOptions {
    let scale = input.intensity().sqrt().max(f64::MIN_POSITIVE);
    OdeOptions {
        rtol: 1e-8,
        atol: 1e-12 * scale,
        h_init: 1e-4,
        h_min: 1e-13,
        max_steps: 2_000_000,
    }
}

/// Field amplitudes at each of `z_points` (ascending, within `[0, 1]`).
pub fn propagate_mean_field_to(
    ens: &EnsembleParams,
    input: FieldState,
    detuning: f64,
    z_points: &[f64],
) -> Result<Vec<FieldState>, BlochError> {
    let c = ens.cooperativity();
    let opts = mean_field_options(&input);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), BlochError> {
        let f = FieldState::from_vector(y);
        let ss = steady_state(f.amp_plus, f.amp_minus, detuning)?;
        let dp = Complex64::i() * c * ss.sigma14;
        let dm = Complex64::i() * c * ss.sigma23;
        dy[0] = dp.re;
        dy[1] = dp.im;
        dy[2] = dm.re;
        dy[3] = dm.im;
        Ok(())
    };
    let wrap = |e: OdeError<BlochError>| match e {
        OdeError::Rhs(inner) => inner,
        other => BlochError::Integration {
            detuning,
            cooperativity: c,
            reason: other.to_string(),
        },
    };

    let mut out = Vec::with_capacity(z_points.len());
    let mut z = 0.0;
    let mut y = input.to_vector().to_vec();
    for &zp in z_points {
        if zp > z {
            let traj = ode::integrate(rhs, z, zp, &y, &opts).map_err(wrap)?;
            y = traj.last().to_vec();
            z = zp;
        }
        out.push(FieldState::from_vector(&y));
    }
    Ok(out)
}

/// Propagates the mean field through the cell, `z̄ ∈ [0, 1]`.
pub fn propagate_mean_field(
    ens: &EnsembleParams,
    input: FieldState,
    detuning: f64,
) -> Result<MeanFieldOutput, BlochError> {
    let output = propagate_mean_field_to(ens, input, detuning, &[1.0])?[0];
    let i0 = input.intensity();
    let transmission = if i0 > 0.0 {
        (output.intensity() / i0).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(MeanFieldOutput {
        output,
        transmission,
    })
}

/// Accepted integrator steps `(z̄, field)` from entrance to exit.
pub fn propagate_mean_field_profile(
    ens: &EnsembleParams,
    input: FieldState,
    detuning: f64,
) -> Result<Vec<(f64, FieldState)>, BlochError> {
    let c = ens.cooperativity();
    let traj = ode::integrate(
        |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), BlochError> {
            let f = FieldState::from_vector(y);
            let ss = steady_state(f.amp_plus, f.amp_minus, detuning)?;
            let dp = Complex64::i() * c * ss.sigma14;
            let dm = Complex64::i() * c * ss.sigma23;
            dy.copy_from_slice(&[dp.re, dp.im, dm.re, dm.im]);
            Ok(())
        },
        0.0,
        1.0,
        &input.to_vector(),
        &mean_field_options(&input),
    )
    .map_err(|e| match e {
        OdeError::Rhs(inner) => inner,
        other => BlochError::Integration {
            detuning,
            cooperativity: c,
            reason: other.to_string(),
        },
    })?;
    Ok(traj
        .t
        .iter()
        .zip(&traj.y)
        .map(|(z, y)| (*z, FieldState::from_vector(y)))
        .collect())
}
