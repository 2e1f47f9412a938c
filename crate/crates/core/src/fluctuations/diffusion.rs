//! Langevin diffusion coefficients from the generalized Einstein relations.
//!
//! For a system operator `X` whose Heisenberg–Langevin noise comes from the
//! spontaneous-emission channels `L_k = sqrt(γ) |a⟩⟨e|` (a ∈ {1,2},
//! e ∈ {3,4}), the delta-correlated source moments are
//!
//! ```text
//! ⟨F_i F_j†⟩ = Σ_k ⟨[L_k†, X_i] [X_j†, L_k]⟩       (antinormal table)
//! ⟨F_j† F_i⟩ = Σ_k ⟨[L_k†, X_j†] [X_i, L_k]⟩       (normal table)
//! ```
//!
//! evaluated in the steady state. The basis is
//! `(f_y, f_y†, f_z, f_z')` with `f_y = (σ₁₄ + σ₂₃)/√2`,
//! `f_z = (σ₂₂ − σ₁₁)/√2`, `f_z' = (σ₄₄ − σ₃₃)/√2`.

use std::sync::OnceLock;

use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FluctuationError;
use crate::bloch::{steady_state, symmetric_steady_state, SteadyState};
use crate::params::DriveParams;

type Op = SMatrix<Complex64, 4, 4>;

/// Tolerated negative eigenvalue, relative to the largest one.
const PSD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionMatrix {
    /// `⟨F_i F_j†⟩` per atom.
    pub antinormal: Matrix4<Complex64>,
    /// `⟨F_j† F_i⟩` per atom.
    pub normal: Matrix4<Complex64>,
}

fn sigma(i: usize, j: usize) -> Op {
    let mut m = Op::zeros();
    m[(i - 1, j - 1)] = Complex64::new(1.0, 0.0);
    m
}

fn comm(a: &Op, b: &Op) -> Op {
    a * b - b * a
}

struct Tables {
    antinormal: [[Op; 4]; 4],
    normal: [[Op; 4]; 4],
}

fn tables() -> &'static Tables {
    static T: OnceLock<Tables> = OnceLock::new();
    T.get_or_init(|| {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let basis = [
            (sigma(1, 4) + sigma(2, 3)) * Complex64::new(r, 0.0),
            (sigma(4, 1) + sigma(3, 2)) * Complex64::new(r, 0.0),
            (sigma(2, 2) - sigma(1, 1)) * Complex64::new(r, 0.0),
            (sigma(4, 4) - sigma(3, 3)) * Complex64::new(r, 0.0),
        ];
        let jumps: Vec<Op> = [(1, 3), (1, 4), (2, 3), (2, 4)]
            .iter()
            .map(|&(a, e)| sigma(a, e))
            .collect();
        let mut antinormal = [[Op::zeros(); 4]; 4];
        let mut normal = [[Op::zeros(); 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let xi = &basis[i];
                let xj_dag = basis[j].adjoint();
                for l in &jumps {
                    let l_dag = l.adjoint();
                    antinormal[i][j] += comm(&l_dag, xi) * comm(&xj_dag, l);
                    normal[i][j] += comm(&l_dag, &xj_dag) * comm(xi, l);
                }
            }
        }
        Tables { antinormal, normal }
    })
}

fn expect(rho: &Op, op: &Op) -> Complex64 {
    (rho * op).trace()
}

fn check_psd(m: &Matrix4<Complex64>) -> Result<(), FluctuationError> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = h.symmetric_eigenvalues();
    let max = eig.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let min = eig.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if min < -PSD_TOL * max.max(1.0) {
        return Err(FluctuationError::NotPositive { eigenvalue: min });
    }
    Ok(())
}

/// Diffusion tables for an arbitrary Bloch steady state.
pub fn diffusion_for_state(state: &SteadyState) -> Result<DiffusionMatrix, FluctuationError> {
    let rho = state.density_matrix();
    let t = tables();
    let mut antinormal = Matrix4::zeros();
    let mut normal = Matrix4::zeros();
    for i in 0..4 {
        for j in 0..4 {
            antinormal[(i, j)] = expect(&rho, &t.antinormal[i][j]);
            normal[(i, j)] = expect(&rho, &t.normal[i][j]);
        }
    }
    check_psd(&antinormal)?;
    check_psd(&normal)?;
    Ok(DiffusionMatrix { antinormal, normal })
}

/// Diffusion tables in the steady state of the linearly polarized drive.
pub fn diffusion(drive: &DriveParams) -> Result<DiffusionMatrix, FluctuationError> {
    diffusion_for_state(&symmetric_steady_state(drive.intensity(), drive.detuning()))
}

/// Diffusion tables for explicit circular Rabi amplitudes.
pub fn diffusion_for_drive(
    rabi_plus: Complex64,
    rabi_minus: Complex64,
    detuning: f64,
) -> Result<DiffusionMatrix, FluctuationError> {
    diffusion_for_state(&steady_state(rabi_plus, rabi_minus, detuning)?)
}
