use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::FluctuationError;
use crate::bloch::kappa0;
use crate::params::{DriveParams, EnsembleParams};

/// Linear response of the y-polarized vacuum at one sideband frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexResponse {
    pub omega: f64,
    pub kappa0: Complex64,
    pub kappa: Complex64,
    pub gamma_prop: Complex64,
    pub lambda: Complex64,
    pub lambda_prime: Complex64,
}

impl ComplexResponse {
    /// Coefficient of `δâ_y` in `∂δâ_y/∂z̄`, i.e. `κ − Γ`.
    pub fn drift_a(&self) -> Complex64 {
        self.kappa - self.gamma_prop
    }

    /// Coefficient of `δâ_y†`, i.e. `−κ`.
    pub fn drift_adag(&self) -> Complex64 {
        -self.kappa
    }
}

/// Coefficients of the atomic Langevin term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LangevinCoeffs {
    pub a_coef: Complex64,
    pub b_coef: Complex64,
    pub d_denom: Complex64,
}

impl LangevinCoeffs {
    /// Prefactor of `f_z/(−iω) + f_z'/(2γ − iω)`: `−i sqrt(I_x/2) · A`.
    ///
    /// With the per-component Rabi amplitude `sqrt(I_x/2)` this is the value
    /// for which the output commutator is preserved.
    pub fn population_prefactor(&self, intensity: f64) -> Complex64 {
        Complex64::new(0.0, -(intensity / 2.0).sqrt()) * self.a_coef
    }
}

pub(crate) fn denominator(intensity: f64, detuning: f64, omega: f64) -> Complex64 {
    let g1 = Complex64::new(1.0, -omega);
    let g2 = Complex64::new(2.0, -omega);
    let iw = Complex64::new(0.0, omega);
    2.0 * intensity * g1 * g1 - iw * g2 * (g1 * g1 + detuning * detuning)
}

fn checked_denominator(
    intensity: f64,
    detuning: f64,
    omega: f64,
) -> Result<Complex64, FluctuationError> {
    let d = denominator(intensity, detuning, omega);
    let g1 = 1.0 + omega * omega;
    let scale = 2.0 * intensity * g1
        + omega.abs() * (4.0 + omega * omega).sqrt() * (g1 + detuning * detuning);
    if !(d.norm() > 1e-14 * scale) || !d.is_finite() {
        return Err(FluctuationError::Pole {
            intensity,
            detuning,
            omega,
        });
    }
    Ok(d)
}

/// Response at a signed sideband frequency. Negative ω is needed for the
/// conjugate row of the drift matrix.
pub(crate) fn response_signed(
    cooperativity: f64,
    transit_time: f64,
    intensity: f64,
    detuning: f64,
    omega: f64,
) -> Result<ComplexResponse, FluctuationError> {
    let d = checked_denominator(intensity, detuning, omega)?;
    let i = Complex64::i();
    let g1 = Complex64::new(1.0, -omega);
    let g2 = Complex64::new(2.0, -omega);
    let gd = Complex64::new(1.0, -detuning);
    let k0 = kappa0(cooperativity, intensity, detuning);
    let lambda = intensity * g1 * g2 / d;
    let lambda_prime = i * omega * (intensity * g1 - gd * (gd - i * omega) * g2) / d;
    let kappa = k0 * lambda;
    let gamma_prop = -i * omega * transit_time + kappa + k0.conj() * lambda_prime;
    Ok(ComplexResponse {
        omega,
        kappa0: k0,
        kappa,
        gamma_prop,
        lambda,
        lambda_prime,
    })
}

pub(crate) fn langevin_signed(
    intensity: f64,
    detuning: f64,
    omega: f64,
) -> Result<LangevinCoeffs, FluctuationError> {
    let d = checked_denominator(intensity, detuning, omega)?;
    let iw = Complex64::new(0.0, omega);
    let a = Complex64::new(1.0, -detuning - omega) * (-iw) * Complex64::new(2.0, -omega) / d;
    let b = intensity * Complex64::new(1.0, -omega) / d;
    Ok(LangevinCoeffs {
        a_coef: a,
        b_coef: b,
        d_denom: d,
    })
}

fn check_omega(omega: f64) -> Result<(), FluctuationError> {
    if omega >= 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(FluctuationError::InvalidFrequency(omega))
    }
}

/// `κ(0)`, `Λ(ω)`, `Λ′(ω)`, `κ(ω)` and `Γ(ω)` for a single velocity class.
pub fn response(
    ens: &EnsembleParams,
    drive: &DriveParams,
    omega: f64,
) -> Result<ComplexResponse, FluctuationError> {
    check_omega(omega)?;
    response_signed(
        ens.cooperativity(),
        ens.transit_time(),
        drive.intensity(),
        drive.detuning(),
        omega,
    )
}

/// Langevin coefficients `A`, `B` and the shared denominator `D`.
pub fn langevin_coeffs(
    _ens: &EnsembleParams,
    drive: &DriveParams,
    omega: f64,
) -> Result<LangevinCoeffs, FluctuationError> {
    check_omega(omega)?;
    langevin_signed(drive.intensity(), drive.detuning(), omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bloch::psr_gl_single_class;

    fn setup(c: f64, i: f64, d: f64) -> (EnsembleParams, DriveParams) {
        (
            EnsembleParams::with_cooperativity(c).unwrap(),
            DriveParams::linear(i, d).unwrap(),
        )
    }

    #[test]
    fn zero_frequency_identities() {
        let (e, d) = setup(40.0, 3.0, 2.0);
        let r = response(&e, &d, 0.0).unwrap();
        assert_eq!(r.lambda, Complex64::new(1.0, 0.0));
        assert_eq!(r.lambda_prime, Complex64::new(0.0, 0.0));
        assert_eq!(r.kappa, r.kappa0);
        let l = langevin_coeffs(&e, &d, 0.0).unwrap();
        assert_eq!(l.a_coef.norm(), 0.0);
        assert!((l.b_coef - 0.5).norm() < 1e-15);
    }

    #[test]
    fn no_drive_no_cross_kerr() {
        let (e, d) = setup(40.0, 0.0, 2.0);
        let r = response(&e, &d, 1.5).unwrap();
        assert_eq!(r.lambda.norm(), 0.0);
        assert_eq!(r.kappa.norm(), 0.0);
        assert!(matches!(
            response(&e, &d, 0.0),
            Err(FluctuationError::Pole { .. })
        ));
    }

    #[test]
    fn numerators_are_reproduced() {
        let (e, d) = setup(10.0, 7.0, -3.0);
        let w = 0.8;
        let l = langevin_coeffs(&e, &d, w).unwrap();
        let i = Complex64::i();
        let num_a = Complex64::new(1.0, 3.0 - w) * (-i * w) * Complex64::new(2.0, -w);
        let num_b = 7.0 * Complex64::new(1.0, -w);
        assert!((l.a_coef * l.d_denom - num_a).norm() <= 1e-12 * num_a.norm());
        assert!((l.b_coef * l.d_denom - num_b).norm() <= 1e-12 * num_b.norm());
    }

    #[test]
    fn gl_matches_mean_field() {
        let (e, d) = setup(123.0, 17.0, 4.5);
        let r = response(&e, &d, 0.0).unwrap();
        assert_eq!(-r.kappa0.im, psr_gl_single_class(&e, &d));
    }

    #[test]
    fn negative_frequency_rejected() {
        let (e, d) = setup(1.0, 1.0, 1.0);
        assert!(response(&e, &d, -1.0).is_err());
    }
}
