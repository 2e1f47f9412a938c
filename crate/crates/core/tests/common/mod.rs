//! Reference implementations shared by the integration tests. None of these
//! call into the crate's solvers.
#![allow(dead_code)]

use nalgebra::SMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

pub type Op = SMatrix<Complex64, 4, 4>;

pub fn ket_bra(i: usize, j: usize) -> Op {
    let mut m = Op::zeros();
    m[(i - 1, j - 1)] = Complex64::new(1.0, 0.0);
    m
}

/// Spontaneous-emission jumps: each excited level (3, 4) decays into both
/// ground levels (1, 2) at unit rate.
pub fn jumps() -> [Op; 4] {
    [ket_bra(1, 3), ket_bra(1, 4), ket_bra(2, 3), ket_bra(2, 4)]
}

/// Rotating-frame Hamiltonian: σ₊ couples 1↔4, σ₋ couples 2↔3.
pub fn hamiltonian(rabi_plus: Complex64, rabi_minus: Complex64, detuning: f64) -> Op {
    let mut h = (ket_bra(3, 3) + ket_bra(4, 4)) * Complex64::new(detuning, 0.0);
    let v = ket_bra(4, 1) * rabi_plus + ket_bra(3, 2) * rabi_minus;
    h -= v + v.adjoint();
    h
}

/// Schrödinger-picture Lindblad generator.
pub fn lindblad(h: &Op, rho: &Op) -> Op {
    let i = Complex64::i();
    let mut out = (h * rho - rho * h) * (-i);
    for l in jumps() {
        let ld = l.adjoint();
        let ldl = ld * l;
        out += l * rho * ld - (ldl * rho + rho * ldl) * Complex64::new(0.5, 0.0);
    }
    out
}

/// Heisenberg-picture dissipator (the Hamiltonian part is omitted).
pub fn adjoint_dissipator(x: &Op) -> Op {
    let mut out = Op::zeros();
    for l in jumps() {
        let ld = l.adjoint();
        let ldl = ld * l;
        out += ld * x * l - (ldl * x + x * ldl) * Complex64::new(0.5, 0.0);
    }
    out
}

pub struct TimeDomain {
    pub rho: Op,
    pub max_trace_drift: f64,
    pub residual: f64,
}

/// Fixed-step RK4 on the master equation from the unpolarized ground state,
/// run until the generator norm drops below `tol`.
pub fn relax(rabi_plus: Complex64, rabi_minus: Complex64, detuning: f64, tol: f64) -> TimeDomain {
    let h = hamiltonian(rabi_plus, rabi_minus, detuning);
    let scale = 1.0 + rabi_plus.norm() + rabi_minus.norm() + detuning.abs();
    let dt = Complex64::new(0.4 / scale, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let sixth = Complex64::new(1.0 / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    let mut rho = (ket_bra(1, 1) + ket_bra(2, 2)) * half;
    let mut drift: f64 = 0.0;
    for step in 0..20_000_000usize {
        let k1 = lindblad(&h, &rho);
        if step % 256 == 0 && k1.iter().fold(0.0f64, |a, z| a.max(z.norm())) < tol {
            return TimeDomain {
                rho,
                max_trace_drift: drift,
                residual: k1.iter().fold(0.0, |a, z| a.max(z.norm())),
            };
        }
        let k2 = lindblad(&h, &(rho + k1 * dt * half));
        let k3 = lindblad(&h, &(rho + k2 * dt * half));
        let k4 = lindblad(&h, &(rho + k3 * dt));
        rho += (k1 + k2 * two + k3 * two + k4) * dt * sixth;
        drift = drift.max((rho.trace().re - 1.0).abs());
    }
    panic!("master equation did not relax");
}

/// Exact complex rationals.
#[derive(Clone, Debug)]
pub struct Cq {
    pub re: BigRational,
    pub im: BigRational,
}

impl Cq {
    pub fn real(x: f64) -> Self {
        Self {
            re: BigRational::from_float(x).expect("finite"),
            im: BigRational::zero(),
        }
    }
    pub fn new(re: f64, im: f64) -> Self {
        Self {
            re: BigRational::from_float(re).expect("finite"),
            im: BigRational::from_float(im).expect("finite"),
        }
    }
    pub fn int(re: i64, im: i64) -> Self {
        Self {
            re: BigRational::from_integer(BigInt::from(re)),
            im: BigRational::from_integer(BigInt::from(im)),
        }
    }
    pub fn add(&self, o: &Self) -> Self {
        Self {
            re: &self.re + &o.re,
            im: &self.im + &o.im,
        }
    }
    pub fn sub(&self, o: &Self) -> Self {
        Self {
            re: &self.re - &o.re,
            im: &self.im - &o.im,
        }
    }
    pub fn mul(&self, o: &Self) -> Self {
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    pub fn div(&self, o: &Self) -> Self {
        let den = &o.re * &o.re + &o.im * &o.im;
        Self {
            re: (&self.re * &o.re + &self.im * &o.im) / &den,
            im: (&self.im * &o.re - &self.re * &o.im) / &den,
        }
    }
    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap(), self.im.to_f64().unwrap())
    }
}

/// `(Λ, Λ′, A, B)` evaluated exactly at dyadic-rational inputs, with the
/// decay rate kept explicit.
pub fn rational_coefficients(
    gamma: f64,
    intensity: f64,
    detuning: f64,
    omega: f64,
) -> [Complex64; 4] {
    let g = Cq::real(gamma);
    let ix = Cq::real(intensity);
    let dd = Cq::real(detuning);
    let iw = Cq::new(0.0, omega);
    let i_delta = Cq::new(0.0, detuning);
    let two = Cq::int(2, 0);
    let g1 = g.sub(&iw); // γ − iω
    let g2 = two.mul(&g).sub(&iw); // 2γ − iω
    let gd = g.sub(&i_delta); // γ − iΔ
    let den = two
        .mul(&ix)
        .mul(&g1)
        .mul(&g1)
        .sub(&iw.mul(&g2).mul(&g1.mul(&g1).add(&dd.mul(&dd))));
    let lambda = ix.mul(&g1).mul(&g2).div(&den);
    let lambda_p = iw
        .mul(&ix.mul(&g1).sub(&gd.mul(&gd.sub(&iw)).mul(&g2)))
        .div(&den);
    let minus_iw = Cq::int(0, 0).sub(&iw);
    let a = gd.sub(&iw).mul(&minus_iw).mul(&g2).div(&den);
    let b = ix.mul(&g1).div(&den);
    [lambda.to_c64(), lambda_p.to_c64(), a.to_c64(), b.to_c64()]
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}
