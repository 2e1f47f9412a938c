mod common;

use num_complex::Complex64;
use psr_core::bloch::{derivatives, steady_state, symmetric_steady_state};
use psr_core::params::{DriveParams, EnsembleParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::relax;

fn max_abs_dev(a: &psr_core::bloch::SteadyState, rho: &common::Op) -> f64 {
    let d = a.density_matrix() - rho;
    d.iter().fold(0.0, |m, z| m.max(z.norm()))
}

#[test]
fn steady_state_matches_master_equation_relaxation() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rp = Complex64::from_polar(rng.random_range(0.7..5.0), rng.random_range(0.0..6.3));
        let rm = Complex64::from_polar(rng.random_range(0.7..5.0), rng.random_range(0.0..6.3));
        let det = rng.random_range(-6.0..6.0);
        let ss = steady_state(rp, rm, det).unwrap();
        let td = relax(rp, rm, det, 1e-11);
        assert!(
            td.max_trace_drift < 1e-9,
            "trace drift {}",
            td.max_trace_drift
        );
        worst = worst.max(max_abs_dev(&ss, &td.rho));
    }
    assert!(worst < 1e-7, "max deviation {worst:e}");
}

#[test]
fn single_component_on_resonance() {
    // with only σ₊ driven, everything is pumped into the undriven ground level
    let rp = Complex64::new(1.3, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let ss = steady_state(rp, zero, 0.0).unwrap();
    let td = relax(rp, zero, 0.0, 1e-12);
    assert!((ss.populations[3] - td.rho[(3, 3)].re).abs() < 1e-8);
    assert!(max_abs_dev(&ss, &td.rho) < 1e-8);
}

#[test]
fn symmetric_drive_at_unit_saturation() {
    let det = 5.0;
    let intensity = 1.0 + det * det;
    let d = DriveParams::linear(intensity, det).unwrap();
    assert!((d.saturation() - 1.0).abs() < 1e-15);
    let amp = (intensity / 2.0).sqrt();
    let (rp, rm) = (Complex64::new(amp, 0.0), Complex64::new(-amp, 0.0));
    let ss = steady_state(rp, rm, det).unwrap();
    let p = ss.populations;
    assert!((p[0] - p[1]).abs() < 1e-12 && (p[2] - p[3]).abs() < 1e-12);
    let td = relax(rp, rm, det, 1e-12);
    assert!(max_abs_dev(&ss, &td.rho) < 1e-8);
    assert!(max_abs_dev(&symmetric_steady_state(intensity, det), &td.rho) < 1e-8);
}

#[test]
fn solution_is_stationary_and_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let rp = Complex64::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let rm = Complex64::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
        let det = rng.random_range(-100.0..100.0);
        let ss = steady_state(rp, rm, det).unwrap();
        assert!((ss.trace() - 1.0).abs() < 1e-10);
        assert!(ss.populations.iter().all(|p| (0.0..=1.0).contains(p)));
        let dx = derivatives(&ss, rp, rm, det);
        assert!(dx.iter().all(|v| v.abs() < 1e-10), "{dx:?}");
    }
}

#[test]
fn transmission_bounds_and_far_detuning() {
    use psr_core::bloch::{propagate_mean_field, FieldState};
    let ens = EnsembleParams::with_cooperativity(500.0).unwrap();
    let input = FieldState::from_drive(&DriveParams::linear(4.0, 1e4).unwrap());
    let far = propagate_mean_field(&ens, input, 1e4).unwrap();
    assert!(far.transmission >= 0.999);
    let mut last = 0.0;
    for det in [3.0, 6.0, 12.0, 25.0, 50.0, 100.0] {
        let input = FieldState::from_drive(&DriveParams::linear(4.0, det).unwrap());
        let t = propagate_mean_field(&ens, input, det).unwrap().transmission;
        assert!((0.0..=1.0).contains(&t));
        assert!(t >= last, "T not increasing at Δ = {det}");
        last = t;
    }
}
