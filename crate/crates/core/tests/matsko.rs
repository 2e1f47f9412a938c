use std::f64::consts::PI;

use proptest::prelude::*;
use psr_core::matsko::*;

fn scan_min(g: f64, alpha: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|k| {
            let chi = 2.0 * PI * k as f64 / samples as f64;
            variance(&PhenomenologicalParams::new(g, alpha, chi).unwrap())
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn closed_form_minimum_matches_dense_scan() {
    let exact = optimal_phase(2.0, 0.0).unwrap();
    assert!(exact.variance < 1.0);
    let scanned = scan_min(2.0, 0.0, 1_000_000);
    // the scan sits within (2π/10⁶)² of the true minimum
    assert!(scanned >= exact.variance - 1e-12);
    assert!(scanned - exact.variance < 1e-9);
    let at = variance(&PhenomenologicalParams::new(2.0, 0.0, exact.chi).unwrap());
    assert!((at - exact.variance).abs() < 1e-12);
}

#[test]
fn weak_rotation_is_first_order() {
    let v = optimal_phase(1e-3, 0.0).unwrap().variance;
    assert!(((1.0 - v) / 1e-3 - 1.0).abs() < 1e-3);
    assert!((scan_min(1e-3, 0.0, 200_000) - v).abs() < 1e-9);
}

#[test]
fn six_db_point() {
    // bisect for the 𝒢l giving exactly 10^{-0.6}
    let target = from_db(-6.0);
    let (mut lo, mut hi) = (0.1, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if optimal_phase(mid, 0.0).unwrap().variance > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = optimal_phase(hi, 0.0).unwrap();
    assert!((r.squeezing_db() - 6.0).abs() < 0.05);
}

#[test]
fn absorption_degrades_squeezing() {
    let lossless = optimal_phase(2.0, 0.0).unwrap().variance;
    let lossy = optimal_phase(2.0, std::f64::consts::LN_2).unwrap().variance;
    assert!(lossy > lossless);
}

#[test]
fn opaque_medium_returns_vacuum() {
    for chi in [0.0, 0.4, 2.0] {
        let v = variance(&PhenomenologicalParams::new(7.0, 800.0, chi).unwrap());
        assert!((v - 1.0).abs() < 1e-12);
    }
}

#[test]
fn psr_angle_examples() {
    assert_eq!(psr_angle(0.0, 0.1), 0.0);
    assert!((psr_angle(5.0, 0.0349) - 0.1745).abs() < 1e-12);
    assert!((psr_angle(13.0, 0.0349) - 0.4537).abs() < 1e-4);
}

proptest! {
    #[test]
    fn variance_is_periodic_in_phase(g in -20.0f64..20.0, a in 0.0f64..5.0, chi in -10.0f64..10.0) {
        let v = |x| variance(&PhenomenologicalParams::new(g, a, x).unwrap());
        prop_assert!((v(chi) - v(chi + 2.0 * PI)).abs() <= 1e-9 * v(chi).max(1.0));
    }

    #[test]
    fn anti_squeezed_quadrature_exceeds_qnl(g in -20.0f64..20.0, a in 0.0f64..5.0) {
        prop_assume!(g != 0.0);
        let max = (0..720)
            .map(|k| variance(&PhenomenologicalParams::new(g, a, k as f64 * PI / 360.0).unwrap()))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(max >= 1.0);
    }

    #[test]
    fn variance_is_bounded_below_by_admixed_vacuum(g in -20.0f64..20.0, a in 0.0f64..5.0, chi in 0.0f64..6.3) {
        let v = variance(&PhenomenologicalParams::new(g, a, chi).unwrap());
        prop_assert!(v >= (1.0 - (-a).exp()) - 1e-15);
    }

    #[test]
    fn loss_degrades_monotonically(g in 0.01f64..20.0) {
        let mut last = 0.0;
        for k in 0..50 {
            let v = optimal_phase(g, k as f64 * 0.1).unwrap().variance;
            prop_assert!(v >= last - 1e-15);
            last = v;
        }
    }
}
