use psr_core::ensemble::*;
use psr_core::params::{UnitSystem, RB87_D1_GAMMA};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn units() -> UnitSystem {
    UnitSystem {
        gamma: RB87_D1_GAMMA,
        beam_waist: 425e-6,
        saturation_intensity: 44.84,
        wavelength: RB87_D1_WAVELENGTH,
        transition_strength: 1.0,
    }
}

const C: f64 = 1500.0;
const POWERS: [f64; 2] = [2.0, 22.3];

fn truth() -> FitParams {
    FitParams {
        density_scale: 1.2,
        offset_ghz: 0.03,
        intensity_scales: vec![0.8, 0.8],
        strengths: vec![0.45, 0.55],
    }
}

fn synthetic(noise: f64, seed: u64) -> Vec<Trace> {
    let u = units();
    let t = truth();
    let template = LineManifold::rb87_d1(&u, 345.15).unwrap();
    let m = template.with_strengths(&t.strengths).unwrap();
    let det: Vec<f64> = (0..61).map(|k| -0.9 + k as f64 * 0.045).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traces = Vec::new();
    for (slot, p) in POWERS.iter().enumerate() {
        let intensity = t.intensity_scales[slot] * u.intensity_from_power(*p);
        for kind in [TraceKind::Transmission, TraceKind::Rotation] {
            let clean: Vec<f64> = det
                .iter()
                .map(|d| {
                    let pt = composite_point(
                        &m,
                        C * t.density_scale,
                        intensity,
                        u.detuning_from_ghz(d - t.offset_ghz),
                        false,
                    )
                    .unwrap();
                    match kind {
                        TraceKind::Transmission => pt.transmission,
                        TraceKind::Rotation => pt.gl,
                    }
                })
                .collect();
            let scale = clean.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            let n = Normal::new(0.0, noise * scale).unwrap();
            let values = clean.iter().map(|v| v + n.sample(&mut rng)).collect();
            traces.push(Trace {
                kind,
                power_mw: *p,
                detuning_ghz: det.clone(),
                values,
            });
        }
    }
    traces
}

fn initial() -> FitParams {
    FitParams {
        density_scale: 1.0,
        offset_ghz: 0.0,
        intensity_scales: vec![1.0, 1.0],
        strengths: vec![0.5, 0.5],
    }
}

fn run(traces: &[Trace]) -> FitReport {
    let template = LineManifold::rb87_d1(&units(), 345.15).unwrap();
    fit(
        &template,
        C,
        &units(),
        traces,
        &initial(),
        &FitOptions::default(),
    )
    .unwrap()
}

fn normalized(s: &[f64]) -> Vec<f64> {
    let t: f64 = s.iter().sum();
    s.iter().map(|v| v / t).collect()
}

fn assert_close(r: &FitReport, tol: f64) {
    let t = truth();
    let p = &r.params;
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(p.density_scale, t.density_scale) < tol, "{p:?}");
    // the offset is compared against the ~0.8 GHz line spacing
    assert!((p.offset_ghz - t.offset_ghz).abs() < tol * 0.8145, "{p:?}");
    for (a, b) in p.intensity_scales.iter().zip(&t.intensity_scales) {
        assert!(rel(*a, *b) < tol, "{p:?}");
    }
    for (a, b) in normalized(&p.strengths)
        .iter()
        .zip(normalized(&t.strengths))
    {
        assert!(rel(*a, b) < tol, "{p:?}");
    }
}

#[test]
fn noiseless_data_is_reproduced() {
    let r = run(&synthetic(0.0, 1));
    assert!(r.converged);
    assert!(r.raw_rms < 1e-8, "rms {:e}", r.raw_rms);
    assert_close(&r, 1e-4);
}

#[test]
fn one_percent_noise_recovers_parameters() {
    let r = run(&synthetic(0.01, 2));
    assert_close(&r, 0.05);
    assert!(r.per_trace_intensity);
    assert_eq!(r.names.len(), r.covariance.len());
}

#[test]
fn cost_never_increases() {
    let r = run(&synthetic(0.01, 3));
    assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0]));
    assert!(r.cost_history.len() > 1);
}

#[test]
fn fit_is_deterministic() {
    let data = synthetic(0.01, 4);
    assert_eq!(run(&data), run(&data));
}

#[test]
fn too_few_points_is_rejected() {
    let mut data = synthetic(0.0, 5);
    for t in &mut data {
        t.detuning_ghz.truncate(10);
        t.values.truncate(10);
    }
    let template = LineManifold::rb87_d1(&units(), 345.15).unwrap();
    let err = fit(
        &template,
        C,
        &units(),
        &data[..2],
        &initial(),
        &FitOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, EnsembleError::InsufficientData { .. }));
}

#[test]
fn d1_transmission_dips_are_comparable_at_22_mw() {
    let data = synthetic(0.0, 6);
    let t = data
        .iter()
        .find(|t| t.kind == TraceKind::Transmission && t.power_mw == 22.3)
        .unwrap();
    // deepest absorption on each side of the midpoint between the lines
    let mid = 0.03 + 0.8145 / 2.0;
    let dip = |side: bool| {
        t.detuning_ghz
            .iter()
            .zip(&t.values)
            .filter(|(d, _)| (**d > mid) == side)
            .fold(0.0f64, |a, (_, v)| a.max(1.0 - v))
    };
    let ratio = dip(true) / dip(false);
    assert!((0.8..=1.25).contains(&ratio), "{ratio}");
}
