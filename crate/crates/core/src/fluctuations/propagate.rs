//! Covariance transport of the y-mode fluctuations through the medium.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::diffusion::diffusion_for_state;
use super::response::{langevin_signed, response_signed};
use super::FluctuationError;
use crate::bloch::symmetric_steady_state;
use crate::ensemble::{intensity_profile, DopplerRule, Integrand, LineManifold};
use crate::params::{DriveParams, EnsembleParams, SidebandGrid};

type M2 = Matrix2<Complex64>;

/// Phase reference for the output quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// Quadratures referenced to the transmitted x field, which carries the
    /// mean self-phase `−Im κ(0)` per unit z̄. This is what a local
    /// oscillator derived from the probe beam measures.
    #[default]
    MeanField,
    /// Quadratures referenced to the input phase.
    Laboratory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DriftModel {
    #[default]
    Full,
    /// `Γ → κ(ω)`: only the cross-Kerr coupling survives.
    KappaOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseOptions {
    pub frame: Frame,
    pub drift: DriftModel,
    pub langevin: bool,
    /// Follow the absorbed x-field intensity along z̄ instead of holding it
    /// at the input value.
    pub deplete: bool,
    /// Number of piecewise-constant slices when `deplete` is set.
    pub deplete_slices: usize,
    /// Doppler 1/e half-width in units of γ; zero for cold atoms.
    pub doppler_width: f64,
    /// Sideband frequencies below this are flagged and not evaluated.
    pub omega_floor: f64,
}

impl Default for NoiseOptions {
    fn default() -> Self {
        Self {
            frame: Frame::MeanField,
            drift: DriftModel::Full,
            langevin: true,
            deplete: false,
            deplete_slices: 32,
            doppler_width: 0.0,
            omega_floor: 0.01,
        }
    }
}

/// Output second moments of `v = (δâ_y(ω), δâ_y†(−ω))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputCovariance {
    /// `⟨v_i v_j†⟩`.
    pub antinormal: Matrix2<Complex64>,
    /// `⟨v_j† v_i⟩`.
    pub normal: Matrix2<Complex64>,
}

impl OutputCovariance {
    /// `diag(1, −1)` for a commutator-preserving channel.
    pub fn commutator(&self) -> Matrix2<Complex64> {
        self.antinormal - self.normal
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega: f64,
    pub below_floor: bool,
    /// `S_θ(ω)` on the requested θ grid; NaN when below the floor.
    pub values: Vec<f64>,
    /// Extremes over continuous θ.
    pub min: f64,
    pub max: f64,
    pub theta_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpectrum {
    pub thetas: Vec<f64>,
    pub points: Vec<SpectrumPoint>,
}

impl QuadratureSpectrum {
    /// Smallest `min_θ S` over the evaluated frequencies.
    pub fn global_min(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| !p.below_floor)
            .fold(f64::INFINITY, |a, p| a.min(p.min))
    }

    pub fn global_max(&self) -> f64 {
        self.points
            .iter()
            .filter(|p| !p.below_floor)
            .fold(f64::NEG_INFINITY, |a, p| a.max(p.max))
    }
}

/// Drift, antinormal diffusion and normal diffusion of one velocity class.
type Block = (M2, M2, M2);

fn class_block(
    cooperativity: f64,
    transit: f64,
    intensity: f64,
    detuning: f64,
    omega: f64,
    opts: &NoiseOptions,
) -> Result<Block, FluctuationError> {
    let rp = response_signed(cooperativity, transit, intensity, detuning, omega)?;
    let rm = response_signed(cooperativity, transit, intensity, detuning, -omega)?;
    let (a_p, a_m, k_p, k_m) = match opts.drift {
        DriftModel::Full => (rp.drift_a(), rm.drift_a(), rp.drift_adag(), rm.drift_adag()),
        DriftModel::KappaOnly => (
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            -rp.kappa,
            -rm.kappa,
        ),
    };
    let mut m = M2::new(a_p, k_p, k_m.conj(), a_m.conj());
    if opts.frame == Frame::MeanField {
        let phase = -rp.kappa0.im;
        m[(0, 0)] -= Complex64::new(0.0, phase);
        m[(1, 1)] += Complex64::new(0.0, phase);
    }

    if !opts.langevin || cooperativity == 0.0 {
        return Ok((m, M2::zeros(), M2::zeros()));
    }
    let lp = langevin_signed(intensity, detuning, omega)?;
    let lm = langevin_signed(intensity, detuning, -omega)?;
    let cp = lp.population_prefactor(intensity);
    let cm = lm.population_prefactor(intensity).conj();
    let z = Complex64::new(0.0, -omega);
    let z2 = Complex64::new(2.0, -omega);
    let w = nalgebra::Matrix2x4::new(
        lp.a_coef + lp.b_coef,
        lp.b_coef,
        cp / z,
        cp / z2,
        lm.b_coef.conj(),
        (lm.a_coef + lm.b_coef).conj(),
        cm / z,
        cm / z2,
    );
    let q = diffusion_for_state(&symmetric_steady_state(intensity, detuning))?;
    let c = Complex64::new(cooperativity, 0.0);
    let wa = w.adjoint();
    let d = (w * q.antinormal * wa) * c;
    let dn = (w * q.normal * wa) * c;
    Ok((m, hermitian(d), hermitian(dn)))
}

fn hermitian(m: M2) -> M2 {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

fn averaged_block(
    manifold: &LineManifold,
    cooperativity: f64,
    transit: f64,
    intensity: f64,
    detuning: f64,
    omega: f64,
    opts: &NoiseOptions,
) -> Result<Block, FluctuationError> {
    let rule = DopplerRule::new(manifold.doppler_width(), 1.0)?;
    let mut acc = (M2::zeros(), M2::zeros(), M2::zeros());
    for line in manifold.lines() {
        let d = detuning - line.center;
        let b = rule
            .try_average(|u| class_block(cooperativity, transit, intensity, d + u, omega, opts))?;
        acc.add_scaled(line.strength, &b);
    }
    Ok(acc)
}

fn max_abs(m: &M2) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// Propagator and accumulated noise of `dv/dz̄ = M v + noise` over `length`.
///
/// Van Loan's block exponential gives both over a short step; the step is
/// then doubled up to the full length.
fn transport(m: &M2, d: &M2, length: f64) -> (M2, M2) {
    let norm = length * (max_abs(m) + max_abs(d));
    let doublings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as i32
    } else {
        0
    };
    let h = Complex64::new(length / 2f64.powi(doublings), 0.0);
    let mut big = Matrix4::<Complex64>::zeros();
    big.fixed_view_mut::<2, 2>(0, 0).copy_from(&(-m * h));
    big.fixed_view_mut::<2, 2>(0, 2).copy_from(&(d * h));
    big.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&(m.adjoint() * h));
    let e = big.exp();
    let mut phi: M2 = e.fixed_view::<2, 2>(2, 2).adjoint();
    let mut q: M2 = phi * e.fixed_view::<2, 2>(0, 2);
    for _ in 0..doublings {
        q = phi * q * phi.adjoint() + q;
        phi = phi * phi;
    }
    (phi, hermitian(q))
}

fn transport_pair(m: &M2, d: &M2, dn: &M2, length: f64) -> (M2, M2, M2) {
    let (phi, q) = transport(m, d, length);
    let (_, qn) = transport(m, dn, length);
    (phi, q, qn)
}

/// Piecewise-constant slices `(length, intensity)` along z̄.
fn slices(
    ens: &EnsembleParams,
    manifold: &LineManifold,
    drive: &DriveParams,
    opts: &NoiseOptions,
) -> Result<Vec<(f64, f64)>, FluctuationError> {
    if !opts.deplete {
        return Ok(vec![(1.0, drive.intensity())]);
    }
    let n = opts.deplete_slices.max(1);
    let mids: Vec<f64> = (0..n).map(|k| (k as f64 + 0.5) / n as f64).collect();
    let profile = intensity_profile(
        manifold,
        ens.cooperativity(),
        drive.intensity(),
        drive.detuning(),
        &mids,
    )?;
    Ok(profile.into_iter().map(|i| (1.0 / n as f64, i)).collect())
}

fn covariance_at(
    ens: &EnsembleParams,
    manifold: &LineManifold,
    drive: &DriveParams,
    slices: &[(f64, f64)],
    omega: f64,
    opts: &NoiseOptions,
) -> Result<OutputCovariance, FluctuationError> {
    if !(omega.is_finite() && omega != 0.0) {
        return Err(FluctuationError::InvalidFrequency(omega));
    }
    let one = Complex64::new(1.0, 0.0);
    let mut c = M2::new(one, 0.0.into(), 0.0.into(), 0.0.into());
    let mut cn = M2::new(0.0.into(), 0.0.into(), 0.0.into(), one);
    for &(length, intensity) in slices {
        let (m, d, dn) = averaged_block(
            manifold,
            ens.cooperativity(),
            ens.transit_time(),
            intensity,
            drive.detuning(),
            omega,
            opts,
        )?;
        let (phi, q, qn) = transport_pair(&m, &d, &dn, length);
        c = phi * c * phi.adjoint() + q;
        cn = phi * cn * phi.adjoint() + qn;
    }
    if !(c.iter().all(|z| z.is_finite()) && cn.iter().all(|z| z.is_finite())) {
        return Err(FluctuationError::Transport {
            intensity: drive.intensity(),
            detuning: drive.detuning(),
            omega,
            reason: "non-finite covariance".into(),
        });
    }
    Ok(OutputCovariance {
        antinormal: c,
        normal: cn,
    })
}

/// Output covariance at a single (signed, nonzero) sideband frequency.
pub fn output_covariance(
    ens: &EnsembleParams,
    drive: &DriveParams,
    omega: f64,
    opts: &NoiseOptions,
) -> Result<OutputCovariance, FluctuationError> {
    let manifold = LineManifold::single(opts.doppler_width)?;
    let sl = slices(ens, &manifold, drive, opts)?;
    covariance_at(ens, &manifold, drive, &sl, omega, opts)
}

fn spectrum_point(
    ens: &EnsembleParams,
    manifold: &LineManifold,
    drive: &DriveParams,
    slices: &[(f64, f64)],
    omega: f64,
    thetas: &[f64],
    opts: &NoiseOptions,
) -> Result<SpectrumPoint, FluctuationError> {
    if omega < opts.omega_floor || omega == 0.0 {
        return Ok(SpectrumPoint {
            omega,
            below_floor: true,
            values: vec![f64::NAN; thetas.len()],
            min: f64::NAN,
            max: f64::NAN,
            theta_min: f64::NAN,
        });
    }
    let cp = covariance_at(ens, manifold, drive, slices, omega, opts)?.antinormal;
    let cm = covariance_at(ens, manifold, drive, slices, -omega, opts)?.antinormal;
    // S_θ = ½ Σ± uᵀ C(±ω) ū with u = (e^{−iθ}, e^{iθ})
    let p = 0.5 * (cp[(0, 0)] + cp[(1, 1)] + cm[(0, 0)] + cm[(1, 1)]).re;
    let r = 0.5 * (cp[(0, 1)] + cm[(0, 1)]) + 0.5 * (cp[(1, 0)] + cm[(1, 0)]).conj();
    let values: Vec<f64> = thetas
        .iter()
        .map(|t| p + (r * Complex64::from_polar(1.0, -2.0 * t)).re)
        .collect();
    let min = p - r.norm();
    if min < -1e-9 * p.abs().max(1.0) {
        return Err(FluctuationError::NegativeSpectrum { omega, value: min });
    }
    let theta_min = (0.5 * (r.arg() + std::f64::consts::PI)).rem_euclid(std::f64::consts::PI);
    Ok(SpectrumPoint {
        omega,
        below_floor: false,
        values,
        min: min.max(0.0),
        max: p + r.norm(),
        theta_min,
    })
}

/// Homodyne spectrum `S_θ(ω)` of the output y-polarized vacuum, QNL = 1.
pub fn propagate_noise(
    ens: &EnsembleParams,
    drive: &DriveParams,
    grid: &SidebandGrid,
    thetas: &[f64],
    opts: &NoiseOptions,
) -> Result<QuadratureSpectrum, FluctuationError> {
    let manifold = LineManifold::single(opts.doppler_width)?;
    propagate_noise_manifold(ens, &manifold, drive, grid, thetas, opts)
}

/// As [`propagate_noise`] for a set of hyperfine lines. The manifold's
/// Doppler width replaces `opts.doppler_width`; drift and diffusion are
/// strength-weighted sums over lines.
pub fn propagate_noise_manifold(
    ens: &EnsembleParams,
    manifold: &LineManifold,
    drive: &DriveParams,
    grid: &SidebandGrid,
    thetas: &[f64],
    opts: &NoiseOptions,
) -> Result<QuadratureSpectrum, FluctuationError> {
    let sl = slices(ens, manifold, drive, opts)?;
    let points = grid
        .frequencies()
        .par_iter()
        .map(|&w| spectrum_point(ens, manifold, drive, &sl, w, thetas, opts))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(QuadratureSpectrum {
        thetas: thetas.to_vec(),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thetas() -> Vec<f64> {
        (0..36)
            .map(|k| k as f64 * std::f64::consts::PI / 36.0)
            .collect()
    }

    #[test]
    fn empty_medium_is_the_identity_channel() {
        let ens = EnsembleParams::with_cooperativity(0.0).unwrap();
        let drive = DriveParams::linear(50.0, 3.0).unwrap();
        let grid = SidebandGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let s = propagate_noise(&ens, &drive, &grid, &thetas(), &NoiseOptions::default()).unwrap();
        for p in &s.points {
            for v in &p.values {
                assert!((v - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn commutator_is_preserved() {
        let ens = EnsembleParams::with_cooperativity(30.0).unwrap();
        let drive = DriveParams::linear(12.0, 2.5).unwrap();
        for frame in [Frame::MeanField, Frame::Laboratory] {
            let opts = NoiseOptions {
                frame,
                ..Default::default()
            };
            let c = output_covariance(&ens, &drive, 0.7, &opts).unwrap();
            let k = c.commutator();
            assert!((k[(0, 0)] - 1.0).norm() < 1e-10, "{k}");
            assert!((k[(1, 1)] + 1.0).norm() < 1e-10, "{k}");
            assert!(k[(0, 1)].norm() < 1e-10 && k[(1, 0)].norm() < 1e-10);
        }
    }

    #[test]
    fn below_floor_is_flagged() {
        let ens = EnsembleParams::with_cooperativity(5.0).unwrap();
        let drive = DriveParams::linear(2.0, 1.0).unwrap();
        let grid = SidebandGrid::new(vec![0.0, 0.005, 0.5]).unwrap();
        let s = propagate_noise(&ens, &drive, &grid, &[0.0], &NoiseOptions::default()).unwrap();
        assert!(s.points[0].below_floor && s.points[1].below_floor);
        assert!(!s.points[2].below_floor);
        assert!(s.points[0].values[0].is_nan());
    }

    #[test]
    fn extremes_bracket_the_grid() {
        let ens = EnsembleParams::with_cooperativity(20.0).unwrap();
        let drive = DriveParams::linear(40.0, 6.0).unwrap();
        let grid = SidebandGrid::new(vec![2.0]).unwrap();
        let s = propagate_noise(&ens, &drive, &grid, &thetas(), &NoiseOptions::default()).unwrap();
        let p = &s.points[0];
        for v in &p.values {
            assert!(*v >= p.min - 1e-12 && *v <= p.max + 1e-12);
        }
    }
}
