//! Doppler and hyperfine averaging of the classical response, and model
//! fitting to measured transmission and rotation traces.

mod doppler;
mod fit;

pub use doppler::{
    doppler_average, gauss_hermite, DopplerRule, Integrand, QuadratureError, QUADRATURE_TOL,
};
pub use fit::{fit, FitOptions, FitParams, FitReport, Trace, TraceKind};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bloch::{kappa0, GL_SIGN};
use crate::ode::{self, OdeError, OdeOptions};
use crate::params::{strictly_increasing, thermal_doppler_width, ParamError, UnitSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("intensity integration failed at Δ = {detuning}, I = {intensity}: {reason}")]
    Integration {
        detuning: f64,
        intensity: f64,
        reason: String,
    },
    #[error("a line manifold needs at least one line with positive strength")]
    NoLines,
    #[error("fit needs at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("trace {trace} is not strictly increasing in detuning (index {index})")]
    NotMonotone { trace: usize, index: usize },
    #[error("fit did not converge in {iterations} iterations (best RMS {rms:e})")]
    NotConverged {
        iterations: usize,
        rms: f64,
        best: Box<FitReport>,
    },
    #[error("fit normal equations are singular")]
    SingularFit,
}

/// One hyperfine transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    /// Transition frequency offset from the reference, units of γ.
    pub center: f64,
    pub strength: f64,
}

/// Hyperfine lines sharing one Doppler distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineManifold {
    lines: Vec<Line>,
    doppler_width: f64,
}

/// Rb-87 mass in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_527;
pub const RB87_D2_WAVELENGTH: f64 = 780.241_209_686e-9;
pub const RB87_D1_WAVELENGTH: f64 = 794.978_851_156e-9;

/// `F_g = 2 → F_e = 3, 2, 1` offsets (GHz) and relative strengths.
pub const RB87_D2_LINES: [(f64, f64); 3] = [(0.0, 0.7), (-0.26665, 0.25), (-0.42360, 0.05)];
/// `F_g = 2 → F_e = 1, 2` offsets (GHz) and relative strengths.
pub const RB87_D1_LINES: [(f64, f64); 2] = [(0.0, 0.5), (0.8145, 0.5)];

impl LineManifold {
    /// Strengths are normalized to sum to one.
    pub fn new(lines: Vec<Line>, doppler_width: f64) -> Result<Self, EnsembleError> {
        if !(doppler_width >= 0.0 && doppler_width.is_finite()) {
            return Err(ParamError::Negative {
                field: "doppler_width",
                value: doppler_width,
            }
            .into());
        }
        let mut total = 0.0;
        for l in &lines {
            if !(l.strength >= 0.0 && l.strength.is_finite()) {
                return Err(ParamError::Negative {
                    field: "strength",
                    value: l.strength,
                }
                .into());
            }
            if !l.center.is_finite() {
                return Err(ParamError::NotFinite {
                    field: "center",
                    value: l.center,
                }
                .into());
            }
            total += l.strength;
        }
        if lines.is_empty() || total <= 0.0 {
            return Err(EnsembleError::NoLines);
        }
        let lines = lines
            .into_iter()
            .map(|l| Line {
                center: l.center,
                strength: l.strength / total,
            })
            .collect();
        Ok(Self {
            lines,
            doppler_width,
        })
    }

    pub fn single(doppler_width: f64) -> Result<Self, EnsembleError> {
        Self::new(
            vec![Line {
                center: 0.0,
                strength: 1.0,
            }],
            doppler_width,
        )
    }

    /// Lines given in GHz, converted with the unit system.
    pub fn from_ghz(
        lines_ghz: &[(f64, f64)],
        units: &UnitSystem,
        doppler_width: f64,
    ) -> Result<Self, EnsembleError> {
        Self::new(
            lines_ghz
                .iter()
                .map(|&(c, s)| Line {
                    center: units.detuning_from_ghz(c),
                    strength: s,
                })
                .collect(),
            doppler_width,
        )
    }

    /// Rb-87 D2 from `F_g = 2` at the given temperature.
    pub fn rb87_d2(units: &UnitSystem, temperature: f64) -> Result<Self, EnsembleError> {
        let w = thermal_doppler_width(temperature, RB87_MASS_AMU, RB87_D2_WAVELENGTH, units.gamma);
        Self::from_ghz(&RB87_D2_LINES, units, w)
    }

    /// Rb-87 D1 from `F_g = 2` at the given temperature.
    pub fn rb87_d1(units: &UnitSystem, temperature: f64) -> Result<Self, EnsembleError> {
        let w = thermal_doppler_width(temperature, RB87_MASS_AMU, RB87_D1_WAVELENGTH, units.gamma);
        Self::from_ghz(&RB87_D1_LINES, units, w)
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn doppler_width(&self) -> f64 {
        self.doppler_width
    }

    pub fn with_doppler_width(&self, doppler_width: f64) -> Result<Self, EnsembleError> {
        Self::new(self.lines.clone(), doppler_width)
    }

    /// Same lines with new relative strengths (renormalized).
    pub fn with_strengths(&self, strengths: &[f64]) -> Result<Self, EnsembleError> {
        Self::new(
            self.lines
                .iter()
                .zip(strengths)
                .map(|(l, s)| Line {
                    center: l.center,
                    strength: *s,
                })
                .collect(),
            self.doppler_width,
        )
    }

    /// Strength-weighted sum over lines of the Doppler average of
    /// `f(Δ − center + u)`.
    pub fn average<T, F>(&self, detuning: f64, homogeneous: f64, f: F) -> Result<T, QuadratureError>
    where
        T: Integrand,
        F: Fn(f64) -> T,
    {
        let rule = DopplerRule::new(self.doppler_width, homogeneous)?;
        let mut acc: Option<T> = None;
        for line in &self.lines {
            let d = detuning - line.center;
            let v = rule.average(|u| f(d + u))?;
            match acc.as_mut() {
                None => {
                    let mut z = v.zeroed();
                    z.add_scaled(line.strength, &v);
                    acc = Some(z);
                }
                Some(a) => a.add_scaled(line.strength, &v),
            }
        }
        Ok(acc.expect("manifold has at least one line"))
    }

    /// Composite `κ(0)` at intensity `I_x`.
    pub fn kappa0(
        &self,
        cooperativity: f64,
        intensity: f64,
        detuning: f64,
    ) -> Result<Complex64, QuadratureError> {
        let homogeneous = (1.0 + intensity).sqrt();
        self.average(detuning, homogeneous, |d| {
            kappa0(cooperativity, intensity, d)
        })
    }

    /// Composite `𝒢l` at fixed intensity.
    pub fn gl(
        &self,
        cooperativity: f64,
        intensity: f64,
        detuning: f64,
    ) -> Result<f64, QuadratureError> {
        Ok(GL_SIGN * self.kappa0(cooperativity, intensity, detuning)?.im)
    }
}

/// Sweep axes in laboratory units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub detunings_ghz: Vec<f64>,
    pub powers_mw: Vec<f64>,
}

impl SweepGrid {
    pub fn new(detunings_ghz: Vec<f64>, powers_mw: Vec<f64>) -> Result<Self, ParamError> {
        strictly_increasing("detunings_ghz", &detunings_ghz)?;
        strictly_increasing("powers_mw", &powers_mw)?;
        for p in &powers_mw {
            if *p < 0.0 {
                return Err(ParamError::Negative {
                    field: "powers_mw",
                    value: *p,
                });
            }
        }
        Ok(Self {
            detunings_ghz,
            powers_mw,
        })
    }
}

fn intensity_ode(
    manifold: &LineManifold,
    cooperativity: f64,
    intensity: f64,
    detuning: f64,
    z_points: &[f64],
) -> Result<Vec<f64>, EnsembleError> {
    if intensity == 0.0 || cooperativity == 0.0 {
        return Ok(vec![intensity; z_points.len()]);
    }
    let opts = OdeOptions {
        rtol: 1e-10,
        atol: 1e-10,
        h_init: 1e-3,
        h_min: 1e-12,
        max_steps: 200_000,
    };
    // y = ln I keeps the right-hand side bounded when the beam is absorbed
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| -> Result<(), QuadratureError> {
        let k = manifold.kappa0(cooperativity, y[0].exp(), detuning)?;
        dy[0] = -2.0 * k.re;
        Ok(())
    };
    let wrap = |e: OdeError<QuadratureError>| match e {
        OdeError::Rhs(q) => EnsembleError::Quadrature(q),
        other => EnsembleError::Integration {
            detuning,
            intensity,
            reason: other.to_string(),
        },
    };
    let mut out = Vec::with_capacity(z_points.len());
    let mut z = 0.0;
    let mut y = vec![intensity.ln()];
    for &zp in z_points {
        if zp > z {
            let traj = ode::integrate(rhs, z, zp, &y, &opts).map_err(wrap)?;
            y = traj.last().to_vec();
            z = zp;
        }
        out.push(y[0].exp());
    }
    Ok(out)
}

/// Intensity `I_x(z̄)` of a linearly polarized beam at each of `z_points`
/// (ascending, in `[0, 1]`), from `dI/dz̄ = −2 Re κ(0) I` with the composite
/// `κ(0)` evaluated at the local intensity.
pub fn intensity_profile(
    manifold: &LineManifold,
    cooperativity: f64,
    intensity: f64,
    detuning: f64,
    z_points: &[f64],
) -> Result<Vec<f64>, EnsembleError> {
    intensity_ode(manifold, cooperativity, intensity, detuning, z_points)
}

/// Transmission and PSR strength at one point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositePoint {
    pub transmission: f64,
    pub gl: f64,
}

/// Nodes used when averaging `𝒢l` along a depleted beam.
const DEPLETE_NODES: usize = 16;

/// `T` from the depleting intensity equation; `𝒢l` at the input intensity,
/// or averaged along z̄ over the local intensity when `deplete` is set.
pub fn composite_point(
    manifold: &LineManifold,
    cooperativity: f64,
    intensity: f64,
    detuning: f64,
    deplete: bool,
) -> Result<CompositePoint, EnsembleError> {
    let exit = intensity_ode(manifold, cooperativity, intensity, detuning, &[1.0])?[0];
    let transmission = if intensity > 0.0 {
        (exit / intensity).clamp(0.0, 1.0)
    } else {
        (-2.0 * manifold.kappa0(cooperativity, 0.0, detuning)?.re).exp()
    };
    let gl = if deplete && intensity > 0.0 {
        let mids: Vec<f64> = (0..DEPLETE_NODES)
            .map(|k| (k as f64 + 0.5) / DEPLETE_NODES as f64)
            .collect();
        let profile = intensity_ode(manifold, cooperativity, intensity, detuning, &mids)?;
        let mut acc = 0.0;
        for i in profile {
            acc += manifold.gl(cooperativity, i, detuning)?;
        }
        acc / DEPLETE_NODES as f64
    } else {
        manifold.gl(cooperativity, intensity, detuning)?
    };
    // `+ 0.0` turns a signed zero into 0
    Ok(CompositePoint {
        transmission,
        gl: gl + 0.0,
    })
}

/// Maps aligned with a [`SweepGrid`]: row index is power, column is detuning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeMaps {
    pub detunings_ghz: Vec<f64>,
    pub powers_mw: Vec<f64>,
    pub transmission: Vec<Vec<f64>>,
    pub gl: Vec<Vec<f64>>,
}

/// Composite `T` and `𝒢l` over a sweep grid. Grid points run in parallel and
/// are gathered in grid order.
pub fn composite_spectrum(
    manifold: &LineManifold,
    cooperativity: f64,
    units: &UnitSystem,
    grid: &SweepGrid,
    deplete: bool,
) -> Result<CompositeMaps, EnsembleError> {
    let nd = grid.detunings_ghz.len();
    let points: Vec<(f64, f64)> = grid
        .powers_mw
        .iter()
        .flat_map(|p| grid.detunings_ghz.iter().map(move |d| (*p, *d)))
        .collect();
    let values = points
        .par_iter()
        .map(|&(p, d)| {
            composite_point(
                manifold,
                cooperativity,
                units.intensity_from_power(p),
                units.detuning_from_ghz(d),
                deplete,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut transmission = Vec::with_capacity(grid.powers_mw.len());
    let mut gl = Vec::with_capacity(grid.powers_mw.len());
    for row in values.chunks(nd) {
        transmission.push(row.iter().map(|v| v.transmission).collect());
        gl.push(row.iter().map(|v| v.gl).collect());
    }
    Ok(CompositeMaps {
        detunings_ghz: grid.detunings_ghz.clone(),
        powers_mw: grid.powers_mw.clone(),
        transmission,
        gl,
    })
}
