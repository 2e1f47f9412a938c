//! Weighted least-squares fit of the composite model to measured traces.
//!
//! Levenberg–Marquardt with forward-difference Jacobians and projection onto
//! the parameter bounds. Only steps that lower the cost are accepted, so the
//! cost history is non-increasing.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{composite_point, EnsembleError, LineManifold};
use crate::params::UnitSystem;

/// Minimum number of data points across all traces.
pub const MIN_POINTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TraceKind {
    Transmission,
    Rotation,
}

/// One measured curve at a fixed input power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub kind: TraceKind,
    pub power_mw: f64,
    pub detuning_ghz: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    /// Multiplies the template cooperativity.
    pub density_scale: f64,
    /// Laser frequency offset subtracted from the trace detunings.
    pub offset_ghz: f64,
    /// mW → `I_x` calibration factor, one per distinct power (or one global).
    pub intensity_scales: Vec<f64>,
    /// Relative line strengths, renormalized by the manifold.
    pub strengths: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Intensity scales default to one per distinct trace power.
    pub per_trace_intensity: bool,
    pub fit_strengths: bool,
    pub deplete: bool,
    pub max_iterations: usize,
    pub fd_step: f64,
    /// Relative cost decrease below which the fit is converged.
    pub tolerance: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            per_trace_intensity: true,
            fit_strengths: true,
            deplete: false,
            max_iterations: 100,
            fd_step: 1e-6,
            tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub params: FitParams,
    pub names: Vec<String>,
    /// Covariance of the free parameters in `names` order.
    pub covariance: Vec<Vec<f64>>,
    /// RMS of the weighted residuals.
    pub rms: f64,
    /// RMS of the unweighted residuals.
    pub raw_rms: f64,
    /// Cost `½‖r‖²` after each accepted step, starting with the initial guess.
    pub cost_history: Vec<f64>,
    pub iterations: usize,
    pub per_trace_intensity: bool,
    pub converged: bool,
}

struct Problem<'a> {
    template: &'a LineManifold,
    cooperativity: f64,
    units: &'a UnitSystem,
    traces: &'a [Trace],
    /// Intensity-scale slot of each trace.
    slot: Vec<usize>,
    n_scales: usize,
    fit_strengths: bool,
    deplete: bool,
    weights: Vec<f64>,
    /// `(trace, index)` of every residual.
    points: Vec<(usize, usize)>,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        2 + self.n_scales
            + if self.fit_strengths {
                self.template.lines().len() - 1
            } else {
                0
            }
    }

    fn pack(&self, p: &FitParams) -> Vec<f64> {
        let mut v = vec![p.density_scale, p.offset_ghz];
        v.extend(&p.intensity_scales);
        if self.fit_strengths {
            v.extend(&p.strengths[1..]);
        }
        v
    }

    fn unpack(&self, v: &[f64], base: &FitParams) -> FitParams {
        let scales = v[2..2 + self.n_scales].to_vec();
        let strengths = if self.fit_strengths {
            let mut s = vec![base.strengths[0]];
            s.extend(&v[2 + self.n_scales..]);
            s
        } else {
            base.strengths.clone()
        };
        FitParams {
            density_scale: v[0],
            offset_ghz: v[1],
            intensity_scales: scales,
            strengths,
        }
    }

    fn names(&self) -> Vec<String> {
        let mut n = vec!["density_scale".to_string(), "offset_ghz".to_string()];
        for k in 0..self.n_scales {
            n.push(format!("intensity_scale[{k}]"));
        }
        if self.fit_strengths {
            for k in 1..self.template.lines().len() {
                n.push(format!("strength[{k}]"));
            }
        }
        n
    }

    fn project(&self, v: &mut [f64]) {
        for (k, x) in v.iter_mut().enumerate() {
            if k != 1 {
                *x = x.max(1e-9);
            }
        }
    }

    fn model(&self, p: &FitParams) -> Result<Vec<f64>, EnsembleError> {
        let manifold = self.template.with_strengths(&p.strengths)?;
        let c = self.cooperativity * p.density_scale;
        self.points
            .par_iter()
            .map(|&(t, i)| {
                let tr = &self.traces[t];
                let intensity =
                    p.intensity_scales[self.slot[t]] * self.units.intensity_from_power(tr.power_mw);
                let detuning = self
                    .units
                    .detuning_from_ghz(tr.detuning_ghz[i] - p.offset_ghz);
                match tr.kind {
                    TraceKind::Transmission => {
                        Ok(composite_point(&manifold, c, intensity, detuning, false)?.transmission)
                    }
                    TraceKind::Rotation if self.deplete => {
                        Ok(composite_point(&manifold, c, intensity, detuning, true)?.gl)
                    }
                    TraceKind::Rotation => Ok(manifold.gl(c, intensity, detuning)?),
                }
            })
            .collect()
    }

    fn residuals(&self, p: &FitParams) -> Result<DVector<f64>, EnsembleError> {
        let m = self.model(p)?;
        Ok(DVector::from_iterator(
            m.len(),
            self.points
                .iter()
                .zip(&m)
                .map(|(&(t, i), v)| (v - self.traces[t].values[i]) * self.weights[t]),
        ))
    }
}

fn validate(traces: &[Trace]) -> Result<(), EnsembleError> {
    let total: usize = traces.iter().map(|t| t.values.len()).sum();
    if total < MIN_POINTS {
        return Err(EnsembleError::InsufficientData {
            needed: MIN_POINTS,
            got: total,
        });
    }
    for (k, t) in traces.iter().enumerate() {
        if t.detuning_ghz.len() != t.values.len() {
            return Err(EnsembleError::InsufficientData {
                needed: t.detuning_ghz.len(),
                got: t.values.len(),
            });
        }
        for i in 1..t.detuning_ghz.len() {
            if t.detuning_ghz[i] <= t.detuning_ghz[i - 1] {
                return Err(EnsembleError::NotMonotone { trace: k, index: i });
            }
        }
    }
    Ok(())
}

/// Fits density scale, frequency offset, intensity calibration and line
/// strengths. `initial.strengths` must have one entry per template line and
/// `initial.intensity_scales` one entry per slot (see [`FitOptions`]).
pub fn fit(
    template: &LineManifold,
    cooperativity: f64,
    units: &UnitSystem,
    traces: &[Trace],
    initial: &FitParams,
    opts: &FitOptions,
) -> Result<FitReport, EnsembleError> {
    validate(traces)?;
    let mut powers: Vec<f64> = Vec::new();
    let slot: Vec<usize> = traces
        .iter()
        .map(|t| {
            if !opts.per_trace_intensity {
                return 0;
            }
            match powers.iter().position(|p| *p == t.power_mw) {
                Some(k) => k,
                None => {
                    powers.push(t.power_mw);
                    powers.len() - 1
                }
            }
        })
        .collect();
    let n_scales = if opts.per_trace_intensity {
        powers.len()
    } else {
        1
    };
    let weights = traces
        .iter()
        .map(|t| {
            let m = t.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m > 0.0 {
                1.0 / m
            } else {
                1.0
            }
        })
        .collect();
    let points = traces
        .iter()
        .enumerate()
        .flat_map(|(k, t)| (0..t.values.len()).map(move |i| (k, i)))
        .collect();
    let problem = Problem {
        template,
        cooperativity,
        units,
        traces,
        slot,
        n_scales,
        fit_strengths: opts.fit_strengths,
        deplete: opts.deplete,
        weights,
        points,
    };

    let mut base = initial.clone();
    if base.intensity_scales.len() != n_scales {
        let s = base.intensity_scales.first().copied().unwrap_or(1.0);
        base.intensity_scales = vec![s; n_scales];
    }
    if base.strengths.len() != template.lines().len() {
        base.strengths = template.lines().iter().map(|l| l.strength).collect();
    }
    levenberg_marquardt(&problem, &base, opts)
}

fn levenberg_marquardt(
    problem: &Problem,
    base: &FitParams,
    opts: &FitOptions,
) -> Result<FitReport, EnsembleError> {
    let n = problem.n_params();
    let mut x = problem.pack(base);
    problem.project(&mut x);
    let mut r = problem.residuals(&problem.unpack(&x, base))?;
    let m = r.len();
    let mut cost = 0.5 * r.norm_squared();
    let mut history = vec![cost];
    let mut lambda = 1e-3;
    let mut converged = cost == 0.0;
    let mut iterations = 0;
    let mut jac = DMatrix::<f64>::zeros(m, n);

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        for k in 0..n {
            let h = opts.fd_step * x[k].abs().max(1e-3);
            let mut xp = x.clone();
            xp[k] += h;
            let rp = problem.residuals(&problem.unpack(&xp, base))?;
            jac.set_column(k, &((rp - &r) / h));
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                lambda *= 10.0;
                continue;
            };
            let mut xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut xn);
            let rn = problem.residuals(&problem.unpack(&xn, base))?;
            let cost_n = 0.5 * rn.norm_squared();
            if cost_n < cost {
                let decrease = cost - cost_n;
                let moved = x
                    .iter()
                    .zip(&xn)
                    .fold(0.0f64, |a, (p, q)| a.max((p - q).abs() / p.abs().max(1e-3)));
                x = xn;
                r = rn;
                cost = cost_n;
                history.push(cost);
                lambda = (lambda / 3.0).max(1e-12);
                accepted = true;
                if decrease <= opts.tolerance * cost || moved < 1e-12 || cost < 1e-30 {
                    converged = true;
                }
                break;
            }
            lambda *= 4.0;
        }
        if !accepted {
            // no descent direction left at this precision
            converged = true;
        }
    }

    let dof = m.saturating_sub(n).max(1) as f64;
    let s2 = 2.0 * cost / dof;
    let jtj = jac.transpose() * &jac;
    let covariance = match jtj.clone().try_inverse() {
        Some(inv) => (0..n)
            .map(|i| (0..n).map(|j| s2 * inv[(i, j)]).collect())
            .collect(),
        None => vec![vec![f64::NAN; n]; n],
    };
    let params = problem.unpack(&x, base);
    let model = problem.model(&params)?;
    let raw_sq: f64 = problem
        .points
        .iter()
        .zip(&model)
        .map(|(&(t, i), v)| (v - problem.traces[t].values[i]).powi(2))
        .sum();
    let report = FitReport {
        params,
        names: problem.names(),
        covariance,
        rms: (2.0 * cost / m as f64).sqrt(),
        raw_rms: (raw_sq / m as f64).sqrt(),
        cost_history: history,
        iterations,
        per_trace_intensity: opts.per_trace_intensity,
        converged,
    };
    if !converged {
        return Err(EnsembleError::NotConverged {
            iterations,
            rms: report.rms,
            best: Box::new(report),
        });
    }
    Ok(report)
}
