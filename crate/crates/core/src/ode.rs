//! Adaptive Dormand–Prince 5(4) integrator for small real systems.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError<E> {
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at t = {t}")]
    MaxSteps { t: f64, max_steps: usize },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Rhs(E),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            h_init: 1e-3,
            h_min: 1e-14,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub accepted: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.y.last().expect("trajectory holds the initial point")
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `t0` to `t1`, recording every accepted step.
pub fn integrate<F, E>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError<E>>
where
    F: FnMut(f64, &[f64], &mut [f64]) -> Result<(), E>,
{
    let n = y0.len();
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut traj = Trajectory {
        t: vec![t0],
        y: vec![y0.to_vec()],
        accepted: 0,
        rejected: 0,
    };
    if span == 0.0 || n == 0 {
        return Ok(traj);
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k[0]).map_err(OdeError::Rhs)?;
    let mut h = opts.h_init.min(span);

    loop {
        if traj.accepted + traj.rejected >= opts.max_steps {
            return Err(OdeError::MaxSteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let remaining = (t1 - t) * dir;
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        let hs = h * dir;

        for i in 0..n {
            tmp[i] = y[i] + hs * A21 * k[0][i];
        }
        f(t + C2 * hs, &tmp, &mut k[1]).map_err(OdeError::Rhs)?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A31 * k[0][i] + A32 * k[1][i]);
        }
        f(t + C3 * hs, &tmp, &mut k[2]).map_err(OdeError::Rhs)?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A41 * k[0][i] + A42 * k[1][i] + A43 * k[2][i]);
        }
        f(t + C4 * hs, &tmp, &mut k[3]).map_err(OdeError::Rhs)?;
        for i in 0..n {
            tmp[i] = y[i] + hs * (A51 * k[0][i] + A52 * k[1][i] + A53 * k[2][i] + A54 * k[3][i]);
        }
        f(t + C5 * hs, &tmp, &mut k[4]).map_err(OdeError::Rhs)?;
        for i in 0..n {
            tmp[i] = y[i]
                + hs * (A61 * k[0][i]
                    + A62 * k[1][i]
                    + A63 * k[2][i]
                    + A64 * k[3][i]
                    + A65 * k[4][i]);
        }
        f(t + hs, &tmp, &mut k[5]).map_err(OdeError::Rhs)?;
        for i in 0..n {
            y_new[i] = y[i]
                + hs * (B1 * k[0][i] + B3 * k[2][i] + B4 * k[3][i] + B5 * k[4][i] + B6 * k[5][i]);
        }
        f(t + hs, &y_new, &mut k[6]).map_err(OdeError::Rhs)?;

        let mut err = 0.0;
        for i in 0..n {
            let e = hs
                * (E1 * k[0][i]
                    + E3 * k[2][i]
                    + E4 * k[3][i]
                    + E5 * k[4][i]
                    + E6 * k[5][i]
                    + E7 * k[6][i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            if h <= opts.h_min {
                return Err(OdeError::NonFinite { t });
            }
            h *= 0.1;
            traj.rejected += 1;
            continue;
        }

        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6);
            traj.accepted += 1;
            traj.t.push(t);
            traj.y.push(y.clone());
            if last {
                return Ok(traj);
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= fac;
        } else {
            traj.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            if h < opts.h_min {
                return Err(OdeError::StepUnderflow { t, h });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    #[test]
    fn exponential_decay() {
        let traj = integrate(
            |_, y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                dy[0] = -2.0 * y[0];
                Ok(())
            },
            0.0,
            3.0,
            &[1.0],
            &OdeOptions::default(),
        )
        .unwrap();
        assert!((traj.last()[0] - (-6.0f64).exp()).abs() < 1e-9);
        assert_eq!(*traj.t.last().unwrap(), 3.0);
    }

    #[test]
    fn harmonic_oscillator_backwards() {
        let traj = integrate(
            |_, y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                dy[0] = y[1];
                dy[1] = -y[0];
                Ok(())
            },
            0.0,
            -10.0,
            &[1.0, 0.0],
            &OdeOptions {
                rtol: 1e-10,
                ..Default::default()
            },
        )
        .unwrap();
        let y = traj.last();
        assert!((y[0] - 10f64.cos()).abs() < 1e-8);
        assert!((y[1] - 10f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn underflow_is_reported() {
        let res = integrate(
            |t, _: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                dy[0] = 1.0 / (1.0 - t).powi(3);
                Ok(())
            },
            0.0,
            2.0,
            &[0.0],
            &OdeOptions {
                h_min: 1e-10,
                ..Default::default()
            },
        );
        assert!(matches!(
            res,
            Err(OdeError::StepUnderflow { .. }) | Err(OdeError::NonFinite { .. })
        ));
    }

    #[test]
    fn rhs_errors_propagate() {
        let res = integrate(
            |_, _: &[f64], _: &mut [f64]| Err("boom"),
            0.0,
            1.0,
            &[0.0],
            &OdeOptions::default(),
        );
        assert_eq!(res.unwrap_err(), OdeError::Rhs("boom"));
    }
}
