use std::f64::consts::PI;

use psr_core::fluctuations::{propagate_noise_manifold, NoiseOptions};
use psr_core::matsko::to_db;
use psr_core::params::{DriveParams, SidebandGrid};
use rayon::prelude::*;
use serde_json::json;

use super::Context;
use crate::config::{medium, section, Axis};
use crate::error::CliError;
use crate::output::{num, Report, Table};

fn one_of<'a>(
    a: &'a Option<Axis>,
    b: &'a Option<Axis>,
    names: (&str, &str),
) -> Result<(bool, &'a Axis), CliError> {
    match (a, b) {
        (Some(x), None) => Ok((true, x)),
        (None, Some(y)) => Ok((false, y)),
        _ => Err(CliError::Config(format!(
            "noise: give exactly one of {} and {}",
            names.0, names.1
        ))),
    }
}

/// Quadrature noise spectra `S_θ(ω)` in dB relative to the QNL.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let cfg = &ctx.config;
    let nc = section(&cfg.noise, "noise")?;
    let m = medium(cfg)?;
    let (ghz, det_axis) = one_of(&nc.detuning_ghz, &nc.detuning, ("detuning_ghz", "detuning"))?;
    let detunings: Vec<f64> = det_axis
        .values("noise.detuning")?
        .into_iter()
        .map(|d| if ghz { m.units.detuning_from_ghz(d) } else { d })
        .collect();
    let (mw, int_axis) = one_of(&nc.power_mw, &nc.intensity, ("power_mw", "intensity"))?;
    let intensities: Vec<f64> = int_axis
        .values("noise.intensity")?
        .into_iter()
        .map(|p| {
            if mw {
                m.units.intensity_from_power(p)
            } else {
                p
            }
        })
        .collect();
    let grid = SidebandGrid::new(nc.omega.values("noise.omega")?)?;
    if nc.thetas == 0 {
        return Err(CliError::Config("noise.thetas must be at least 1".into()));
    }
    let thetas: Vec<f64> = (0..nc.thetas)
        .map(|k| k as f64 * PI / nc.thetas as f64)
        .collect();
    let opts = NoiseOptions {
        frame: nc.frame,
        drift: nc.drift,
        langevin: nc.langevin,
        deplete: ctx.deplete,
        doppler_width: m.manifold.doppler_width(),
        omega_floor: nc.omega_floor,
        ..Default::default()
    };

    let mut points = Vec::new();
    for &i in &intensities {
        for &d in &detunings {
            points.push(DriveParams::linear(i, d)?);
        }
    }
    let spectra = points
        .par_iter()
        .map(|drive| {
            propagate_noise_manifold(&m.ensemble, &m.manifold, drive, &grid, &thetas, &opts)
                .map_err(|e| {
                    CliError::numerical(
                        format_args!("I_x = {}, Δ = {}", drive.intensity(), drive.detuning()),
                        e,
                    )
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut header: Vec<String> = [
        "detuning",
        "detuning_ghz",
        "intensity",
        "power_mw",
        "omega",
        "below_floor",
        "min_db",
        "max_db",
        "theta_min",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend(thetas.iter().map(|t| format!("db@{}", num(*t))));
    let mut table = Table::new(header);
    let mut rows_json = Vec::new();
    for (drive, spec) in points.iter().zip(&spectra) {
        let (d, i) = (drive.detuning(), drive.intensity());
        for p in &spec.points {
            let mut row = vec![
                num(d),
                num(m.units.ghz_from_detuning(d)),
                num(i),
                num(m.units.power_from_intensity(i)),
                num(p.omega),
                p.below_floor.to_string(),
                num(to_db(p.min)),
                num(to_db(p.max)),
                num(p.theta_min),
            ];
            row.extend(p.values.iter().map(|v| num(to_db(*v))));
            table.push(row);
            rows_json.push(json!({
                "detuning": d,
                "intensity": i,
                "omega": p.omega,
                "below_floor": p.below_floor,
                "min_db": to_db(p.min),
                "max_db": to_db(p.max),
                "theta_min": p.theta_min,
                "db": p.values.iter().map(|v| to_db(*v)).collect::<Vec<_>>(),
            }));
        }
    }
    let evaluated = spectra
        .iter()
        .flat_map(|s| &s.points)
        .filter(|p| !p.below_floor);
    let (lo, hi) = evaluated.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| {
        (a.min(p.min), b.max(p.max))
    });
    Ok(Report {
        tables: vec![(None, table)],
        json: json!({
            "cooperativity": m.ensemble.cooperativity(),
            "doppler_width": m.manifold.doppler_width(),
            "thetas": thetas,
            "global_min_db": to_db(lo),
            "global_max_db": to_db(hi),
            "points": rows_json,
        }),
    })
}
