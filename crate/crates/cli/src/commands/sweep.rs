use psr_core::ensemble::{composite_spectrum, SweepGrid};
use serde_json::json;

use super::Context;
use crate::config::{medium, section};
use crate::error::CliError;
use crate::output::{num, Report, Table};

fn matrix(det: &[f64], powers: &[f64], values: &[Vec<f64>]) -> Table {
    let mut t = Table::new(
        std::iter::once("power_mw\\detuning_ghz".to_string()).chain(det.iter().map(|d| num(*d))),
    );
    for (p, row) in powers.iter().zip(values) {
        t.push(
            std::iter::once(num(*p))
                .chain(row.iter().map(|v| num(*v)))
                .collect(),
        );
    }
    t
}

/// Composite transmission and `𝒢l` maps over detuning and power.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let cfg = &ctx.config;
    let sw = section(&cfg.sweep, "sweep")?;
    let m = medium(cfg)?;
    let grid = SweepGrid::new(
        sw.detuning_ghz.values("sweep.detuning_ghz")?,
        sw.power_mw.values("sweep.power_mw")?,
    )?;
    if let Some(p) = grid.powers_mw.iter().find(|p| **p < 0.0) {
        return Err(CliError::Config(format!(
            "sweep.power_mw: negative power {p}"
        )));
    }
    let maps = composite_spectrum(
        &m.manifold,
        m.ensemble.cooperativity(),
        &m.units,
        &grid,
        ctx.deplete,
    )?;
    Ok(Report {
        tables: vec![
            (
                Some("transmission"),
                matrix(&maps.detunings_ghz, &maps.powers_mw, &maps.transmission),
            ),
            (
                Some("gl"),
                matrix(&maps.detunings_ghz, &maps.powers_mw, &maps.gl),
            ),
        ],
        json: json!({
            "cooperativity": m.ensemble.cooperativity(),
            "doppler_width": m.manifold.doppler_width(),
            "detuning_ghz": maps.detunings_ghz,
            "power_mw": maps.powers_mw,
            "transmission": maps.transmission,
            "gl": maps.gl,
        }),
    })
}
