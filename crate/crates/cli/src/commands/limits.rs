use psr_core::fluctuations::{compare_limits, response};
use psr_core::params::DriveParams;
use serde_json::json;

use super::Context;
use crate::config::{medium, section};
use crate::error::CliError;
use crate::output::{num, Report, Table};

/// Full response next to each applicable asymptotic form.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let cfg = &ctx.config;
    let lc = section(&cfg.limits, "limits")?;
    let m = medium(cfg)?;
    let mut table = Table::new([
        "intensity",
        "detuning",
        "omega",
        "kappa_re",
        "kappa_im",
        "gamma_re",
        "gamma_im",
        "regime",
        "valid",
        "coefficient",
        "full_re",
        "full_im",
        "limit_re",
        "limit_im",
        "relative_error",
    ]);
    let mut out = Vec::new();
    for p in &lc.points {
        if !(p.omega >= 0.0) {
            return Err(CliError::Config(format!(
                "limits.points: ω = {} is negative",
                p.omega
            )));
        }
        let drive = DriveParams::linear(p.intensity, p.detuning)?;
        let at =
            format_args!("I_x = {}, Δ = {}, ω = {}", p.intensity, p.detuning, p.omega).to_string();
        let full =
            response(&m.ensemble, &drive, p.omega).map_err(|e| CliError::numerical(&at, e))?;
        let rows = compare_limits(&m.ensemble, &drive, p.omega)
            .map_err(|e| CliError::numerical(&at, e))?;
        let lead = vec![
            num(p.intensity),
            num(p.detuning),
            num(p.omega),
            num(full.kappa.re),
            num(full.kappa.im),
            num(full.gamma_prop.re),
            num(full.gamma_prop.im),
        ];
        for r in &rows {
            if r.coefficients.is_empty() {
                let mut row = lead.clone();
                row.extend([r.regime.name().to_string(), r.valid.to_string()]);
                row.extend(std::iter::repeat_n(String::new(), 6));
                table.push(row);
            }
            for c in &r.coefficients {
                let mut row = lead.clone();
                row.extend([
                    r.regime.name().to_string(),
                    r.valid.to_string(),
                    c.name.to_string(),
                    num(c.full.re),
                    num(c.full.im),
                    num(c.limit.re),
                    num(c.limit.im),
                    num(c.relative_error),
                ]);
                table.push(row);
            }
        }
        out.push(json!({
            "intensity": p.intensity,
            "detuning": p.detuning,
            "omega": p.omega,
            "response": full,
            "limits": rows,
        }));
    }
    Ok(Report {
        tables: vec![(None, table)],
        json: json!({ "cooperativity": m.ensemble.cooperativity(), "points": out }),
    })
}
