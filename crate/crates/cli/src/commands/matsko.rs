use psr_core::matsko::{optimal_phase, to_db};
use serde_json::json;

use super::Context;
use crate::config::section;
use crate::error::CliError;
use crate::output::{num, Report, Table};

/// Optimal-phase variance of the phenomenological model.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let mc = section(&ctx.config.matsko, "matsko")?;
    let gs = mc.rotation_strength.values("matsko.rotation_strength")?;
    let alphas = mc.absorption.values("matsko.absorption")?;
    let mut table = Table::new([
        "rotation_strength",
        "absorption",
        "chi",
        "variance",
        "variance_db",
    ]);
    let mut rows = Vec::new();
    for &g in &gs {
        for &a in &alphas {
            if a < 0.0 {
                return Err(CliError::Config(format!(
                    "matsko.absorption: {a} is negative"
                )));
            }
            // no rotation: every phase gives the QNL
            let (chi, v) = if g == 0.0 {
                (f64::NAN, 1.0)
            } else {
                let o = optimal_phase(g, a)?;
                (o.chi, o.variance)
            };
            table.push(vec![num(g), num(a), num(chi), num(v), num(to_db(v))]);
            rows.push(json!({
                "rotation_strength": g,
                "absorption": a,
                "chi": if chi.is_nan() { None } else { Some(chi) },
                "variance": v,
                "variance_db": to_db(v),
            }));
        }
    }
    Ok(Report {
        tables: vec![(None, table)],
        json: json!({ "points": rows }),
    })
}
