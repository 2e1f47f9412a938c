use serde_json::json;

use super::Context;
use crate::config::section;
use crate::error::CliError;
use crate::ingest::read_polarimeter;
use crate::output::{num, Report, Table};

/// Rotation angle from balanced-polarimeter voltages.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let pc = section(&ctx.config.polarimetry, "polarimetry")?;
    let rows = read_polarimeter(&ctx.base_dir.join(&pc.input))?;
    let mut table = Table::new(["detuning_ghz", "v1", "v2", "phi"]);
    for r in &rows {
        table.push(r.iter().map(|v| num(*v)).collect());
    }
    Ok(Report {
        tables: vec![(None, table)],
        json: json!({
            "detuning_ghz": rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
            "phi": rows.iter().map(|r| r[3]).collect::<Vec<_>>(),
        }),
    })
}
