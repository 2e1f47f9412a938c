//! Measured-trace CSV readers.

use std::path::Path;

use crate::error::CliError;

/// Rows of a headed CSV with the expected columns, as `(line, values)`.
/// `#` lines are skipped.
pub fn read_columns(path: &Path, columns: &[&str]) -> Result<Vec<(u64, Vec<f64>)>, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .iter()
        .map(str::to_string)
        .collect();
    if header != columns {
        return Err(CliError::Data(format!(
            "{}: expected header `{}`, found `{}`",
            path.display(),
            columns.join(","),
            header.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(0, |p| p.line());
        let values = rec
            .iter()
            .map(|f| f.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| {
                CliError::Data(format!(
                    "{}:{line}: not a finite number in `{}`",
                    path.display(),
                    rec.iter().collect::<Vec<_>>().join(",")
                ))
            })?;
        out.push((line, values));
    }
    if out.is_empty() {
        return Err(CliError::Data(format!("{}: no data rows", path.display())));
    }
    Ok(out)
}

/// Polarimeter rotation `φ = (V₁ − V₂) / (2(V₁ + V₂))`.
pub fn rotation_angle(v1: f64, v2: f64) -> Option<f64> {
    let sum = v1 + v2;
    (sum > 0.0).then(|| (v1 - v2) / (2.0 * sum))
}

/// `(detuning_ghz, v1, v2, φ)` rows of a polarimeter file.
pub fn read_polarimeter(path: &Path) -> Result<Vec<[f64; 4]>, CliError> {
    read_columns(path, &["detuning_ghz", "v1", "v2"])?
        .into_iter()
        .map(|(line, v)| {
            rotation_angle(v[1], v[2])
                .map(|phi| [v[0], v[1], v[2], phi])
                .ok_or_else(|| {
                    CliError::Data(format!(
                        "{}:{line}: V1 + V2 = {} is not positive",
                        path.display(),
                        v[1] + v[2]
                    ))
                })
        })
        .collect()
}
