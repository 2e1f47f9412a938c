use psr_core::ensemble::{fit, FitOptions, FitParams, Trace, TraceKind};
use serde_json::json;

use super::Context;
use crate::config::{medium, section, TraceFileKind};
use crate::error::CliError;
use crate::ingest::{read_columns, read_polarimeter};
use crate::output::{num, Report, Table};

/// Least-squares fit of the composite model to measured traces.
pub fn run(ctx: &Context) -> Result<Report, CliError> {
    let cfg = &ctx.config;
    let fc = section(&cfg.fit, "fit")?;
    let m = medium(cfg)?;
    let mut traces = Vec::new();
    for tf in &fc.traces {
        let path = ctx.base_dir.join(&tf.file);
        let (kind, rows): (TraceKind, Vec<(f64, f64)>) = match tf.kind {
            TraceFileKind::Transmission | TraceFileKind::Rotation => {
                let kind = if tf.kind == TraceFileKind::Transmission {
                    TraceKind::Transmission
                } else {
                    TraceKind::Rotation
                };
                let rows = read_columns(&path, &["detuning_ghz", "value"])?;
                (kind, rows.into_iter().map(|(_, v)| (v[0], v[1])).collect())
            }
            TraceFileKind::Polarimeter => {
                let eps = cfg.beam.ellipticity;
                if eps == 0.0 {
                    return Err(CliError::Config(
                        "beam.ellipticity must be nonzero to convert polarimeter traces".into(),
                    ));
                }
                let rows = read_polarimeter(&path)?;
                (
                    TraceKind::Rotation,
                    rows.into_iter().map(|r| (r[0], r[3] / eps)).collect(),
                )
            }
        };
        traces.push(Trace {
            kind,
            power_mw: tf.power_mw,
            detuning_ghz: rows.iter().map(|r| r.0).collect(),
            values: rows.iter().map(|r| r.1).collect(),
        });
    }
    let initial = FitParams {
        density_scale: fc.density_scale,
        offset_ghz: fc.offset_ghz,
        intensity_scales: vec![fc.intensity_scale],
        strengths: m.manifold.lines().iter().map(|l| l.strength).collect(),
    };
    let opts = FitOptions {
        per_trace_intensity: fc.per_trace_intensity,
        fit_strengths: fc.fit_strengths && m.manifold.lines().len() > 1,
        deplete: ctx.deplete,
        max_iterations: fc.max_iterations,
        ..Default::default()
    };
    let report = fit(
        &m.manifold,
        m.ensemble.cooperativity(),
        &m.units,
        &traces,
        &initial,
        &opts,
    )?;

    let mut table = Table::new(["quantity", "value", "stderr"]);
    let values = {
        let p = &report.params;
        let mut v = vec![p.density_scale, p.offset_ghz];
        v.extend(&p.intensity_scales);
        if opts.fit_strengths {
            v.extend(&p.strengths[1..]);
        }
        v
    };
    for (k, (name, v)) in report.names.iter().zip(&values).enumerate() {
        table.push(vec![
            name.clone(),
            num(*v),
            num(report.covariance[k][k].sqrt()),
        ]);
    }
    let total: f64 = report.params.strengths.iter().sum();
    for (k, s) in report.params.strengths.iter().enumerate() {
        table.push(vec![
            format!("normalized_strength[{k}]"),
            num(s / total),
            String::new(),
        ]);
    }
    for (name, v) in [
        ("rms", num(report.rms)),
        ("raw_rms", num(report.raw_rms)),
        ("iterations", report.iterations.to_string()),
        ("converged", report.converged.to_string()),
        (
            "per_trace_intensity",
            report.per_trace_intensity.to_string(),
        ),
    ] {
        table.push(vec![name.to_string(), v, String::new()]);
    }
    Ok(Report {
        tables: vec![(None, table)],
        json: json!({ "report": report }),
    })
}
