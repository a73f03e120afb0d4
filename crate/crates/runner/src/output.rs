//! Trace rows and the files they are written to.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{sibling, stem, TraceFormat};
use crate::error::{RunnerError, RunnerResult};
use crate::plot::{self, Series};
use crate::run::RunOutcome;

pub const CSV_COLUMNS: [&str; 13] = [
    "t",
    "f_value",
    "cum_cost",
    "regret",
    "violation_norm",
    "lambda_norm",
    "a_t",
    "sigma_cum",
    "h_cum",
    "xi_t",
    "bound_B_t",
    "solver_residual",
    "flags",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: usize,
    pub f_value: f64,
    pub cum_cost: f64,
    pub regret: Option<f64>,
    pub violation_norm: f64,
    pub lambda_norm: f64,
    pub a_t: f64,
    pub sigma_cum: f64,
    pub h_cum: f64,
    pub xi_t: f64,
    pub bound_b_t: f64,
    pub solver_residual: f64,
    pub flags: String,
}

/// Rounds `k, 2k, …` plus the final round.
pub fn recorded_rounds(horizon: usize, every: usize) -> impl Iterator<Item = usize> {
    (1..=horizon).filter(move |&t| t % every == 0 || t == horizon)
}

pub fn rows(outcome: &RunOutcome) -> Vec<TraceRow> {
    let every = outcome.config.output.record_every;
    let m = &outcome.metrics;
    recorded_rounds(outcome.trace.horizon(), every)
        .map(|t| {
            let r = &outcome.trace.records[t - 1];
            TraceRow {
                t,
                f_value: r.f_value,
                cum_cost: m.cum_cost[t - 1],
                regret: m.regret.as_ref().map(|reg| reg[t - 1]),
                violation_norm: m.violation[t - 1],
                lambda_norm: r.lambda.norm(),
                a_t: r.a_t,
                sigma_cum: r.sigma_cum,
                h_cum: r.h_cum,
                xi_t: r.xi,
                bound_b_t: outcome.running_bound[t - 1],
                solver_residual: r.primal_residual.max(r.prescient_residual),
                flags: r.flags.to_string(),
            }
        })
        .collect()
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv_rows(path: &Path, rows: &[TraceRow]) -> RunnerResult<()> {
    let file = create(path)?;
    let mut w = BufWriter::new(file);
    let io = |e| RunnerError::io(path, e);
    writeln!(w, "{}", CSV_COLUMNS.join(",")).map_err(io)?;
    for r in rows {
        let regret = r.regret.map(fmt_float).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.t,
            fmt_float(r.f_value),
            fmt_float(r.cum_cost),
            regret,
            fmt_float(r.violation_norm),
            fmt_float(r.lambda_norm),
            fmt_float(r.a_t),
            fmt_float(r.sigma_cum),
            fmt_float(r.h_cum),
            fmt_float(r.xi_t),
            fmt_float(r.bound_b_t),
            fmt_float(r.solver_residual),
            r.flags
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)
}

pub(crate) fn create(path: &Path) -> RunnerResult<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| RunnerError::io(dir, e))?;
    }
    fs::File::create(path).map_err(|e| RunnerError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> RunnerResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let mut f = create(path)?;
    f.write_all(text.as_bytes()).map_err(|e| RunnerError::io(path, e))
}

pub fn write_trace(outcome: &RunOutcome) -> RunnerResult<()> {
    let out = &outcome.config.output;
    let rows = rows(outcome);
    match out.format {
        TraceFormat::Csv => write_csv_rows(&out.path, &rows),
        TraceFormat::Json => write_json(&out.path, &serde_json::json!({ "columns": CSV_COLUMNS, "rows": rows })),
    }
}

pub fn summary_path(trace_path: &Path) -> PathBuf {
    sibling(trace_path, &format!("{}.summary.json", stem(trace_path)))
}

pub fn write_summary(outcome: &RunOutcome) -> RunnerResult<()> {
    write_json(&summary_path(&outcome.config.output.path), &outcome.summary)
}

pub fn write_plot(outcome: &RunOutcome, path: &Path) -> RunnerResult<()> {
    let m = &outcome.metrics;
    let mut panels = Vec::new();
    if let Some(regret) = &m.regret {
        let avg: Vec<(f64, f64)> = regret
            .iter()
            .enumerate()
            .map(|(i, r)| ((i + 1) as f64, r / (i + 1) as f64))
            .collect();
        panels.push(("R_t / t".to_string(), vec![Series::new(outcome.label(), avg)]));
    }
    let violation: Vec<(f64, f64)> = m
        .violation
        .iter()
        .enumerate()
        .map(|(i, v)| ((i + 1) as f64, *v))
        .collect();
    panels.push(("V_t".to_string(), vec![Series::new(outcome.label(), violation)]));
    write_plot_panels(path, &panels)
}

pub fn write_plot_panels(path: &Path, panels: &[(String, Vec<Series>)]) -> RunnerResult<()> {
    let svg = plot::render(panels);
    let mut f = create(path)?;
    f.write_all(svg.as_bytes()).map_err(|e| RunnerError::io(path, e))
}
