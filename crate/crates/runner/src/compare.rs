//! Several learners on one scenario, aligned round by round.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{RunnerError, RunnerResult};
use crate::output::{fmt_float, recorded_rounds, write_plot_panels};
use crate::plot::Series;
use crate::run::{run, RunOutcome};

pub struct CompareOutcome {
    pub outcomes: Vec<RunOutcome>,
    pub labels: Vec<String>,
    pub table: PathBuf,
}

fn validate(configs: &[RunConfig]) -> RunnerResult<()> {
    let first = configs
        .first()
        .ok_or_else(|| RunnerError::Config("compare needs at least one config".into()))?;
    if configs.iter().any(|c| c.scenario != first.scenario) {
        return Err(RunnerError::Config(
            "compared configs must share the scenario section, seed included".into(),
        ));
    }
    let paths: BTreeSet<&Path> = configs.iter().map(|c| c.output.path.as_path()).collect();
    if paths.len() != configs.len() {
        return Err(RunnerError::Config(
            "compared configs need distinct output paths".into(),
        ));
    }
    configs.iter().try_for_each(|c| c.resolve().map(|_| ()))
}

fn unique_labels(outcomes: &[RunOutcome]) -> Vec<String> {
    let base: Vec<String> = outcomes.iter().map(RunOutcome::label).collect();
    base.iter()
        .enumerate()
        .map(|(i, l)| {
            if base.iter().filter(|o| *o == l).count() > 1 {
                format!("{l}#{}", i + 1)
            } else {
                l.clone()
            }
        })
        .collect()
}

/// Runs every config on the worker pool, then writes one table with
/// `R_t/t` and the total violation `V_t` of each learner.
pub fn compare(configs: &[RunConfig], table: &Path, plot: Option<&Path>) -> RunnerResult<CompareOutcome> {
    validate(configs)?;
    let results: Vec<RunnerResult<RunOutcome>> =
        crate::pool()?.install(|| configs.par_iter().map(|c| run(c, None)).collect());
    let outcomes = results.into_iter().collect::<RunnerResult<Vec<_>>>()?;
    let labels = unique_labels(&outcomes);

    let file = crate::output::create(table)?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| RunnerError::io(table, e);
    let mut header = vec!["t".to_string()];
    for l in &labels {
        header.push(format!("{l}_avg_regret"));
        header.push(format!("{l}_violation"));
    }
    writeln!(w, "{}", header.join(",")).map_err(io)?;
    let horizon = outcomes[0].trace.horizon();
    for t in recorded_rounds(horizon, configs[0].output.record_every) {
        let mut cells = vec![t.to_string()];
        for o in &outcomes {
            let m = &o.metrics;
            cells.push(
                m.regret
                    .as_ref()
                    .map(|r| fmt_float(r[t - 1] / t as f64))
                    .unwrap_or_default(),
            );
            cells.push(fmt_float(m.violation[t - 1]));
        }
        writeln!(w, "{}", cells.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)?;

    if let Some(path) = plot {
        let mut regret = Vec::new();
        let mut violation = Vec::new();
        for (o, l) in outcomes.iter().zip(&labels) {
            let m = &o.metrics;
            if let Some(r) = &m.regret {
                regret.push(Series::new(
                    l.clone(),
                    r.iter()
                        .enumerate()
                        .map(|(i, v)| ((i + 1) as f64, v / (i + 1) as f64))
                        .collect(),
                ));
            }
            violation.push(Series::new(
                l.clone(),
                m.violation
                    .iter()
                    .enumerate()
                    .map(|(i, v)| ((i + 1) as f64, *v))
                    .collect(),
            ));
        }
        write_plot_panels(path, &[("R_t / t".into(), regret), ("V_t".into(), violation)])?;
    }
    Ok(CompareOutcome {
        outcomes,
        labels,
        table: table.to_path_buf(),
    })
}
