//! Horizon and `β` sweeps with fitted growth exponents.

use std::io::Write;
use std::path::PathBuf;

use llp_core::analysis::{fit_growth_exponent, fit_tail, GrowthFit};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{sibling, stem, SweepConfig};
use crate::error::{RunnerError, RunnerResult};
use crate::output::{create, fmt_float, write_json};
use crate::run::{run, Summary};

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub horizon: usize,
    pub beta: f64,
    pub repetition: usize,
    pub trace: PathBuf,
    /// `None` when the run failed; see `error`.
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub samples: usize,
    pub dropped_nonpositive: usize,
}

impl From<GrowthFit> for ExponentFit {
    fn from(f: GrowthFit) -> Self {
        ExponentFit {
            exponent: f.exponent,
            intercept: f.intercept,
            r_squared: f.r_squared,
            samples: f.samples,
            dropped_nonpositive: f.dropped_nonpositive,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BetaFits {
    pub beta: f64,
    /// Fit of `max(R_T, 1)`.
    pub regret: Option<ExponentFit>,
    pub regret_error: Option<String>,
    /// Fit of `max(V_T, 1)`.
    pub violation: Option<ExponentFit>,
    pub violation_error: Option<String>,
    /// Worst-case rates for comparison: `(3 − β)/4` and `(1 + β)/2`.
    pub reference_regret: f64,
    pub reference_violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub cells: Vec<SweepCell>,
    pub fits: Vec<BetaFits>,
    pub table: PathBuf,
    pub report: PathBuf,
}

fn fit(points: &[(f64, f64)], tail: bool) -> (Option<ExponentFit>, Option<String>) {
    let f = if tail {
        fit_tail(points)
    } else {
        fit_growth_exponent(points)
    };
    match f {
        Ok(f) => (Some(f.into()), None),
        Err(e) => (None, Some(e.to_string())),
    }
}

/// Runs every cell on the worker pool. Failed cells are reported, not fatal.
pub fn sweep(config: &SweepConfig) -> RunnerResult<SweepOutcome> {
    config.validate()?;
    let mut jobs = Vec::new();
    for &beta in &config.betas {
        for &horizon in &config.horizons {
            for rep in 0..config.repetitions {
                jobs.push((horizon, beta, rep));
            }
        }
    }
    let cells: Vec<SweepCell> = crate::pool()?.install(|| {
        jobs.par_iter()
            .map(|&(horizon, beta, repetition)| {
                let cell = config.cell(horizon, beta, repetition);
                let (summary, error) = match run(&cell, None) {
                    Ok(o) => (Some(o.summary), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                SweepCell {
                    horizon,
                    beta,
                    repetition,
                    trace: cell.output.path,
                    summary,
                    error,
                }
            })
            .collect()
    });

    let fits = config
        .betas
        .iter()
        .map(|&beta| {
            let done: Vec<&Summary> = cells
                .iter()
                .filter(|c| c.beta == beta)
                .filter_map(|c| c.summary.as_ref())
                .collect();
            let regret: Vec<(f64, f64)> = done
                .iter()
                .filter_map(|s| s.regret.map(|r| (s.horizon as f64, r.max(1.0))))
                .collect();
            let violation: Vec<(f64, f64)> = done.iter().map(|s| (s.horizon as f64, s.violation.max(1.0))).collect();
            let (regret, regret_error) = fit(&regret, config.fit_tail);
            let (violation, violation_error) = fit(&violation, config.fit_tail);
            BetaFits {
                beta,
                regret,
                regret_error,
                violation,
                violation_error,
                reference_regret: (3.0 - beta) / 4.0,
                reference_violation: (1.0 + beta) / 2.0,
            }
        })
        .collect();

    let base = &config.base.output.path;
    let table = sibling(base, &format!("{}_sweep.csv", stem(base)));
    let report = sibling(base, &format!("{}_sweep.json", stem(base)));
    let file = create(&table)?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e| RunnerError::io(&table, e);
    writeln!(w, "horizon,beta,repetition,status,regret,violation,bound_B_T,bound_V").map_err(io)?;
    for c in &cells {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        match &c.summary {
            Some(s) => writeln!(
                w,
                "{},{},{},ok,{},{},{},{}",
                c.horizon,
                c.beta,
                c.repetition,
                opt(s.regret),
                fmt_float(s.violation),
                fmt_float(s.bound_regret),
                opt(s.bound_violation)
            ),
            None => writeln!(w, "{},{},{},failed,,,,", c.horizon, c.beta, c.repetition),
        }
        .map_err(io)?;
    }
    w.flush().map_err(io)?;
    let outcome = SweepOutcome {
        cells,
        fits,
        table,
        report,
    };
    write_json(&outcome.report, &outcome)?;
    Ok(outcome)
}
