//! Single runs: simulate, benchmark, evaluate bounds, write the trace.

use std::path::Path;

use llp_core::analysis::{
    compute_benchmark, compute_metrics, evaluate_bounds, running_regret_bound, solver_slack, Benchmark, BoundReport,
    TraceMetrics,
};
use llp_core::problem::{RoundOracle, ScenarioKind};
use llp_core::{build_learner, simulate, LlpError, Predictor, Trace};
use serde::Serialize;

use crate::config::{ResolvedRun, RunConfig};
use crate::error::{RunnerError, RunnerResult};
use crate::output;

#[derive(Debug, Clone, Serialize)]
pub struct BenchmarkSummary {
    pub kind: String,
    pub feasible: bool,
    pub x_star: Option<Vec<f64>>,
    pub optimal_cost: Option<f64>,
    pub error_bar: Option<f64>,
    pub method: Option<String>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbedSummary {
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "A2")]
    pub a2: f64,
    #[serde(rename = "A3")]
    pub a3: f64,
    #[serde(rename = "A4")]
    pub a4: f64,
    #[serde(rename = "K_T")]
    pub k_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundInputs {
    pub sigma: f64,
    pub a: f64,
    pub beta: f64,
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "L_f")]
    pub l_f: f64,
    #[serde(rename = "L_g")]
    pub l_g: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub h_cum: f64,
    pub xi_sq_cum: f64,
    pub weighted_xi_sq: f64,
    pub phi: f64,
    pub mu_next: f64,
}

/// Headline numbers of a run.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub variant: String,
    pub predictor: String,
    pub horizon: usize,
    pub benchmark: BenchmarkSummary,
    /// `None` when the benchmark set is empty.
    pub regret: Option<f64>,
    pub violation: f64,
    pub violation_z: f64,
    pub bound_regret: f64,
    pub bound_violation: Option<f64>,
    pub bound_violation_z: Option<f64>,
    /// `B_T − R_T < 0` forced a clamped square root.
    pub sqrt_clamped: bool,
    pub slack: f64,
    pub regret_within_bound: Option<bool>,
    pub violation_within_bound: Option<bool>,
    pub proximal_bound: f64,
    pub nonproximal_bound: Option<f64>,
    pub perturbed: Option<PerturbedSummary>,
    pub inputs: BoundInputs,
    pub solver_warnings: usize,
    pub flagged_rounds: usize,
}

pub struct RunOutcome {
    pub config: RunConfig,
    pub resolved: ResolvedRun,
    pub trace: Trace<f64>,
    pub metrics: TraceMetrics<f64>,
    pub benchmark: Option<Benchmark<f64>>,
    pub report: BoundReport<f64>,
    pub running_bound: Vec<f64>,
    pub summary: Summary,
}

fn simulate_run(resolved: &ResolvedRun) -> RunnerResult<Trace<f64>> {
    let mut env = resolved.spec.build::<f64>()?;
    let mut learner = build_learner(resolved.learner.clone(), env.as_ref())?;
    let mut predictor = Predictor::new(resolved.predictor, resolved.learner.bounds);
    Ok(simulate(env.as_mut(), learner.as_mut(), &mut predictor)?)
}

fn benchmark_for(
    resolved: &ResolvedRun,
    oracles: &[RoundOracle<f64>],
    domain: &llp_core::ConvexSet<f64>,
) -> RunnerResult<(Option<Benchmark<f64>>, BenchmarkSummary)> {
    let kind = resolved.benchmark_kind.name().to_string();
    match compute_benchmark(oracles, domain, resolved.benchmark_kind, &resolved.benchmark) {
        Ok(b) => {
            let summary = BenchmarkSummary {
                kind,
                feasible: true,
                x_star: Some(b.x_star.clone()),
                optimal_cost: Some(b.optimal_cost),
                error_bar: Some(b.error_bar),
                method: Some(format!("{:?}", b.method).to_lowercase()),
                note: None,
            };
            Ok((Some(b), summary))
        }
        Err(LlpError::InfeasibleBenchmark(msg)) => Ok((
            None,
            BenchmarkSummary {
                kind,
                feasible: false,
                x_star: None,
                optimal_cost: None,
                error_bar: None,
                method: None,
                note: Some(format!("benchmark set is empty ({msg}); regret is undefined")),
            },
        )),
        Err(e) => Err(e.into()),
    }
}

/// Runs `config` in memory without writing anything.
pub fn execute(config: &RunConfig) -> RunnerResult<RunOutcome> {
    let resolved = config.resolve()?;
    let trace = simulate_run(&resolved)?;
    let (benchmark, bench_summary) = benchmark_for(&resolved, &trace.oracles, &trace.domain)?;
    let metrics = compute_metrics(&trace, benchmark.as_ref().map(|b| b.x_star.as_slice()))?;
    let regret = metrics.final_regret();
    let report = evaluate_bounds(&trace.records, &resolved.learner, regret.unwrap_or(0.0));
    let running_bound = running_regret_bound(&trace.records, &resolved.learner);
    let slack = solver_slack(&resolved.learner, trace.horizon());
    let violation = metrics.final_violation();
    let summary = Summary {
        scenario: resolved.spec.kind.name().into(),
        variant: resolved.learner.variant.name().into(),
        predictor: resolved.predictor.name().into(),
        horizon: trace.horizon(),
        benchmark: bench_summary,
        regret,
        violation,
        violation_z: metrics.final_violation_z(),
        bound_regret: report.b_t,
        bound_violation: regret.map(|_| report.v_bound),
        bound_violation_z: regret.map(|_| report.vz_bound),
        sqrt_clamped: regret.is_some() && report.clamped,
        slack,
        regret_within_bound: regret.map(|r| r <= report.b_t + slack),
        violation_within_bound: regret.map(|_| violation <= report.v_bound + slack),
        proximal_bound: report.proximal_bound,
        nonproximal_bound: report.nonproximal_bound,
        perturbed: report.perturbed.map(|c| PerturbedSummary {
            a1: c.a1,
            a2: c.a2,
            a3: c.a3,
            a4: c.a4,
            k_t: c.k_t,
        }),
        inputs: BoundInputs {
            sigma: report.params.sigma,
            a: report.params.a,
            beta: report.params.beta,
            d: report.params.d,
            l_f: report.params.l_f,
            l_g: report.params.l_g,
            g: report.params.g,
            h_cum: report.h_cum,
            xi_sq_cum: report.xi_sq_cum,
            weighted_xi_sq: report.weighted_xi_sq,
            phi: report.phi,
            mu_next: report.mu_next,
        },
        solver_warnings: trace.solver_warnings(),
        flagged_rounds: trace.records.iter().filter(|r| r.flags.any()).count(),
    };
    Ok(RunOutcome {
        config: config.clone(),
        resolved,
        trace,
        metrics,
        benchmark,
        report,
        running_bound,
        summary,
    })
}

/// Runs `config` and writes its trace, its summary and optionally an SVG chart.
pub fn run(config: &RunConfig, plot: Option<&Path>) -> RunnerResult<RunOutcome> {
    let outcome = execute(config)?;
    output::write_trace(&outcome)?;
    output::write_summary(&outcome)?;
    if let Some(path) = plot {
        output::write_plot(&outcome, path)?;
    }
    Ok(outcome)
}

/// Benchmark only. Oblivious scenarios are replayed without a learner; the
/// adversary reacts to actions, so it is played against the configured learner.
pub fn bench(config: &RunConfig) -> RunnerResult<BenchmarkSummary> {
    let resolved = config.resolve()?;
    let (oracles, domain) = if resolved.spec.kind == ScenarioKind::ImpossibilityAdversary {
        let trace = simulate_run(&resolved)?;
        (trace.oracles, trace.domain)
    } else {
        let mut env = resolved.spec.build::<f64>()?;
        let x0 = env.domain().project(&vec![0.0; env.dim()])?;
        let mut oracles = Vec::with_capacity(env.horizon());
        for t in 1..=env.horizon() {
            env.record_action(t, &x0);
            oracles.push(env.round(t)?);
        }
        (oracles, env.domain().clone())
    };
    let (_, summary) = benchmark_for(&resolved, &oracles, &domain)?;
    Ok(summary)
}

impl RunOutcome {
    pub fn label(&self) -> String {
        format!("{}+{}", self.summary.variant, self.summary.predictor)
    }
}

impl From<serde_json::Error> for RunnerError {
    fn from(e: serde_json::Error) -> Self {
        RunnerError::Runtime(format!("serialization: {e}"))
    }
}
