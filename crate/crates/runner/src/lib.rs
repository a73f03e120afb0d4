//! Experiment runner for the LLP learners: JSON configurations, single runs,
//! sweeps over horizons and `β`, side-by-side comparisons, and deterministic
//! CSV/JSON traces with optional SVG charts.

pub mod compare;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod run;
pub mod sweep;

pub use compare::{compare, CompareOutcome};
pub use config::{RunConfig, SweepConfig, TraceFormat};
pub use error::{RunnerError, RunnerResult};
pub use run::{bench, execute, run, RunOutcome, Summary};
pub use sweep::{sweep, SweepOutcome};

/// Worker-pool size from `LLP_WORKERS`, defaulting to the available parallelism.
pub fn worker_count() -> usize {
    std::env::var("LLP_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub(crate) fn pool() -> RunnerResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| RunnerError::Runtime(format!("worker pool: {e}")))
}
