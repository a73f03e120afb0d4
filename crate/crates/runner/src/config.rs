//! JSON run and sweep configurations. Unknown keys are rejected.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use llp_core::analysis::{BenchmarkKind, BenchmarkSettings};
use llp_core::predictors::PredictorKind;
use llp_core::problem::{ScenarioKind, ScenarioSpec};
use llp_core::solver::SolverSettings;
use llp_core::{LearnerConfig, ProblemBounds, Variant};
use serde::{Deserialize, Serialize};

use crate::error::{RunnerError, RunnerResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub learner: LearnerSection,
    #[serde(default)]
    pub predictor: PredictorSection,
    #[serde(default)]
    pub benchmark: BenchmarkSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub kind: String,
    pub horizon: usize,
    #[serde(default = "one")]
    pub dimension: usize,
    #[serde(default = "one")]
    pub constraints: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub variant: String,
    #[serde(default = "unit")]
    pub sigma: f64,
    #[serde(default = "unit")]
    pub a: f64,
    #[serde(default = "half")]
    pub beta: f64,
    /// Missing entries fall back to the scenario's declared constants.
    #[serde(default)]
    pub bounds: BoundsSection,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverSection,
}

fn unit() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSection {
    #[serde(rename = "L_f", default, skip_serializing_if = "Option::is_none")]
    pub l_f: Option<f64>,
    #[serde(rename = "L_g", default, skip_serializing_if = "Option::is_none")]
    pub l_g: Option<f64>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(rename = "E_m", default, skip_serializing_if = "Option::is_none")]
    pub e_m: Option<f64>,
    #[serde(rename = "Delta_m", default, skip_serializing_if = "Option::is_none")]
    pub delta_m: Option<f64>,
}

impl BoundsSection {
    /// Overrides `declared` entry by entry. `E_m` and `Δ_m` default to
    /// `2L_f` and `2L_g` of the resulting constants when left out.
    pub fn resolve(&self, declared: &ProblemBounds<f64>) -> ProblemBounds<f64> {
        let l_f = self.l_f.unwrap_or(declared.l_f);
        let l_g = self.l_g.unwrap_or(declared.l_g);
        ProblemBounds {
            l_f,
            l_g,
            g: self.g.unwrap_or(declared.g),
            d: self.d.unwrap_or(declared.d),
            f: self.f.unwrap_or(declared.f),
            e_m: self.e_m.unwrap_or(2.0 * l_f),
            delta_m: self.delta_m.unwrap_or(2.0 * l_g),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_iterations")]
    pub max_iterations: usize,
}

fn default_tolerance() -> f64 {
    1e-9
}

fn default_iterations() -> usize {
    10_000
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            tolerance: default_tolerance(),
            max_iterations: default_iterations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictorSection {
    #[serde(default = "none")]
    pub kind: String,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
}

fn none() -> String {
    "none".into()
}

fn default_level() -> f64 {
    0.1
}

impl Default for PredictorSection {
    fn default() -> Self {
        PredictorSection {
            kind: none(),
            level: default_level(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSection {
    #[serde(default = "per_round")]
    pub kind: String,
    /// Grid spacing as a fraction of the diameter bound.
    #[serde(default = "default_resolution")]
    pub grid_resolution: f64,
}

fn per_round() -> String {
    "X_T".into()
}

fn default_resolution() -> f64 {
    1e-4
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        BenchmarkSection {
            kind: per_round(),
            grid_resolution: default_resolution(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    Csv,
    Json,
}

impl TraceFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TraceFormat::Csv => "csv",
            TraceFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_path")]
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: TraceFormat,
    #[serde(default = "one")]
    pub record_every: usize,
}

fn default_path() -> PathBuf {
    PathBuf::from("trace.csv")
}

fn default_format() -> TraceFormat {
    TraceFormat::Csv
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            path: default_path(),
            format: default_format(),
            record_every: 1,
        }
    }
}

/// A run configuration with every kind parsed and checked.
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub spec: ScenarioSpec,
    pub learner: LearnerConfig<f64>,
    pub predictor: PredictorKind,
    pub benchmark_kind: BenchmarkKind,
    pub benchmark: BenchmarkSettings<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> RunnerResult<Self> {
        serde_json::from_str(text).map_err(|e| RunnerError::Config(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> RunnerResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunnerError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn scenario_spec(&self) -> RunnerResult<ScenarioSpec> {
        let s = &self.scenario;
        let kind: ScenarioKind = s.kind.parse()?;
        let mut spec = ScenarioSpec::new(kind, s.horizon)
            .with_seed(s.seed)
            .with_shape(s.dimension, s.constraints);
        spec.params = s.params.clone();
        Ok(spec)
    }

    /// Parses every kind, fills in scenario constants and validates.
    pub fn resolve(&self) -> RunnerResult<ResolvedRun> {
        let spec = self.scenario_spec()?;
        let env = spec.build::<f64>()?;
        let variant: Variant = self.learner.variant.parse()?;
        let mut learner = LearnerConfig::new(variant, self.learner.bounds.resolve(env.bounds()));
        learner.sigma = self.learner.sigma;
        learner.a = self.learner.a;
        learner.beta = self.learner.beta;
        learner.x0 = self.learner.x0.clone();
        learner.solver = SolverSettings {
            tolerance: self.learner.solver.tolerance,
            max_iterations: self.learner.solver.max_iterations,
        };
        learner.validate()?;
        let p = &self.predictor;
        let predictor = PredictorKind::from_parts(&p.kind, p.level, p.seed)?;
        let benchmark_kind: BenchmarkKind = self.benchmark.kind.parse()?;
        let benchmark = BenchmarkSettings {
            grid_resolution: self.benchmark.grid_resolution,
            ..BenchmarkSettings::default()
        };
        if !(benchmark.grid_resolution > 0.0 && benchmark.grid_resolution.is_finite()) {
            return Err(RunnerError::Config("benchmark grid_resolution must be positive".into()));
        }
        if self.output.record_every == 0 {
            return Err(RunnerError::Config("output record_every must be at least 1".into()));
        }
        Ok(ResolvedRun {
            spec,
            learner,
            predictor,
            benchmark_kind,
            benchmark,
        })
    }
}

/// One run per `(horizon, β, repetition)`; repetition `r` adds `r` to every seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: RunConfig,
    pub horizons: Vec<usize>,
    pub betas: Vec<f64>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Fit exponents on the larger half of the horizons only.
    #[serde(default = "yes")]
    pub fit_tail: bool,
}

fn yes() -> bool {
    true
}

impl SweepConfig {
    pub fn load(path: &Path) -> RunnerResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunnerError::Config(format!("cannot read {}: {e}", path.display())))?;
        let sweep: SweepConfig =
            serde_json::from_str(&text).map_err(|e| RunnerError::Config(format!("sweep config: {e}")))?;
        sweep.validate()?;
        Ok(sweep)
    }

    pub fn validate(&self) -> RunnerResult<()> {
        if self.horizons.is_empty() || self.betas.is_empty() {
            return Err(RunnerError::Config("sweep needs nonempty horizons and betas".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(RunnerError::Config("sweep horizons must be strictly increasing".into()));
        }
        if self.repetitions == 0 {
            return Err(RunnerError::Config("sweep repetitions must be at least 1".into()));
        }
        self.base.resolve().map(|_| ())
    }

    /// The run for one cell, with its own output path.
    pub fn cell(&self, horizon: usize, beta: f64, repetition: usize) -> RunConfig {
        let mut config = self.base.clone();
        config.scenario.horizon = horizon;
        config.learner.beta = beta;
        let offset = repetition as u64;
        config.scenario.seed += offset;
        config.predictor.seed += offset;
        let ext = config.output.format.extension();
        let name = format!(
            "{}_T{horizon}_beta{beta}_rep{repetition}.{ext}",
            stem(&self.base.output.path)
        );
        config.output.path = sibling(&self.base.output.path, &name);
        config
    }
}

pub(crate) fn stem(path: &Path) -> String {
    path.file_stem()
        .map_or_else(|| "trace".into(), |s| s.to_string_lossy().into_owned())
}

pub(crate) fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from(name), |dir| dir.join(name))
}
