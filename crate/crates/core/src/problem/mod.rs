//! Per-round oracles, declared problem constants and the environments that produce them.

mod adversary;
mod functions;
mod scenarios;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use adversary::ImpossibilityAdversary;
pub use functions::{
    constraint_norm, zero_constraint, AffineConstraint, AffineCost, ClosureConstraint, ClosureCost, ConstraintFn,
    CostFn, QuadraticCost, QuadraticForm, SharedConstraint, SharedCost, ShiftedConstraint,
};
pub use scenarios::{
    AlternatingLinear, Oblivious, PerturbedLinear, RandomQuadratic, RoundSource, StochasticConstraint,
};

use crate::error::{LlpError, Result};
use crate::scalar::Scalar;
use crate::sets::ConvexSet;

/// The cost `f_t` and constraint `g_t` revealed after round `t`.
#[derive(Debug, Clone)]
pub struct RoundOracle<T: Scalar> {
    pub cost: SharedCost<T>,
    pub constraint: SharedConstraint<T>,
}

impl<T: Scalar> RoundOracle<T> {
    pub fn new(cost: SharedCost<T>, constraint: SharedConstraint<T>) -> Self {
        RoundOracle { cost, constraint }
    }

    pub fn from_parts(cost: impl CostFn<T> + 'static, constraint: impl ConstraintFn<T> + 'static) -> Self {
        RoundOracle {
            cost: Arc::new(cost),
            constraint: Arc::new(constraint),
        }
    }
}

/// Lipschitz and magnitude constants the learners and bounds rely on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemBounds<T> {
    /// `‖∇f_t‖ ≤ L_f`
    pub l_f: T,
    /// `‖∇g_t‖ ≤ L_g`
    pub l_g: T,
    /// `‖g_t(x)‖ ≤ G`
    pub g: T,
    /// `‖x‖ ≤ D`
    pub d: T,
    /// `|f_t(x)| ≤ F`
    pub f: T,
    /// `‖ε_t‖ ≤ E_m`
    pub e_m: T,
    /// `‖δ_t‖ ≤ Δ_m`
    pub delta_m: T,
}

impl<T: Scalar> ProblemBounds<T> {
    /// Prediction-error bounds default to the worst case `E_m = 2L_f`, `Δ_m = 2L_g`.
    pub fn new(l_f: T, l_g: T, g: T, d: T, f: T) -> Self {
        let two = T::one() + T::one();
        ProblemBounds {
            l_f,
            l_g,
            g,
            d,
            f,
            e_m: two * l_f,
            delta_m: two * l_g,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.l_f, self.l_g, self.g, self.d, self.f, self.e_m, self.delta_m];
        if all.iter().all(|v| *v > T::zero() && v.is_finite()) {
            Ok(())
        } else {
            Err(LlpError::config("problem bounds must be strictly positive and finite"))
        }
    }
}

/// A source of rounds, possibly reacting to the learner's actions.
pub trait Environment<T: Scalar>: Send {
    fn dim(&self) -> usize;
    fn constraints(&self) -> usize;
    fn horizon(&self) -> usize;
    fn domain(&self) -> &ConvexSet<T>;
    fn bounds(&self) -> &ProblemBounds<T>;

    /// Oracle for round `t`; rounds are requested in order starting at 1.
    fn round(&mut self, t: usize) -> Result<RoundOracle<T>>;

    /// Round `t` ahead of time, for predictors with lookahead. `None` when the
    /// environment cannot reveal it yet.
    fn peek(&mut self, _t: usize) -> Option<RoundOracle<T>> {
        None
    }

    /// Informs adaptive environments of the learner's action.
    fn record_action(&mut self, _t: usize, _x: &[T]) {}

    /// The fixed component `g` of linearly perturbed constraints `g(x) + b_t`.
    fn base_constraint(&self) -> Option<SharedConstraint<T>> {
        None
    }

    /// Rounds the environment marks as analysis checkpoints.
    fn checkpoints(&self) -> &[usize] {
        &[]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    AlternatingLinear,
    StochasticConstraint,
    ImpossibilityAdversary,
    PerturbedLinear,
    RandomQuadratic,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::AlternatingLinear,
        ScenarioKind::StochasticConstraint,
        ScenarioKind::ImpossibilityAdversary,
        ScenarioKind::PerturbedLinear,
        ScenarioKind::RandomQuadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::AlternatingLinear => "alternating_linear",
            ScenarioKind::StochasticConstraint => "stochastic_constraint",
            ScenarioKind::ImpossibilityAdversary => "impossibility_adversary",
            ScenarioKind::PerturbedLinear => "perturbed_linear",
            ScenarioKind::RandomQuadratic => "random_quadratic",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| LlpError::config(format!("unknown scenario kind `{s}`")))
    }
}

/// Everything needed to rebuild a scenario bit-exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub horizon: usize,
    pub dimension: usize,
    pub constraints: usize,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
}

impl ScenarioSpec {
    pub fn new(kind: ScenarioKind, horizon: usize) -> Self {
        ScenarioSpec {
            kind,
            horizon,
            dimension: 1,
            constraints: 1,
            seed: 0,
            params: BTreeMap::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_shape(mut self, dimension: usize, constraints: usize) -> Self {
        self.dimension = dimension;
        self.constraints = constraints;
        self
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub(crate) fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub(crate) fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(LlpError::config(format!(
                "unknown parameter `{k}` for scenario {}",
                self.kind
            ))),
            None => Ok(()),
        }
    }

    pub(crate) fn require_shape(&self, dimension: Option<usize>, constraints: Option<usize>) -> Result<()> {
        if let Some(n) = dimension {
            if self.dimension != n {
                return Err(LlpError::config(format!("{} requires dimension {n}", self.kind)));
            }
        }
        if let Some(d) = constraints {
            if self.constraints != d {
                return Err(LlpError::config(format!("{} requires {d} constraint(s)", self.kind)));
            }
        }
        Ok(())
    }

    /// Builds a fresh environment positioned before round 1.
    pub fn build<T: Scalar>(&self) -> Result<Box<dyn Environment<T>>> {
        if self.horizon == 0 {
            return Err(LlpError::config("horizon must be at least 1"));
        }
        if self.dimension == 0 || self.constraints == 0 {
            return Err(LlpError::config("dimension and constraints must be at least 1"));
        }
        if self.params.values().any(|v| !v.is_finite()) {
            return Err(LlpError::config("scenario parameters must be finite"));
        }
        Ok(match self.kind {
            ScenarioKind::AlternatingLinear => Box::new(Oblivious::new(AlternatingLinear::new(self)?, self.horizon)),
            ScenarioKind::StochasticConstraint => {
                Box::new(Oblivious::new(StochasticConstraint::new(self)?, self.horizon))
            }
            ScenarioKind::ImpossibilityAdversary => Box::new(ImpossibilityAdversary::new(self)?),
            ScenarioKind::PerturbedLinear => Box::new(Oblivious::new(PerturbedLinear::new(self)?, self.horizon)),
            ScenarioKind::RandomQuadratic => Box::new(Oblivious::new(RandomQuadratic::new(self)?, self.horizon)),
        })
    }
}
