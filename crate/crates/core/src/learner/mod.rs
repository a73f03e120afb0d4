//! Online learners: the LLP family and a greedy primal-dual baseline.
//!
//! Every learner is driven through the same three calls per round:
//! [`OnlineLearner::act`] with the prediction bundle for round `t`,
//! [`OnlineLearner::observe`] once `f_t` and `g_t` are revealed, and
//! [`OnlineLearner::finish_round`] to close the round. The multiplier `λ_{t+1}`
//! depends on the bundle for round `t + 1` and is settled when that bundle
//! arrives through `act`.

mod greedy;
mod llp;

use std::fmt;
use std::str::FromStr;

pub use greedy::GreedyBaseline;
pub use llp::Llp;

use crate::error::{LlpError, Result};
use crate::linalg::DualVector;
use crate::predictors::PredictionBundle;
use crate::problem::{Environment, ProblemBounds, RoundOracle};
use crate::scalar::{lit, Scalar};
use crate::solver::SolverSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Proximal regularizers centered at past actions.
    Llp,
    /// Origin-centered regularizers with the `μ_t` inflation.
    Llp2,
    /// Constraints replaced by their first-order proxies.
    LlpLinearized,
    /// Constraints `g(x) + b_t` with a known fixed part `g`.
    LlpPerturbed,
    /// Projected primal-dual gradient steps with rate `a/√t`.
    GreedyBaseline,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Llp,
        Variant::Llp2,
        Variant::LlpLinearized,
        Variant::LlpPerturbed,
        Variant::GreedyBaseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Llp => "llp",
            Variant::Llp2 => "llp2",
            Variant::LlpLinearized => "llp_linearized",
            Variant::LlpPerturbed => "llp_perturbed",
            Variant::GreedyBaseline => "greedy_baseline",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| LlpError::config(format!("unknown learner variant `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerConfig<T> {
    pub variant: Variant,
    pub sigma: T,
    pub a: T,
    pub beta: T,
    pub bounds: ProblemBounds<T>,
    /// `None` starts at the projection of the origin.
    pub x0: Option<Vec<T>>,
    pub solver: SolverSettings<T>,
    /// Replace `G` in the dual rate by the running maximum of `‖g_t(x_t)‖`.
    /// Every round is flagged, since the guarantees assume the true bound.
    pub estimate_g: bool,
}

impl<T: Scalar> LearnerConfig<T> {
    pub fn new(variant: Variant, bounds: ProblemBounds<T>) -> Self {
        LearnerConfig {
            variant,
            sigma: T::one(),
            a: T::one(),
            beta: lit(0.5),
            bounds,
            x0: None,
            solver: SolverSettings::default(),
            estimate_g: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && v.is_finite();
        if !positive(self.sigma) || !positive(self.a) {
            return Err(LlpError::config("sigma and a must be positive and finite"));
        }
        if !(self.beta >= T::zero() && self.beta < T::one()) {
            return Err(LlpError::config("beta must lie in [0, 1)"));
        }
        self.bounds.validate()?;
        self.solver.validate()
    }
}

/// `a_t = a / max(√(4G² + Σξ²), t^β)`
pub fn dual_rate<T: Scalar>(a: T, g: T, xi_sq_cum: T, t: usize, beta: T) -> T {
    let adaptive = (lit::<T>(4.0) * g * g + xi_sq_cum).sqrt();
    a / adaptive.max(lit::<T>(t as f64).powf(beta))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoundFlags {
    pub primal_unconverged: bool,
    pub prescient_unconverged: bool,
    /// The dual rate used an estimated `G`.
    pub estimated_g: bool,
}

impl RoundFlags {
    pub fn any(&self) -> bool {
        self.primal_unconverged || self.prescient_unconverged || self.estimated_g
    }

    pub fn solver_warnings(&self) -> usize {
        usize::from(self.primal_unconverged) + usize::from(self.prescient_unconverged)
    }
}

impl fmt::Display for RoundFlags {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = [
            (self.primal_unconverged, "primal_unconverged"),
            (self.prescient_unconverged, "prescient_unconverged"),
            (self.estimated_g, "estimated_g"),
        ];
        let set: Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        f.write_str(&set.join("|"))
    }
}

/// Everything the learner computed in round `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord<T> {
    pub t: usize,
    pub x: Vec<T>,
    pub z: Vec<T>,
    /// `λ_t`, the multiplier used in round `t`.
    pub lambda: DualVector<T>,
    pub f_value: T,
    /// `g_t(x_t)`
    pub g_values: Vec<T>,
    /// `g_t(z_t)`, or its first-order proxy for the linearized variant.
    pub g_at_z: Vec<T>,
    pub epsilon_norm: T,
    pub h: T,
    pub xi: T,
    pub sigma: T,
    /// `σ_{1:t}`
    pub sigma_cum: T,
    /// Strong-convexity weight of the prescient objective.
    pub prescient_weight: T,
    pub h_cum: T,
    /// `a_t`
    pub a_t: T,
    /// `a_{t−1}`
    pub a_prev: T,
    pub xi_sq_cum: T,
    /// `μ_{t+1}` for the non-proximal variant, zero otherwise.
    pub mu_next: T,
    pub primal_residual: T,
    pub prescient_residual: T,
    pub flags: RoundFlags,
}

pub trait OnlineLearner<T: Scalar>: Send {
    fn config(&self) -> &LearnerConfig<T>;

    /// Index of the round in progress, or of the next one.
    fn round(&self) -> usize;

    /// Chooses `x_t` given the predictions for round `t`.
    fn act(&mut self, prediction: PredictionBundle<T>) -> Result<Vec<T>>;

    /// Takes in `f_t` and `g_t` after the action was played.
    fn observe(&mut self, truth: &RoundOracle<T>) -> Result<()>;

    /// Closes round `t`.
    fn finish_round(&mut self) -> Result<RoundRecord<T>>;
}

/// Builds the learner `config.variant` for `env`.
pub fn build_learner<T: Scalar>(
    config: LearnerConfig<T>,
    env: &dyn Environment<T>,
) -> Result<Box<dyn OnlineLearner<T>>> {
    Ok(match config.variant {
        Variant::GreedyBaseline => Box::new(GreedyBaseline::new(config, env)?),
        _ => Box::new(Llp::new(config, env)?),
    })
}

/// Validated starting point: `x0` or the projection of the origin.
fn starting_point<T: Scalar>(config: &LearnerConfig<T>, env: &dyn Environment<T>) -> Result<Vec<T>> {
    let domain = env.domain();
    match &config.x0 {
        Some(x0) => {
            LlpError::check_dim("x0", domain.dim(), x0.len())?;
            if !domain.contains(x0, lit(1e-12)) {
                return Err(LlpError::config("x0 must lie in the domain"));
            }
            Ok(x0.clone())
        }
        None => domain.project(&vec![T::zero(); domain.dim()]),
    }
}
