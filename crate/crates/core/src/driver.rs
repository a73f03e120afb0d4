//! Runs a learner against an environment for the full horizon.

use crate::error::Result;
use crate::learner::{OnlineLearner, RoundRecord};
use crate::predictors::{PredictionBundle, Predictor};
use crate::problem::{Environment, ProblemBounds, RoundOracle};
use crate::scalar::Scalar;
use crate::sets::ConvexSet;

/// A completed run: what the learner did and what it faced.
#[derive(Debug, Clone)]
pub struct Trace<T: Scalar> {
    pub records: Vec<RoundRecord<T>>,
    pub oracles: Vec<RoundOracle<T>>,
    /// Rounds the environment marked for analysis.
    pub checkpoints: Vec<usize>,
    pub domain: ConvexSet<T>,
    pub bounds: ProblemBounds<T>,
}

impl<T: Scalar> Trace<T> {
    pub fn horizon(&self) -> usize {
        self.records.len()
    }

    /// Number of rounds with solver warnings.
    pub fn solver_warnings(&self) -> usize {
        self.records.iter().map(|r| r.flags.solver_warnings()).sum()
    }
}

/// Plays every round: predict, act, reveal, observe, close.
pub fn simulate<T: Scalar>(
    env: &mut dyn Environment<T>,
    learner: &mut dyn OnlineLearner<T>,
    predictor: &mut Predictor<T>,
) -> Result<Trace<T>> {
    let horizon = env.horizon();
    let (n, d) = (env.dim(), env.constraints());
    let mut records = Vec::with_capacity(horizon);
    let mut oracles = Vec::with_capacity(horizon);
    let mut anchor = match &learner.config().x0 {
        Some(x0) => x0.clone(),
        None => env.domain().project(&vec![T::zero(); n])?,
    };
    let mut bundle = predictor.predict(env, 1, &anchor)?;
    for t in 1..=horizon {
        let x = learner.act(bundle)?;
        env.record_action(t, &x);
        let oracle = env.round(t)?;
        learner.observe(&oracle)?;
        records.push(learner.finish_round()?);
        oracles.push(oracle);
        anchor = x;
        bundle = if t < horizon {
            predictor.predict(env, t + 1, &anchor)?
        } else {
            PredictionBundle::zero(n, d)
        };
    }
    Ok(Trace {
        records,
        oracles,
        checkpoints: env.checkpoints().to_vec(),
        domain: env.domain().clone(),
        bounds: *env.bounds(),
    })
}
