use crate::error::{LlpError, Result};
use crate::linalg::{add, axpy, norm, positive_part, DualVector};
use crate::predictors::PredictionBundle;
use crate::problem::{Environment, RoundOracle};
use crate::scalar::{lit, Scalar};
use crate::sets::ConvexSet;

use super::{starting_point, LearnerConfig, OnlineLearner, RoundFlags, RoundRecord, Variant};

/// Greedy saddle-point steps with rate `η_t = a/√t`; ignores predictions.
///
/// `x_{t+1} = P(x_t − η_t(c_t + ∇g_t(x_t)ᵀλ_t))`, `λ_{t+1} = [λ_t + η_t g_t(x_t)]_+`.
pub struct GreedyBaseline<T: Scalar> {
    config: LearnerConfig<T>,
    domain: ConvexSet<T>,
    t: usize,
    x: Vec<T>,
    lambda: Vec<T>,
    played: bool,
    observed: Option<Observation<T>>,
}

struct Observation<T> {
    f_value: T,
    cost_grad: Vec<T>,
    g_values: Vec<T>,
    direction: Vec<T>,
}

impl<T: Scalar> GreedyBaseline<T> {
    pub fn new(config: LearnerConfig<T>, env: &dyn Environment<T>) -> Result<Self> {
        config.validate()?;
        if config.variant != Variant::GreedyBaseline {
            return Err(LlpError::config("GreedyBaseline needs the greedy_baseline variant"));
        }
        Ok(GreedyBaseline {
            x: starting_point(&config, env)?,
            domain: env.domain().clone(),
            lambda: vec![T::zero(); env.constraints()],
            t: 1,
            played: false,
            observed: None,
            config,
        })
    }

    fn rate(&self) -> T {
        self.config.a / lit::<T>(self.t as f64).sqrt()
    }
}

impl<T: Scalar> OnlineLearner<T> for GreedyBaseline<T> {
    fn config(&self) -> &LearnerConfig<T> {
        &self.config
    }

    fn round(&self) -> usize {
        self.t
    }

    fn act(&mut self, _prediction: PredictionBundle<T>) -> Result<Vec<T>> {
        if self.played {
            return Err(LlpError::OutOfOrder("act called twice in one round"));
        }
        self.played = true;
        Ok(self.x.clone())
    }

    fn observe(&mut self, truth: &RoundOracle<T>) -> Result<()> {
        if !self.played || self.observed.is_some() {
            return Err(LlpError::OutOfOrder("observe needs an action and no prior observation"));
        }
        let (f, c) = truth.cost.eval(&self.x);
        let (g, j) = truth.constraint.eval(&self.x);
        LlpError::check_dim("constraint rows", self.lambda.len(), g.len())?;
        let direction = add(&c, &j.transpose_apply(&self.lambda));
        self.observed = Some(Observation {
            f_value: f,
            cost_grad: c,
            g_values: g,
            direction,
        });
        Ok(())
    }

    fn finish_round(&mut self) -> Result<RoundRecord<T>> {
        let Observation {
            f_value,
            cost_grad: c,
            g_values,
            direction,
        } = self
            .observed
            .take()
            .ok_or(LlpError::OutOfOrder("finish_round needs an observed round"))?;
        let eta = self.rate();
        let mut step = self.x.clone();
        axpy(&mut step, -eta, &direction);
        let next_x = self.domain.project_unchecked(&step);
        let mut dual = self.lambda.clone();
        axpy(&mut dual, eta, &g_values);
        let next_lambda = positive_part(&dual);

        let record = RoundRecord {
            t: self.t,
            x: self.x.clone(),
            z: self.x.clone(),
            lambda: DualVector::from_positive_part(&self.lambda),
            f_value,
            g_at_z: g_values.clone(),
            g_values,
            epsilon_norm: norm(&c),
            h: T::zero(),
            xi: T::zero(),
            sigma: T::zero(),
            sigma_cum: T::zero(),
            prescient_weight: T::zero(),
            h_cum: T::zero(),
            a_t: eta,
            a_prev: if self.t == 1 {
                eta
            } else {
                self.config.a / lit::<T>((self.t - 1) as f64).sqrt()
            },
            xi_sq_cum: T::zero(),
            mu_next: T::zero(),
            primal_residual: T::zero(),
            prescient_residual: T::zero(),
            flags: RoundFlags::default(),
        };
        self.x = next_x;
        self.lambda = next_lambda;
        self.t += 1;
        self.played = false;
        Ok(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{AffineConstraint, AffineCost, ProblemBounds, ScenarioKind, ScenarioSpec};

    #[test]
    fn one_gradient_step() {
        let env = ScenarioSpec::new(ScenarioKind::AlternatingLinear, 4)
            .build::<f64>()
            .unwrap();
        let mut cfg = LearnerConfig::new(Variant::GreedyBaseline, ProblemBounds::new(1.0, 1.0, 1.0, 1.0, 1.0));
        cfg.x0 = Some(vec![0.0]);
        let mut learner = GreedyBaseline::new(cfg, env.as_ref()).unwrap();
        let truth = RoundOracle::from_parts(AffineCost::new(vec![-1.0], 0.0), AffineConstraint::scalar(0.0, -0.5));
        assert_eq!(learner.act(PredictionBundle::zero(1, 1)).unwrap(), vec![0.0]);
        learner.observe(&truth).unwrap();
        learner.finish_round().unwrap();
        assert_eq!(learner.act(PredictionBundle::zero(1, 1)).unwrap(), vec![1.0]);
        assert_eq!(learner.lambda, vec![0.0]);
    }
}
