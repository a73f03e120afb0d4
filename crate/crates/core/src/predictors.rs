//! Prediction bundles delivered to the learner one round ahead.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LlpError, Result};
use crate::linalg::{add_assign, clip_norm, norm, Jacobian};
use crate::problem::{
    AffineConstraint, ConstraintFn, Environment, ProblemBounds, RoundOracle, SharedConstraint, SharedCost,
};
use crate::scalar::{lit, Scalar};

/// Predicted cost for the next round.
#[derive(Debug, Clone)]
pub enum CostPrediction<T: Scalar> {
    /// A fixed gradient `c̃_t`.
    Gradient(Vec<T>),
    /// The whole predicted cost `f̃_t`; `c̃_t = ∇f̃_t(x_t)` is taken at the learner's action.
    Function(SharedCost<T>),
}

/// Predicted constraint value `g̃_t(x̃_t)`.
#[derive(Debug, Clone)]
pub enum PredictedValue<T: Scalar> {
    Known(Vec<T>),
    /// Evaluate the predicted oracle at the learner's own action, `x̃_t = x_t`.
    AtAction,
}

/// Predicted constraint Jacobian `∇g̃_t(x̃_t)` for the linearized variant.
#[derive(Debug, Clone)]
pub enum JacobianPrediction<T: Scalar> {
    Zero,
    Known(Jacobian<T>),
    AtAction,
}

#[derive(Debug, Clone)]
pub struct PredictionBundle<T: Scalar> {
    pub cost: CostPrediction<T>,
    /// `None` is the zero oracle.
    pub constraint: Option<SharedConstraint<T>>,
    pub value: PredictedValue<T>,
    pub jacobian: JacobianPrediction<T>,
}

impl<T: Scalar> PredictionBundle<T> {
    /// All predictions zero.
    pub fn zero(dim: usize, rows: usize) -> Self {
        PredictionBundle {
            cost: CostPrediction::Gradient(vec![T::zero(); dim]),
            constraint: None,
            value: PredictedValue::Known(vec![T::zero(); rows]),
            jacobian: JacobianPrediction::Zero,
        }
    }

    /// `c̃_t` given the action the learner settled on.
    pub fn cost_gradient_at(&self, x: &[T]) -> Vec<T> {
        match &self.cost {
            CostPrediction::Gradient(c) => c.clone(),
            CostPrediction::Function(f) => f.eval(x).1,
        }
    }

    /// `g̃_t(x̃_t)` given the action the learner settled on.
    pub fn value_at(&self, x: &[T], rows: usize) -> Vec<T> {
        match &self.value {
            PredictedValue::Known(v) => v.clone(),
            PredictedValue::AtAction => self
                .constraint
                .as_ref()
                .map_or_else(|| vec![T::zero(); rows], |g| g.values(x)),
        }
    }

    /// `∇g̃_t(x)` of the predicted oracle.
    pub fn oracle_jacobian_at(&self, x: &[T], rows: usize) -> Jacobian<T> {
        self.constraint
            .as_ref()
            .map_or_else(|| Jacobian::zeros(rows, x.len()), |g| g.eval(x).1)
    }

    /// `∇g̃_t(x̃_t)` as used by the linearized variant.
    pub fn linearized_jacobian_at(&self, x: &[T], rows: usize) -> Jacobian<T> {
        match &self.jacobian {
            JacobianPrediction::Zero => Jacobian::zeros(rows, x.len()),
            JacobianPrediction::Known(j) => j.clone(),
            JacobianPrediction::AtAction => self.oracle_jacobian_at(x, rows),
        }
    }

    pub fn is_deferred(&self) -> bool {
        matches!(self.value, PredictedValue::AtAction)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PredictorKind {
    None,
    /// Exact next-round functions with the value taken at the learner's action.
    Perfect,
    /// Exact cost, constraint oracle and Jacobian, but zero predicted value.
    PerfectGradients,
    /// Exact predictions plus seeded uniform noise of the given level.
    Noisy {
        level: f64,
        seed: u64,
    },
    /// Predictions at the declared bounds, pointing against the truth.
    Adversarial,
}

impl PredictorKind {
    pub fn name(&self) -> &'static str {
        match self {
            PredictorKind::None => "none",
            PredictorKind::Perfect => "perfect",
            PredictorKind::PerfectGradients => "perfect_gradients",
            PredictorKind::Noisy { .. } => "noisy",
            PredictorKind::Adversarial => "adversarial",
        }
    }

    /// Builds a kind from its name; `level` and `seed` only apply to `noisy`.
    pub fn from_parts(name: &str, level: f64, seed: u64) -> Result<Self> {
        match name {
            "noisy" if level.is_finite() && level >= 0.0 => Ok(PredictorKind::Noisy { level, seed }),
            "noisy" => Err(LlpError::config("noisy predictor level must be finite and ≥ 0")),
            other => other.parse(),
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredictorKind {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(PredictorKind::None),
            "perfect" => Ok(PredictorKind::Perfect),
            "perfect_gradients" => Ok(PredictorKind::PerfectGradients),
            "noisy" => Ok(PredictorKind::Noisy { level: 0.1, seed: 0 }),
            "adversarial" => Ok(PredictorKind::Adversarial),
            _ => Err(LlpError::config(format!("unknown predictor kind `{s}`"))),
        }
    }
}

/// `g(x) + M(x − anchor) + offset`
#[derive(Debug, Clone)]
struct PerturbedOracle<T: Scalar> {
    base: SharedConstraint<T>,
    tilt: Jacobian<T>,
    anchor: Vec<T>,
    offset: Vec<T>,
}

impl<T: Scalar> ConstraintFn<T> for PerturbedOracle<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn rows(&self) -> usize {
        self.base.rows()
    }

    fn eval(&self, x: &[T]) -> (Vec<T>, Jacobian<T>) {
        let (mut v, j) = self.base.eval(x);
        let dx: Vec<T> = x.iter().zip(&self.anchor).map(|(&a, &b)| a - b).collect();
        add_assign(&mut v, &self.tilt.apply(&dx));
        add_assign(&mut v, &self.offset);
        (v, j.add(&self.tilt))
    }

    fn affine(&self) -> Option<(Jacobian<T>, Vec<T>)> {
        let (j, mut b) = self.base.affine()?;
        let shift = self.tilt.apply(&self.anchor);
        for ((bi, si), oi) in b.iter_mut().zip(shift).zip(&self.offset) {
            *bi = *bi - si + *oi;
        }
        Some((j.add(&self.tilt), b))
    }

    fn smoothness(&self) -> Option<T> {
        self.base.smoothness()
    }
}

/// Produces the bundle for round `t` from the environment's lookahead.
pub struct Predictor<T: Scalar> {
    kind: PredictorKind,
    bounds: ProblemBounds<T>,
    rng: ChaCha8Rng,
}

impl<T: Scalar> Predictor<T> {
    pub fn new(kind: PredictorKind, bounds: ProblemBounds<T>) -> Self {
        let seed = match kind {
            PredictorKind::Noisy { seed, .. } => seed,
            _ => 0,
        };
        Predictor {
            kind,
            bounds,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }

    /// Bundle for round `t`. `anchor` is the learner's latest action (or `x_0`),
    /// where imperfect predictors place `x̃_t`.
    pub fn predict(&mut self, env: &mut dyn Environment<T>, t: usize, anchor: &[T]) -> Result<PredictionBundle<T>> {
        let (n, d) = (env.dim(), env.constraints());
        if self.kind == PredictorKind::None {
            return Ok(PredictionBundle::zero(n, d));
        }
        let truth = env.peek(t).ok_or_else(|| {
            LlpError::UnsupportedScenario(format!(
                "{} predictor needs lookahead to round {t}, which the scenario does not provide",
                self.kind
            ))
        })?;
        Ok(match self.kind {
            PredictorKind::None => unreachable!(),
            PredictorKind::Perfect => PredictionBundle {
                cost: CostPrediction::Function(truth.cost.clone()),
                constraint: Some(truth.constraint.clone()),
                value: PredictedValue::AtAction,
                jacobian: JacobianPrediction::AtAction,
            },
            PredictorKind::PerfectGradients => PredictionBundle {
                cost: CostPrediction::Function(truth.cost.clone()),
                constraint: Some(truth.constraint.clone()),
                value: PredictedValue::Known(vec![T::zero(); d]),
                jacobian: JacobianPrediction::AtAction,
            },
            PredictorKind::Noisy { level, .. } => self.noisy(&truth, anchor, level),
            PredictorKind::Adversarial => self.adversarial(&truth, anchor),
        })
    }

    fn uniform(&mut self, len: usize, level: f64) -> Vec<T> {
        (0..len).map(|_| lit(level * self.rng.gen_range(-1.0..=1.0))).collect()
    }

    fn noisy(&mut self, truth: &RoundOracle<T>, anchor: &[T], level: f64) -> PredictionBundle<T> {
        let (n, d) = (anchor.len(), truth.constraint.rows());
        let mut gradient = truth.cost.eval(anchor).1;
        add_assign(&mut gradient, &self.uniform(n, level));
        clip_norm(&mut gradient, self.bounds.l_f);

        let (mut value, jacobian) = truth.constraint.eval(anchor);
        let mut tilt = self.uniform(d * n, level);
        clip_norm(&mut tilt, self.bounds.delta_m);
        let tilt = Jacobian::from_row_major(d, n, tilt).expect("shape");
        let mut offset = self.uniform(d, level);
        add_assign(&mut value, &offset);
        let raw = norm(&value);
        clip_norm(&mut value, self.bounds.g);
        if raw > self.bounds.g {
            // keep the oracle consistent with the clipped value at the anchor
            let base = truth.constraint.values(anchor);
            offset = value.iter().zip(base).map(|(&v, b)| v - b).collect();
        }
        PredictionBundle {
            cost: CostPrediction::Gradient(gradient),
            jacobian: JacobianPrediction::Known(jacobian.add(&tilt)),
            constraint: Some(Arc::new(PerturbedOracle {
                base: truth.constraint.clone(),
                tilt,
                anchor: anchor.to_vec(),
                offset,
            })),
            value: PredictedValue::Known(value),
        }
    }

    fn adversarial(&mut self, truth: &RoundOracle<T>, anchor: &[T]) -> PredictionBundle<T> {
        let (n, d) = (anchor.len(), truth.constraint.rows());
        let opposing = |v: Vec<T>, radius: T, len: usize| -> Vec<T> {
            let m = norm(&v);
            if m > T::zero() {
                v.iter().map(|&x| -radius * x / m).collect()
            } else {
                vec![radius / lit::<T>(len as f64).sqrt(); len]
            }
        };
        let gradient = opposing(truth.cost.eval(anchor).1, self.bounds.l_f, n);
        let (value, jacobian) = truth.constraint.eval(anchor);
        let value = opposing(value, self.bounds.g, d);
        let constraint = truth
            .constraint
            .affine()
            .map(|(j, b)| Arc::new(AffineConstraint::new(j, b).negated()) as SharedConstraint<T>);
        PredictionBundle {
            cost: CostPrediction::Gradient(gradient),
            constraint,
            value: PredictedValue::Known(value),
            jacobian: JacobianPrediction::Known(jacobian.scaled(-T::one())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{ScenarioKind, ScenarioSpec};

    #[test]
    fn none_is_zero_bundle() {
        let spec = ScenarioSpec::new(ScenarioKind::AlternatingLinear, 10);
        let mut env = spec.build::<f64>().unwrap();
        let mut p = Predictor::new(PredictorKind::None, *env.bounds());
        let b = p.predict(env.as_mut(), 1, &[0.0]).unwrap();
        assert_eq!(b.cost_gradient_at(&[0.3]), vec![0.0]);
        assert_eq!(b.value_at(&[0.3], 1), vec![0.0]);
        assert_eq!(b.oracle_jacobian_at(&[0.3], 1).as_slice(), &[0.0]);
    }

    #[test]
    fn perfect_matches_next_round() {
        let spec = ScenarioSpec::new(ScenarioKind::AlternatingLinear, 10);
        let mut env = spec.build::<f64>().unwrap();
        let mut p = Predictor::new(PredictorKind::Perfect, *env.bounds());
        let b = p.predict(env.as_mut(), 2, &[0.0]).unwrap();
        assert_eq!(b.cost_gradient_at(&[0.0]), vec![-4.0]);
        let g = b.constraint.as_ref().unwrap();
        assert!((g.values(&[1.0])[0] - 1.05).abs() < 1e-15);
        assert!(b.is_deferred());
        // lookahead does not disturb the stream
        assert!(env.round(1).is_ok());
        assert_eq!(env.round(2).unwrap().cost.eval(&[0.0]).1, vec![-4.0]);
    }

    #[test]
    fn adversarial_opposes_truth() {
        let spec = ScenarioSpec::new(ScenarioKind::AlternatingLinear, 10);
        let mut env = spec.build::<f64>().unwrap();
        let mut p = Predictor::new(PredictorKind::Adversarial, *env.bounds());
        let b = p.predict(env.as_mut(), 2, &[1.0]).unwrap();
        assert_eq!(b.cost_gradient_at(&[0.0]), vec![4.0]);
        assert!((b.value_at(&[0.0], 1)[0] + 1.05).abs() < 1e-15);
    }

    #[test]
    fn noisy_respects_bounds() {
        let spec = ScenarioSpec::new(ScenarioKind::RandomQuadratic, 50).with_shape(3, 2);
        let mut env = spec.build::<f64>().unwrap();
        let bounds = *env.bounds();
        let mut p = Predictor::new(PredictorKind::Noisy { level: 5.0, seed: 3 }, bounds);
        for t in 1..=50 {
            let b = p.predict(env.as_mut(), t, &[0.5, -0.5, 0.1]).unwrap();
            assert!(norm(&b.cost_gradient_at(&[0.0; 3])) <= bounds.l_f * (1.0 + 1e-12));
            assert!(norm(&b.value_at(&[0.0; 3], 2)) <= bounds.g * (1.0 + 1e-12));
            let g = b.constraint.as_ref().unwrap();
            let at_anchor = g.values(&[0.5, -0.5, 0.1]);
            let v = b.value_at(&[0.0; 3], 2);
            assert!(at_anchor.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-12));
            env.round(t).unwrap();
        }
    }

    #[test]
    fn parse_kinds() {
        assert_eq!("perfect".parse::<PredictorKind>().unwrap(), PredictorKind::Perfect);
        assert!("oracle".parse::<PredictorKind>().is_err());
        assert!(PredictorKind::from_parts("noisy", -1.0, 0).is_err());
    }
}
