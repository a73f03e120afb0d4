//! Adaptive opponent forcing linear regret or linear violation against the
//! aggregate benchmark on `[0, 1]`.
//!
//! Rounds are grouped into blocks `I_1, J_1, I_2, J_2, …` with `|I_n| = |J_n|`.
//! During `I_n` the opponent plays `q = (−2x, 2x − 1)` until the running mean
//! of the learner's actions drops below the threshold; `J_n` then plays
//! `p = (−x, −1)` for as many rounds as `I_n` lasted.

use std::sync::Arc;

use super::functions::{AffineConstraint, AffineCost};
use super::{Environment, ProblemBounds, RoundOracle, ScenarioSpec};
use crate::error::{LlpError, Result};
use crate::scalar::{lit, to_f64, Scalar};
use crate::sets::ConvexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    I { start: usize },
    J { start: usize, target: usize },
}

pub struct ImpossibilityAdversary<T: Scalar> {
    domain: ConvexSet<T>,
    bounds: ProblemBounds<T>,
    horizon: usize,
    threshold: f64,
    p: RoundOracle<T>,
    q: RoundOracle<T>,
    block: Block,
    /// Round `recorded`'s functions, fixed before its action was seen.
    committed: Option<RoundOracle<T>>,
    recorded: usize,
    delivered: usize,
    action_sum: f64,
    checkpoints: Vec<usize>,
    block_lengths: Vec<(usize, usize)>,
}

impl<T: Scalar> ImpossibilityAdversary<T> {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.check_params(&["threshold"])?;
        spec.require_shape(Some(1), Some(1))?;
        let threshold = spec.param("threshold", 0.75);
        let two: T = lit(2.0);
        Ok(ImpossibilityAdversary {
            domain: ConvexSet::cube(T::zero(), T::one(), 1)?,
            bounds: ProblemBounds::new(two, two, T::one(), T::one(), two),
            horizon: spec.horizon,
            threshold,
            p: RoundOracle::new(
                Arc::new(AffineCost::new(vec![-T::one()], T::zero())),
                Arc::new(AffineConstraint::scalar(T::zero(), -T::one())),
            ),
            q: RoundOracle::new(
                Arc::new(AffineCost::new(vec![-two], T::zero())),
                Arc::new(AffineConstraint::scalar(two, -T::one())),
            ),
            block: Block::I { start: 1 },
            committed: None,
            recorded: 0,
            delivered: 0,
            action_sum: 0.0,
            checkpoints: Vec::new(),
            block_lengths: Vec::new(),
        })
    }

    /// Whether the next round plays `q` (an `I` block).
    pub fn in_i_block(&self) -> bool {
        matches!(self.block, Block::I { .. })
    }

    /// Completed `(|I_n|, |J_n|)` pairs.
    pub fn block_lengths(&self) -> &[(usize, usize)] {
        &self.block_lengths
    }

    fn current(&self) -> RoundOracle<T> {
        match self.block {
            Block::I { .. } => self.q.clone(),
            Block::J { .. } => self.p.clone(),
        }
    }
}

impl<T: Scalar> Environment<T> for ImpossibilityAdversary<T> {
    fn dim(&self) -> usize {
        1
    }

    fn constraints(&self) -> usize {
        1
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn domain(&self) -> &ConvexSet<T> {
        &self.domain
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        &self.bounds
    }

    fn round(&mut self, t: usize) -> Result<RoundOracle<T>> {
        if t != self.delivered + 1 || self.recorded != t {
            return Err(LlpError::UnsupportedScenario(format!(
                "adversary needs the action of round {t} recorded before the round is requested"
            )));
        }
        self.delivered = t;
        self.committed
            .take()
            .ok_or(LlpError::OutOfOrder("adversary round requested twice"))
    }

    fn peek(&mut self, t: usize) -> Option<RoundOracle<T>> {
        (t == self.recorded + 1 && t > self.delivered).then(|| self.current())
    }

    fn record_action(&mut self, t: usize, x: &[T]) {
        debug_assert_eq!(t, self.recorded + 1);
        self.committed = Some(self.current());
        self.recorded = t;
        self.action_sum += to_f64(x[0]);
        let mean = self.action_sum / t as f64;
        self.block = match self.block {
            Block::I { start } if mean < self.threshold => Block::J {
                start: t + 1,
                target: t - start + 1,
            },
            Block::J { start, target } if t + 1 - start >= target => {
                self.checkpoints.push(t);
                self.block_lengths.push((target, t + 1 - start));
                Block::I { start: t + 1 }
            }
            block => block,
        };
    }

    fn checkpoints(&self) -> &[usize] {
        &self.checkpoints
    }
}
