//! Oblivious scenario generators. Each draws its randomness from one seeded
//! ChaCha8 stream, so the sequence of rounds depends only on the spec.

use std::collections::VecDeque;
use std::marker::PhantomData;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::functions::{AffineConstraint, AffineCost, QuadraticCost, SharedConstraint, ShiftedConstraint};
use super::{Environment, ProblemBounds, RoundOracle, ScenarioSpec};
use crate::error::{LlpError, Result};
use crate::linalg::Jacobian;
use crate::scalar::{lit, Scalar};
use crate::sets::ConvexSet;

/// Produces rounds that do not depend on the learner's actions.
pub trait RoundSource<T: Scalar>: Send {
    fn domain(&self) -> &ConvexSet<T>;
    fn bounds(&self) -> &ProblemBounds<T>;
    fn constraints(&self) -> usize;
    fn generate(&mut self, t: usize) -> RoundOracle<T>;

    fn base_constraint(&self) -> Option<SharedConstraint<T>> {
        None
    }
}

/// Wraps a [`RoundSource`] with in-order delivery and a lookahead buffer.
/// Peeking generates rounds early but never changes the stream.
pub struct Oblivious<T: Scalar, S> {
    source: S,
    horizon: usize,
    delivered: usize,
    buffer: VecDeque<RoundOracle<T>>,
    _scalar: PhantomData<T>,
}

impl<T: Scalar, S: RoundSource<T>> Oblivious<T, S> {
    pub fn new(source: S, horizon: usize) -> Self {
        Oblivious {
            source,
            horizon,
            delivered: 0,
            buffer: VecDeque::new(),
            _scalar: PhantomData,
        }
    }

    fn fill_to(&mut self, t: usize) {
        while self.delivered + self.buffer.len() < t {
            let next = self.delivered + self.buffer.len() + 1;
            let round = self.source.generate(next);
            self.buffer.push_back(round);
        }
    }
}

impl<T: Scalar, S: RoundSource<T>> Environment<T> for Oblivious<T, S> {
    fn dim(&self) -> usize {
        self.source.domain().dim()
    }

    fn constraints(&self) -> usize {
        self.source.constraints()
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn domain(&self) -> &ConvexSet<T> {
        self.source.domain()
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        self.source.bounds()
    }

    fn round(&mut self, t: usize) -> Result<RoundOracle<T>> {
        if t != self.delivered + 1 {
            return Err(LlpError::UnsupportedScenario(format!(
                "rounds must be requested in order: expected {}, got {t}",
                self.delivered + 1
            )));
        }
        self.fill_to(t);
        self.delivered = t;
        Ok(self.buffer.pop_front().expect("filled"))
    }

    fn peek(&mut self, t: usize) -> Option<RoundOracle<T>> {
        if t <= self.delivered {
            return None;
        }
        self.fill_to(t);
        self.buffer.get(t - self.delivered - 1).cloned()
    }

    fn base_constraint(&self) -> Option<SharedConstraint<T>> {
        self.source.base_constraint()
    }
}

fn unit_cube<T: Scalar>(dim: usize) -> Result<ConvexSet<T>> {
    ConvexSet::cube(-T::one(), T::one(), dim)
}

/// Even `t`: `f = −4x`, `g = 0.79x + 0.26`; odd `t`: `f = −x`, `g = 0.64x − 0.135`, on `[−1, 1]`.
pub struct AlternatingLinear<T: Scalar> {
    domain: ConvexSet<T>,
    bounds: ProblemBounds<T>,
    even: RoundOracle<T>,
    odd: RoundOracle<T>,
}

impl<T: Scalar> AlternatingLinear<T> {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.check_params(&[])?;
        spec.require_shape(Some(1), Some(1))?;
        Ok(AlternatingLinear {
            domain: unit_cube(1)?,
            bounds: ProblemBounds::new(lit(4.0), lit(0.79), lit(1.05), T::one(), lit(4.0)),
            even: RoundOracle::from_parts(
                AffineCost::new(vec![lit(-4.0)], T::zero()),
                AffineConstraint::scalar(lit(0.79), lit(0.26)),
            ),
            odd: RoundOracle::from_parts(
                AffineCost::new(vec![-T::one()], T::zero()),
                AffineConstraint::scalar(lit(0.64), lit(-0.135)),
            ),
        })
    }
}

impl<T: Scalar> RoundSource<T> for AlternatingLinear<T> {
    fn domain(&self) -> &ConvexSet<T> {
        &self.domain
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        &self.bounds
    }

    fn constraints(&self) -> usize {
        1
    }

    fn generate(&mut self, t: usize) -> RoundOracle<T> {
        if t.is_multiple_of(2) {
            self.even.clone()
        } else {
            self.odd.clone()
        }
    }
}

/// `f = −2x`; `g = x` with probability `p0/(t+1)^decay`, otherwise `g = −slack`.
pub struct StochasticConstraint<T: Scalar> {
    domain: ConvexSet<T>,
    bounds: ProblemBounds<T>,
    rng: ChaCha8Rng,
    p0: f64,
    decay: f64,
    binding: RoundOracle<T>,
    slack: RoundOracle<T>,
}

impl<T: Scalar> StochasticConstraint<T> {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.check_params(&["p0", "decay", "slack"])?;
        spec.require_shape(Some(1), Some(1))?;
        let p0 = spec.param("p0", 0.1);
        let decay = spec.param("decay", 0.05);
        let slack = spec.param("slack", 0.01);
        if !(0.0..=1.0).contains(&p0) || decay < 0.0 || !(0.0..=1.0).contains(&slack) {
            return Err(LlpError::config(
                "stochastic_constraint needs p0 ∈ [0,1], decay ≥ 0, slack ∈ [0,1]",
            ));
        }
        let cost = Arc::new(AffineCost::new(vec![lit(-2.0)], T::zero()));
        Ok(StochasticConstraint {
            domain: unit_cube(1)?,
            bounds: ProblemBounds::new(lit(2.0), T::one(), T::one(), T::one(), lit(2.0)),
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            p0,
            decay,
            binding: RoundOracle::new(cost.clone(), Arc::new(AffineConstraint::scalar(T::one(), T::zero()))),
            slack: RoundOracle::new(cost, Arc::new(AffineConstraint::scalar(T::zero(), lit(-slack)))),
        })
    }

    pub fn binding_probability(&self, t: usize) -> f64 {
        self.p0 / ((t + 1) as f64).powf(self.decay)
    }
}

impl<T: Scalar> RoundSource<T> for StochasticConstraint<T> {
    fn domain(&self) -> &ConvexSet<T> {
        &self.domain
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        &self.bounds
    }

    fn constraints(&self) -> usize {
        1
    }

    fn generate(&mut self, t: usize) -> RoundOracle<T> {
        let u: f64 = self.rng.gen();
        if u < self.binding_probability(t) {
            self.binding.clone()
        } else {
            self.slack.clone()
        }
    }
}

/// `f_t = −θ_tᵀx`, `g_t(x) = 1ᵀx/√N + b_t` with `θ_t ~ U[θ_lo, θ_hi]^N` and
/// `b_t ~ mean + U[−width, width]`, on `[−1, 1]^N`.
pub struct PerturbedLinear<T: Scalar> {
    domain: ConvexSet<T>,
    bounds: ProblemBounds<T>,
    rng: ChaCha8Rng,
    base: SharedConstraint<T>,
    theta: (f64, f64),
    mean: f64,
    width: f64,
}

impl<T: Scalar> PerturbedLinear<T> {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.check_params(&["mean", "width", "theta_low", "theta_high"])?;
        spec.require_shape(None, Some(1))?;
        let n = spec.dimension;
        let mean = spec.param("mean", 0.0);
        let width = spec.param("width", 0.1);
        let theta = (spec.param("theta_low", 0.5), spec.param("theta_high", 1.5));
        if width < 0.0 || theta.0 > theta.1 || theta.0 < 0.0 {
            return Err(LlpError::config(
                "perturbed_linear needs width ≥ 0 and 0 ≤ theta_low ≤ theta_high",
            ));
        }
        let root_n = (n as f64).sqrt();
        let row = vec![lit::<T>(1.0 / root_n); n];
        let base: SharedConstraint<T> = Arc::new(AffineConstraint::new(
            Jacobian::from_row_major(1, n, row)?,
            vec![T::zero()],
        ));
        let theta_max = theta.1.max(1e-12);
        let bounds = ProblemBounds::new(
            lit(theta_max * root_n),
            T::one(),
            lit(root_n + mean.abs() + width),
            lit(root_n),
            lit(theta_max * n as f64),
        );
        Ok(PerturbedLinear {
            domain: unit_cube(n)?,
            bounds,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            base,
            theta,
            mean,
            width,
        })
    }
}

impl<T: Scalar> RoundSource<T> for PerturbedLinear<T> {
    fn domain(&self) -> &ConvexSet<T> {
        &self.domain
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        &self.bounds
    }

    fn constraints(&self) -> usize {
        1
    }

    fn generate(&mut self, _t: usize) -> RoundOracle<T> {
        let n = self.domain.dim();
        let linear = (0..n)
            .map(|_| lit(-self.rng.gen_range(self.theta.0..=self.theta.1)))
            .collect();
        let shift = self.mean + self.rng.gen_range(-self.width..=self.width);
        RoundOracle::from_parts(
            AffineCost::new(linear, T::zero()),
            ShiftedConstraint::new(self.base.clone(), vec![lit(shift)]),
        )
    }

    fn base_constraint(&self) -> Option<SharedConstraint<T>> {
        Some(self.base.clone())
    }
}

/// `f_t(x) = ‖x − u_t‖²/2`, `g_t(x) = A_t x − b_t` with `u_t ~ U[−1,1]^N`,
/// `A_t ~ U[−1,1]^{d×N}`, `b_t ~ U[b_low, b_high]^d`, on `[−1, 1]^N`.
/// `b_t > 0` keeps the origin strictly feasible for every round.
pub struct RandomQuadratic<T: Scalar> {
    domain: ConvexSet<T>,
    bounds: ProblemBounds<T>,
    rng: ChaCha8Rng,
    rows: usize,
    b_range: (f64, f64),
}

impl<T: Scalar> RandomQuadratic<T> {
    pub fn new(spec: &ScenarioSpec) -> Result<Self> {
        spec.check_params(&["b_low", "b_high"])?;
        let (n, d) = (spec.dimension, spec.constraints);
        let b_range = (spec.param("b_low", 0.1), spec.param("b_high", 0.5));
        if !(b_range.0 > 0.0 && b_range.0 <= b_range.1) {
            return Err(LlpError::config("random_quadratic needs 0 < b_low ≤ b_high"));
        }
        let (nf, df) = (n as f64, d as f64);
        let bounds = ProblemBounds::new(
            lit(2.0 * nf.sqrt()),
            lit((nf * df).sqrt()),
            lit(df.sqrt() * (nf + b_range.1)),
            lit(nf.sqrt()),
            lit(2.0 * nf),
        );
        Ok(RandomQuadratic {
            domain: unit_cube(n)?,
            bounds,
            rng: ChaCha8Rng::seed_from_u64(spec.seed),
            rows: d,
            b_range,
        })
    }
}

impl<T: Scalar> RoundSource<T> for RandomQuadratic<T> {
    fn domain(&self) -> &ConvexSet<T> {
        &self.domain
    }

    fn bounds(&self) -> &ProblemBounds<T> {
        &self.bounds
    }

    fn constraints(&self) -> usize {
        self.rows
    }

    fn generate(&mut self, _t: usize) -> RoundOracle<T> {
        let n = self.domain.dim();
        let center: Vec<T> = (0..n).map(|_| lit(self.rng.gen_range(-1.0..=1.0))).collect();
        let a: Vec<T> = (0..self.rows * n)
            .map(|_| lit(self.rng.gen_range(-1.0..=1.0)))
            .collect();
        let b: Vec<T> = (0..self.rows)
            .map(|_| lit(-self.rng.gen_range(self.b_range.0..=self.b_range.1)))
            .collect();
        RoundOracle::from_parts(
            QuadraticCost::new(center, T::one()),
            AffineConstraint::new(Jacobian::from_row_major(self.rows, n, a).expect("shape"), b),
        )
    }
}
