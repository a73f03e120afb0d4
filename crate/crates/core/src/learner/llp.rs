use crate::error::{LlpError, Result};
use crate::linalg::{add, add_assign, axpy, dist, norm, positive_part, sub, DualVector};
use crate::predictors::{CostPrediction, JacobianPrediction, PredictedValue, PredictionBundle};
use crate::problem::{Environment, RoundOracle, SharedConstraint};
use crate::scalar::{lit, Scalar};
use crate::sets::ConvexSet;
use crate::solver::{dual_closed_form, minimize, FtrlObjective, Solution, Term};

use super::{dual_rate, starting_point, LearnerConfig, OnlineLearner, RoundFlags, RoundRecord, Variant};

/// The LLP family: lazy primal-dual updates with an optimistic primal step,
/// a prescient step once the round is revealed, and a closed-form dual step.
pub struct Llp<T: Scalar> {
    config: LearnerConfig<T>,
    domain: ConvexSet<T>,
    rows: usize,
    /// Fixed part of linearly perturbed constraints.
    base: Option<SharedConstraint<T>>,
    t: usize,
    /// `c_{1:t−1}`
    cum_gradient: Vec<T>,
    /// `Σ_{i<t} ∇g_iᵀλ_i` of constraints that fold into the linear part.
    folded_dual: Vec<T>,
    /// `λ_iᵀg_i` of constraints that do not fold.
    terms: Vec<Term<T>>,
    /// `Σ_{i<t} λ_i`
    lambda_sum: Vec<T>,
    /// `r_{1:t−1} = (S/2)‖x − center‖² + const` of the proximal variants.
    prox_weight: T,
    prox_center: Vec<T>,
    /// `σ_{1:t−1}`
    sigma_cum: T,
    h_cum: T,
    a_prev: T,
    xi_sq_cum: T,
    /// `μ_t` (non-proximal variant only)
    mu: T,
    g_seen: T,
    /// `Σ_{i<t} g_i(z_i)`
    cum_g_at_z: Vec<T>,
    last_x: Vec<T>,
    round: Option<Round<T>>,
}

struct Round<T: Scalar> {
    prediction: PredictionBundle<T>,
    x: Vec<T>,
    lambda: Vec<T>,
    primal: Solution<T>,
    observed: Option<Observed<T>>,
}

struct Observed<T: Scalar> {
    z: Vec<T>,
    f_value: T,
    g_values: Vec<T>,
    g_at_z: Vec<T>,
    epsilon_norm: T,
    h: T,
    sigma: T,
    sigma_cum: T,
    prescient_weight: T,
    xi: T,
    prescient: Solution<T>,
}

impl<T: Scalar> Llp<T> {
    pub fn new(config: LearnerConfig<T>, env: &dyn Environment<T>) -> Result<Self> {
        config.validate()?;
        if config.variant == Variant::GreedyBaseline {
            return Err(LlpError::config("greedy_baseline is not an LLP variant"));
        }
        let (n, d) = (env.dim(), env.constraints());
        let base = match config.variant {
            Variant::LlpPerturbed => {
                let base = env.base_constraint().ok_or_else(|| {
                    LlpError::UnsupportedScenario(
                        "llp_perturbed needs a scenario with a fixed constraint part g(x) + b_t".into(),
                    )
                })?;
                LlpError::check_dim("base constraint rows", d, base.rows())?;
                LlpError::check_dim("base constraint dimension", n, base.dim())?;
                Some(base)
            }
            _ => None,
        };
        let x0 = starting_point(&config, env)?;
        let bounds = config.bounds;
        let a0 = dual_rate(config.a, bounds.g, T::zero(), 0, config.beta);
        let mu = bounds.e_m + a0 * bounds.g * bounds.delta_m;
        let sigma_cum = match config.variant {
            Variant::Llp2 => config.sigma * mu.sqrt(),
            _ => T::zero(),
        };
        Ok(Llp {
            domain: env.domain().clone(),
            rows: d,
            base,
            t: 1,
            cum_gradient: vec![T::zero(); n],
            folded_dual: vec![T::zero(); n],
            terms: Vec::new(),
            lambda_sum: vec![T::zero(); d],
            prox_weight: T::zero(),
            prox_center: vec![T::zero(); n],
            sigma_cum,
            h_cum: T::zero(),
            a_prev: a0,
            xi_sq_cum: T::zero(),
            mu,
            g_seen: T::zero(),
            cum_g_at_z: vec![T::zero(); d],
            last_x: x0,
            round: None,
            config,
        })
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    /// `μ_t` of the non-proximal variant.
    pub fn mu(&self) -> T {
        self.mu
    }

    /// `Σ_{i<t} g_i(z_i)`
    pub fn cumulative_prescient_constraints(&self) -> &[T] {
        &self.cum_g_at_z
    }

    /// Accumulated history `Σ_{i<t} L_i` with the given quadratic part.
    fn history(&self, weight: T, center: Vec<T>) -> FtrlObjective<'_, T> {
        let mut obj = FtrlObjective::new(&self.domain);
        obj.quad_weight = weight;
        obj.quad_center = center;
        obj.linear = add(&self.cum_gradient, &self.folded_dual);
        obj.terms = self.terms.clone();
        obj
    }

    fn primal_quadratic(&self) -> (T, Vec<T>) {
        match self.config.variant {
            Variant::Llp2 => (self.sigma_cum, vec![T::zero(); self.domain.dim()]),
            _ => (self.prox_weight, self.prox_center.clone()),
        }
    }

    /// Adds `weightsᵀ g(x)` for the fixed constraint part.
    fn add_base(&self, obj: &mut FtrlObjective<'_, T>, weights: Vec<T>) {
        let base = self.base.as_ref().expect("perturbed variant has a base constraint");
        add_weighted(obj, weights, base);
    }

    fn add_cost_prediction(obj: &mut FtrlObjective<'_, T>, prediction: &PredictionBundle<T>) {
        match &prediction.cost {
            CostPrediction::Gradient(c) => add_assign(&mut obj.linear, c),
            CostPrediction::Function(f) => obj.terms.push(Term::Cost(f.clone())),
        }
    }

    fn solve(&self, obj: &FtrlObjective<'_, T>, fallback: &[T]) -> Solution<T> {
        minimize(obj, &self.config.solver, fallback)
    }

    fn primal_step(&self, prediction: &PredictionBundle<T>) -> Result<(Solution<T>, Vec<T>)> {
        let (weight, center) = self.primal_quadratic();
        let mut obj = self.history(weight, center);
        Self::add_cost_prediction(&mut obj, prediction);

        // λ_t = [a_{t−1}(Σ_{i<t} g_i(z_i) + g̃_t(x̃_t))]_+, which is 0 at t = 1 for a
        // zero prediction; found jointly with x_t when x̃_t = x_t
        let oracle = prediction.constraint.clone();
        let deferred = prediction.is_deferred() && oracle.is_some();
        let lambda = if deferred {
            vec![T::zero(); self.rows]
        } else {
            let predicted = match &prediction.value {
                PredictedValue::Known(v) => {
                    LlpError::check_dim("predicted constraint value", self.rows, v.len())?;
                    v.clone()
                }
                PredictedValue::AtAction => vec![T::zero(); self.rows],
            };
            dual_closed_form(self.a_prev, &self.cum_g_at_z, &predicted)?.into_inner()
        };

        if self.config.variant == Variant::LlpPerturbed {
            self.add_base(&mut obj, add(&self.lambda_sum, &lambda));
        } else if !deferred && lambda.iter().any(|&l| l > T::zero()) {
            match (self.config.variant, &prediction.jacobian, &oracle) {
                (Variant::LlpLinearized, JacobianPrediction::Known(j), _) => {
                    add_assign(&mut obj.linear, &j.transpose_apply(&lambda))
                }
                (Variant::LlpLinearized, JacobianPrediction::Zero, _) => {}
                (_, _, Some(g)) => add_weighted(&mut obj, lambda.clone(), g),
                (_, _, None) => {}
            }
        }
        if deferred {
            // λ maximized out: (a/2)‖[s + g̃(x)]_+‖² has gradient ∇g̃(x)ᵀλ(x)
            obj.terms.push(Term::DualPenalty {
                rate: self.a_prev,
                shift: self.cum_g_at_z.clone(),
                oracle: oracle.clone().expect("deferred prediction carries an oracle"),
            });
        }

        let solution = self.solve(&obj, &self.last_x);
        let lambda = if deferred {
            let g = oracle.expect("deferred prediction carries an oracle");
            let v = add(&self.cum_g_at_z, &g.values(&solution.x));
            positive_part(&v.iter().map(|&vi| self.a_prev * vi).collect::<Vec<T>>())
        } else {
            lambda
        };
        Ok((solution, lambda))
    }

    fn g_for_rate(&self) -> T {
        if self.config.estimate_g {
            self.g_seen
        } else {
            self.config.bounds.g
        }
    }
}

/// Adds `weightsᵀ g(x)`, folding it into the linear part when `g` is affine.
fn add_weighted<T: Scalar>(obj: &mut FtrlObjective<'_, T>, weights: Vec<T>, g: &SharedConstraint<T>) {
    if weights.iter().all(|&w| w == T::zero()) {
        return;
    }
    match g.affine() {
        Some((j, _)) => add_assign(&mut obj.linear, &j.transpose_apply(&weights)),
        None => obj.terms.push(Term::Weighted {
            weights,
            oracle: g.clone(),
        }),
    }
}

impl<T: Scalar> OnlineLearner<T> for Llp<T> {
    fn config(&self) -> &LearnerConfig<T> {
        &self.config
    }

    fn round(&self) -> usize {
        self.t
    }

    fn act(&mut self, prediction: PredictionBundle<T>) -> Result<Vec<T>> {
        if self.round.is_some() {
            return Err(LlpError::OutOfOrder("act called twice in one round"));
        }
        if let CostPrediction::Gradient(c) = &prediction.cost {
            LlpError::check_dim("predicted cost gradient", self.domain.dim(), c.len())?;
        }
        let (primal, lambda) = self.primal_step(&prediction)?;
        let x = primal.x.clone();
        self.round = Some(Round {
            prediction,
            x: x.clone(),
            lambda,
            primal,
            observed: None,
        });
        Ok(x)
    }

    fn observe(&mut self, truth: &RoundOracle<T>) -> Result<()> {
        let round = match &self.round {
            Some(r) if r.observed.is_none() => r,
            _ => return Err(LlpError::OutOfOrder("observe needs an action and no prior observation")),
        };
        let (x, lambda, prediction) = (&round.x, &round.lambda, &round.prediction);
        let variant = self.config.variant;
        let (f_value, c) = truth.cost.eval(x);
        let (g_values, jacobian) = truth.constraint.eval(x);
        LlpError::check_dim("constraint rows", self.rows, g_values.len())?;

        let epsilon = sub(&c, &prediction.cost_gradient_at(x));
        let epsilon_norm = norm(&epsilon);
        let h = match variant {
            Variant::LlpPerturbed => epsilon_norm,
            _ => {
                let predicted = match variant {
                    Variant::LlpLinearized => prediction.linearized_jacobian_at(x, self.rows),
                    _ => prediction.oracle_jacobian_at(x, self.rows),
                };
                let delta = jacobian.sub(&predicted);
                norm(&add(&epsilon, &delta.transpose_apply(lambda)))
            }
        };

        // regularizer step (the non-proximal one completes after the dual rate)
        let h_cum = self.h_cum + h;
        let (sigma, sigma_cum, prox_weight, prox_center) = match variant {
            Variant::Llp2 => (T::zero(), self.sigma_cum, self.prox_weight, self.prox_center.clone()),
            _ => {
                let total = self.config.sigma * h_cum.sqrt();
                let sigma = total - self.sigma_cum;
                let center = if total > T::zero() {
                    self.prox_center
                        .iter()
                        .zip(x)
                        .map(|(&c, &xi)| (self.prox_weight * c + sigma * xi) / total)
                        .collect()
                } else {
                    self.prox_center.clone()
                };
                (sigma, total, total, center)
            }
        };

        // prescient step
        let (weight, center) = match variant {
            Variant::Llp2 => (self.sigma_cum, vec![T::zero(); self.domain.dim()]),
            _ => (prox_weight, prox_center.clone()),
        };
        let mut obj = self.history(weight, center);
        add_assign(&mut obj.linear, &c);
        match variant {
            Variant::LlpPerturbed => self.add_base(&mut obj, add(&self.lambda_sum, lambda)),
            Variant::LlpLinearized => add_assign(&mut obj.linear, &jacobian.transpose_apply(lambda)),
            _ => add_weighted(&mut obj, lambda.clone(), &truth.constraint),
        }
        let prescient = self.solve(&obj, x);
        let z = prescient.x.clone();
        let g_at_z = match variant {
            Variant::LlpLinearized => add(&g_values, &jacobian.apply(&sub(&z, x))),
            _ => truth.constraint.values(&z),
        };
        let xi = dist(&g_at_z, &prediction.value_at(x, self.rows));

        // fold round t into the history
        let lambda = lambda.clone();
        add_assign(&mut self.cum_gradient, &c);
        match variant {
            Variant::LlpPerturbed => add_assign(&mut self.lambda_sum, &lambda),
            Variant::LlpLinearized => add_assign(&mut self.folded_dual, &jacobian.transpose_apply(&lambda)),
            _ if lambda.iter().all(|&l| l == T::zero()) => {}
            _ => match truth.constraint.affine() {
                Some((j, _)) => axpy(&mut self.folded_dual, T::one(), &j.transpose_apply(&lambda)),
                None => self.terms.push(Term::Weighted {
                    weights: lambda,
                    oracle: truth.constraint.clone(),
                }),
            },
        }
        add_assign(&mut self.cum_g_at_z, &g_at_z);
        self.g_seen = self.g_seen.max(norm(&g_values));
        self.h_cum = h_cum;
        self.sigma_cum = sigma_cum;
        self.prox_weight = prox_weight;
        self.prox_center = prox_center;

        let observed = Observed {
            z,
            f_value,
            g_values,
            g_at_z,
            epsilon_norm,
            h,
            sigma,
            sigma_cum,
            prescient_weight: weight,
            xi,
            prescient,
        };
        self.round.as_mut().expect("round in progress").observed = Some(observed);
        Ok(())
    }

    fn finish_round(&mut self) -> Result<RoundRecord<T>> {
        let round = match self.round.take() {
            Some(r) if r.observed.is_some() => r,
            other => {
                self.round = other;
                return Err(LlpError::OutOfOrder("finish_round needs an observed round"));
            }
        };
        let mut obs = round.observed.expect("observed");
        let t = self.t;
        let g = self.g_for_rate();
        self.xi_sq_cum = self.xi_sq_cum + obs.xi * obs.xi;
        let a_t = dual_rate(self.config.a, g, self.xi_sq_cum, t, self.config.beta);

        let mut mu_next = T::zero();
        if self.config.variant == Variant::Llp2 {
            let b = self.config.bounds;
            mu_next = b.e_m + a_t * g * lit::<T>((t + 1) as f64) * b.delta_m;
            let total = self.config.sigma * (self.h_cum + mu_next).sqrt();
            obs.sigma = total - self.sigma_cum;
            obs.sigma_cum = total;
            self.sigma_cum = total;
            self.mu = mu_next;
        }

        let flags = RoundFlags {
            primal_unconverged: !round.primal.converged,
            prescient_unconverged: !obs.prescient.converged,
            estimated_g: self.config.estimate_g,
        };
        let record = RoundRecord {
            t,
            x: round.x.clone(),
            z: obs.z,
            lambda: DualVector::from_positive_part(&round.lambda),
            f_value: obs.f_value,
            g_values: obs.g_values,
            g_at_z: obs.g_at_z,
            epsilon_norm: obs.epsilon_norm,
            h: obs.h,
            xi: obs.xi,
            sigma: obs.sigma,
            sigma_cum: obs.sigma_cum,
            prescient_weight: obs.prescient_weight,
            h_cum: self.h_cum,
            a_t,
            a_prev: self.a_prev,
            xi_sq_cum: self.xi_sq_cum,
            mu_next,
            primal_residual: round.primal.residual,
            prescient_residual: obs.prescient.residual,
            flags,
        };
        self.a_prev = a_t;
        self.last_x = round.x;
        self.t += 1;
        Ok(record)
    }
}
