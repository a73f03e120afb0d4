use crate::learner::{LearnerConfig, RoundRecord, Variant};
use crate::linalg::dot;
use crate::scalar::{lit, Scalar};

/// Constants the bounds are evaluated with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams<T> {
    pub sigma: T,
    pub a: T,
    pub beta: T,
    pub d: T,
    pub l_f: T,
    pub l_g: T,
    pub g: T,
}

impl<T: Scalar> BoundParams<T> {
    pub fn from_config(config: &LearnerConfig<T>) -> Self {
        let b = config.bounds;
        BoundParams {
            sigma: config.sigma,
            a: config.a,
            beta: config.beta,
            d: b.d,
            l_f: b.l_f,
            l_g: b.l_g,
            g: b.g,
        }
    }

    fn leading(&self) -> T {
        lit::<T>(2.0) * (self.sigma * self.d * self.d + self.l_f / self.sigma)
    }
}

/// Constants of the linearly perturbed case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbedConstants<T> {
    pub a1: T,
    pub a2: T,
    pub a3: T,
    pub a4: T,
    pub k_t: T,
}

pub fn perturbed_constants<T: Scalar>(p: &BoundParams<T>, xi_sq_cum: T) -> PerturbedConstants<T> {
    let two: T = lit(2.0);
    PerturbedConstants {
        a1: two * p.sigma * p.d * p.d + two * p.l_f / p.sigma,
        a2: lit::<T>(4.0) * p.a * p.g * p.g / (T::one() - p.beta),
        a3: two / p.a,
        a4: two * p.l_g / p.sigma,
        k_t: (p.g * p.g + xi_sq_cum).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T> {
    pub variant: Variant,
    /// Regret bound for the variant that produced the trace.
    pub b_t: T,
    /// Violation bound for the variant that produced the trace.
    pub v_bound: T,
    /// `√(2(B_T − R_T)/a_{T−1})`, which bounds the prescient violation.
    pub vz_bound: T,
    /// `B_T − R_T < 0`, so the square-root argument was clamped to zero.
    pub clamped: bool,
    /// `2(σD² + L_f/σ)√h_{1:T} + Σ a_{t−1}ξ_t²`, whatever the variant.
    pub proximal_bound: T,
    /// Same with `√(h_{1:T} + μ_{T+1})`, for the non-proximal variant.
    pub nonproximal_bound: Option<T>,
    pub perturbed: Option<PerturbedConstants<T>>,
    pub params: BoundParams<T>,
    pub horizon: usize,
    pub h_cum: T,
    pub xi_sq_cum: T,
    /// `Σ a_{t−1}ξ_t² = Σ ξ_t²/φ_{0:t−1}`
    pub weighted_xi_sq: T,
    /// `φ_{0:T−1} = 1/a_{T−1}`
    pub phi: T,
    pub mu_next: T,
}

/// `Σ_{t≤k} a_{t−1}ξ_t²` for every prefix `k`.
pub fn weighted_xi_prefix<T: Scalar>(records: &[RoundRecord<T>]) -> Vec<T> {
    let mut acc = T::zero();
    records
        .iter()
        .map(|r| {
            acc = acc + r.a_prev * r.xi * r.xi;
            acc
        })
        .collect()
}

/// `2(σD² + L_f/σ)√h + Σ a_{t−1}ξ_t²`
pub fn proximal_regret_bound<T: Scalar>(p: &BoundParams<T>, h_cum: T, weighted_xi_sq: T) -> T {
    p.leading() * h_cum.sqrt() + weighted_xi_sq
}

/// `2(σD² + L_f/σ)√(h + μ_{T+1}) + Σ a_{t−1}ξ_t²`
pub fn nonproximal_regret_bound<T: Scalar>(p: &BoundParams<T>, h_cum: T, mu_next: T, weighted_xi_sq: T) -> T {
    p.leading() * (h_cum + mu_next).sqrt() + weighted_xi_sq
}

/// `A_1√h + min(2a√Σξ², A_2 T^{1−β})`
pub fn perturbed_regret_bound<T: Scalar>(p: &BoundParams<T>, h_cum: T, xi_sq_cum: T, horizon: usize) -> T {
    let c = perturbed_constants(p, xi_sq_cum);
    let adaptive = lit::<T>(2.0) * p.a * xi_sq_cum.sqrt();
    let by_time = c.a2 * lit::<T>(horizon as f64).powf(T::one() - p.beta);
    c.a1 * h_cum.sqrt() + adaptive.min(by_time)
}

/// `(√(max(scale·(B − R), 0)), clamped)`
fn clamped_root<T: Scalar>(scale: T, gap: T) -> (T, bool) {
    if gap < T::zero() {
        (T::zero(), true)
    } else {
        ((scale * gap).sqrt(), false)
    }
}

/// Regret and violation bounds for a completed trace with realized regret `regret`.
pub fn evaluate_bounds<T: Scalar>(records: &[RoundRecord<T>], config: &LearnerConfig<T>, regret: T) -> BoundReport<T> {
    let p = BoundParams::from_config(config);
    let horizon = records.len();
    let last = records.last();
    let h_cum = last.map_or(T::zero(), |r| r.h_cum);
    let xi_sq_cum = last.map_or(T::zero(), |r| r.xi_sq_cum);
    let mu_next = last.map_or(T::zero(), |r| r.mu_next);
    let a_last_prev = last.map_or(p.a, |r| r.a_prev);
    let weighted_xi_sq = weighted_xi_prefix(records).last().copied().unwrap_or_else(T::zero);
    let proximal_bound = proximal_regret_bound(&p, h_cum, weighted_xi_sq);
    let two: T = lit(2.0);
    let constraint_drift = two * p.l_g / p.sigma;

    let mut report = BoundReport {
        variant: config.variant,
        b_t: proximal_bound,
        v_bound: T::zero(),
        vz_bound: T::zero(),
        clamped: false,
        proximal_bound,
        nonproximal_bound: None,
        perturbed: None,
        params: p,
        horizon,
        h_cum,
        xi_sq_cum,
        weighted_xi_sq,
        phi: T::one() / a_last_prev,
        mu_next,
    };
    match config.variant {
        Variant::Llp2 => {
            let b = nonproximal_regret_bound(&p, h_cum, mu_next, weighted_xi_sq);
            let (vz, clamped) = clamped_root(two / a_last_prev, b - regret);
            report.nonproximal_bound = Some(b);
            report.b_t = b;
            report.vz_bound = vz;
            report.clamped = clamped;
            report.v_bound = vz + constraint_drift * (h_cum + mu_next).sqrt();
        }
        Variant::LlpPerturbed => {
            let c = perturbed_constants(&p, xi_sq_cum);
            let b = perturbed_regret_bound(&p, h_cum, xi_sq_cum, horizon);
            let scale = c.a3 * c.k_t.max(lit::<T>(horizon as f64).powf(p.beta));
            let (first, clamped) = clamped_root(scale, b - regret);
            let (vz, _) = clamped_root(two / a_last_prev, proximal_bound - regret);
            report.perturbed = Some(c);
            report.b_t = b;
            report.vz_bound = vz;
            report.clamped = clamped;
            report.v_bound = first + c.a4 * h_cum.sqrt();
        }
        _ => {
            let (vz, clamped) = clamped_root(two / a_last_prev, proximal_bound - regret);
            report.vz_bound = vz;
            report.clamped = clamped;
            report.v_bound = vz + constraint_drift * h_cum.sqrt();
        }
    }
    report
}

/// The running regret bound after each round, as reported in traces.
pub fn running_regret_bound<T: Scalar>(records: &[RoundRecord<T>], config: &LearnerConfig<T>) -> Vec<T> {
    let p = BoundParams::from_config(config);
    let weighted = weighted_xi_prefix(records);
    records
        .iter()
        .zip(weighted)
        .map(|(r, w)| match config.variant {
            Variant::Llp2 => nonproximal_regret_bound(&p, r.h_cum, r.mu_next, w),
            Variant::LlpPerturbed => perturbed_regret_bound(&p, r.h_cum, r.xi_sq_cum, r.t),
            _ => proximal_regret_bound(&p, r.h_cum, w),
        })
        .collect()
}

/// Dual regret `Σ (λ − λ_t)ᵀg_t(z_t)` against a fixed `λ`, and its bound
/// `‖λ‖²/(2a_{T−1}) + Σ a_{t−1}ξ_t²`.
pub fn dual_regret<T: Scalar>(records: &[RoundRecord<T>], lambda: &[T]) -> (T, T) {
    let regret = records
        .iter()
        .map(|r| {
            let diff: Vec<T> = lambda.iter().zip(r.lambda.as_slice()).map(|(&l, &lt)| l - lt).collect();
            dot(&diff, &r.g_at_z)
        })
        .sum();
    let a_last = records.last().map_or(T::one(), |r| r.a_prev);
    let weighted = weighted_xi_prefix(records).last().copied().unwrap_or_else(T::zero);
    (regret, dot(lambda, lambda) / (lit::<T>(2.0) * a_last) + weighted)
}

/// The two majorants of `Σ a_{t−1}ξ_t²`: `2a√Σξ²` and `4aG²T^{1−β}/(1−β)`.
pub fn xi_majorants<T: Scalar>(p: &BoundParams<T>, xi_sq_cum: T, horizon: usize) -> (T, T) {
    (
        lit::<T>(2.0) * p.a * xi_sq_cum.sqrt(),
        lit::<T>(4.0) * p.a * p.g * p.g * lit::<T>(horizon as f64).powf(T::one() - p.beta) / (T::one() - p.beta),
    )
}

/// `T·(L_f + G)·10·tolerance`, the allowance for inexact inner solves.
pub fn solver_slack<T: Scalar>(config: &LearnerConfig<T>, horizon: usize) -> T {
    lit::<T>(horizon as f64) * (config.bounds.l_f + config.bounds.g) * lit(10.0) * config.solver.tolerance
}
