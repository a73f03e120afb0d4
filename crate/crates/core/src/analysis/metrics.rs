use crate::driver::Trace;
use crate::error::{LlpError, Result};
use crate::linalg::{add_assign, norm, positive_part};
use crate::scalar::Scalar;

/// Running regret and violation of a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceMetrics<T> {
    /// `Σ_{i≤t} f_i(x_i)`
    pub cum_cost: Vec<T>,
    /// `R_t` against the supplied benchmark point, when there is one.
    pub regret: Option<Vec<T>>,
    /// `V_t = ‖[Σ_{i≤t} g_i(x_i)]_+‖`
    pub violation: Vec<T>,
    /// Same on the prescient actions, using the learner's own `g_t(z_t)`.
    pub violation_z: Vec<T>,
    /// `Σ_{i≤T} g_i(x_i)`
    pub cum_constraints: Vec<T>,
}

impl<T: Scalar> TraceMetrics<T> {
    pub fn final_regret(&self) -> Option<T> {
        self.regret.as_ref().and_then(|r| r.last().copied())
    }

    pub fn final_violation(&self) -> T {
        self.violation.last().copied().unwrap_or_else(T::zero)
    }

    pub fn final_violation_z(&self) -> T {
        self.violation_z.last().copied().unwrap_or_else(T::zero)
    }
}

/// Streams the metrics over the trace. `x_star` is the benchmark point.
pub fn compute_metrics<T: Scalar>(trace: &Trace<T>, x_star: Option<&[T]>) -> Result<TraceMetrics<T>> {
    if let Some(x) = x_star {
        LlpError::check_dim("benchmark point", trace.domain.dim(), x.len())?;
    }
    let d = trace.records.first().map_or(0, |r| r.g_values.len());
    let horizon = trace.horizon();
    let mut cum_cost = Vec::with_capacity(horizon);
    let mut regret = x_star.map(|_| Vec::with_capacity(horizon));
    let mut violation = Vec::with_capacity(horizon);
    let mut violation_z = Vec::with_capacity(horizon);
    let (mut cost, mut best) = (T::zero(), T::zero());
    let mut gx = vec![T::zero(); d];
    let mut gz = vec![T::zero(); d];
    for (record, oracle) in trace.records.iter().zip(&trace.oracles) {
        cost = cost + record.f_value;
        cum_cost.push(cost);
        if let (Some(x), Some(r)) = (x_star, regret.as_mut()) {
            best = best + oracle.cost.value(x);
            r.push(cost - best);
        }
        add_assign(&mut gx, &record.g_values);
        add_assign(&mut gz, &record.g_at_z);
        violation.push(norm(&positive_part(&gx)));
        violation_z.push(norm(&positive_part(&gz)));
    }
    Ok(TraceMetrics {
        cum_cost,
        regret,
        violation,
        violation_z,
        cum_constraints: gx,
    })
}

/// `R_t` over the first `t` rounds against `x`, recomputed from the oracles.
pub fn prefix_regret<T: Scalar>(trace: &Trace<T>, x: &[T], t: usize) -> T {
    trace.records[..t]
        .iter()
        .zip(&trace.oracles)
        .map(|(r, o)| o.cost.value(&r.x) - o.cost.value(x))
        .sum()
}

/// `V_t` over the first `t` rounds, recomputed from the oracles.
pub fn prefix_violation<T: Scalar>(trace: &Trace<T>, t: usize) -> T {
    let d = trace.records.first().map_or(0, |r| r.g_values.len());
    let mut sum = vec![T::zero(); d];
    for (r, o) in trace.records[..t].iter().zip(&trace.oracles) {
        add_assign(&mut sum, &o.constraint.values(&r.x));
    }
    norm(&positive_part(&sum))
}
