//! Minimizes accumulated FTRL objectives over a convex set.
//!
//! The objective is `(S/2)‖x − center‖² + linearᵀx + Σ terms(x)`. Affine
//! constraint terms and quadratic costs are folded into the first two parts,
//! which leaves a closed form in the common case. The rest is handled by an
//! exact bisection in one dimension, accelerated projected gradient for smooth
//! terms, and nested exact search (two dimensions) or projected subgradient for
//! nonsmooth ones.

use crate::error::{LlpError, Result};
use crate::linalg::{axpy, dist, dot, norm, positive_part, DualVector};
use crate::problem::{SharedConstraint, SharedCost};
use crate::scalar::{lit, Scalar};
use crate::sets::{ConvexSet, SetKind};

/// A nonlinear part of the objective.
#[derive(Debug, Clone)]
pub enum Term<T: Scalar> {
    /// `weightsᵀ g(x)` with `weights ⪰ 0`.
    Weighted {
        weights: Vec<T>,
        oracle: SharedConstraint<T>,
    },
    /// A full convex cost `f(x)`.
    Cost(SharedCost<T>),
    /// `(rate/2)‖[shift + g(x)]_+‖²`, the dual variable maximized out in closed form.
    DualPenalty {
        rate: T,
        shift: Vec<T>,
        oracle: SharedConstraint<T>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Smoothness<T> {
    Known(T),
    Unknown,
    Nonsmooth,
}

impl<T: Scalar> Term<T> {
    fn value_grad(&self, x: &[T]) -> (T, Vec<T>) {
        match self {
            Term::Weighted { weights, oracle } => {
                let (v, j) = oracle.eval(x);
                (dot(weights, &v), j.transpose_apply(weights))
            }
            Term::Cost(f) => f.eval(x),
            Term::DualPenalty { rate, shift, oracle } => {
                let (mut v, j) = oracle.eval(x);
                axpy(&mut v, T::one(), shift);
                let u = positive_part(&v);
                let g = j.transpose_apply(&u);
                (
                    *rate * dot(&u, &u) / lit(2.0),
                    g.into_iter().map(|gi| gi * *rate).collect(),
                )
            }
        }
    }

    fn smoothness(&self) -> Smoothness<T> {
        match self {
            Term::Weighted { weights, oracle } => match oracle.smoothness() {
                Some(l) => Smoothness::Known(l * weights.iter().map(|w| w.abs()).sum::<T>()),
                None => Smoothness::Nonsmooth,
            },
            Term::Cost(f) => f.smoothness().map_or(Smoothness::Nonsmooth, Smoothness::Known),
            Term::DualPenalty { rate, oracle, .. } => match (oracle.affine(), oracle.smoothness()) {
                (Some((j, _)), _) => {
                    let f = j.frobenius();
                    Smoothness::Known(*rate * f * f)
                }
                (None, Some(_)) => Smoothness::Unknown,
                (None, None) => Smoothness::Nonsmooth,
            },
        }
    }
}

/// `(S/2)‖x − quad_center‖² + linearᵀx + Σ terms(x)` over `domain`.
#[derive(Debug, Clone)]
pub struct FtrlObjective<'a, T: Scalar> {
    pub quad_weight: T,
    pub quad_center: Vec<T>,
    pub linear: Vec<T>,
    pub terms: Vec<Term<T>>,
    pub domain: &'a ConvexSet<T>,
}

impl<'a, T: Scalar> FtrlObjective<'a, T> {
    pub fn new(domain: &'a ConvexSet<T>) -> Self {
        let n = domain.dim();
        FtrlObjective {
            quad_weight: T::zero(),
            quad_center: vec![T::zero(); n],
            linear: vec![T::zero(); n],
            terms: Vec::new(),
            domain,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.domain.dim();
        LlpError::check_dim("objective center", n, self.quad_center.len())?;
        LlpError::check_dim("objective linear part", n, self.linear.len())?;
        if !(self.quad_weight >= T::zero()) || !self.quad_weight.is_finite() {
            return Err(LlpError::config("quadratic weight must be finite and ≥ 0"));
        }
        Ok(())
    }

    pub fn value_grad(&self, x: &[T]) -> (T, Vec<T>) {
        let s = self.quad_weight;
        let mut value = dot(&self.linear, x);
        let mut grad = self.linear.clone();
        if s > T::zero() {
            let d = dist(x, &self.quad_center);
            value = value + s * d * d / lit(2.0);
            for ((g, &xi), &ci) in grad.iter_mut().zip(x).zip(&self.quad_center) {
                *g = *g + s * (xi - ci);
            }
        }
        for term in &self.terms {
            let (v, g) = term.value_grad(x);
            value = value + v;
            axpy(&mut grad, T::one(), &g);
        }
        (value, grad)
    }

    pub fn value(&self, x: &[T]) -> T {
        self.value_grad(x).0
    }

    /// `‖x − P(x − ∇obj(x)/max(S, 1))‖`, zero exactly at minimizers of smooth objectives.
    pub fn residual(&self, x: &[T]) -> T {
        let g = self.value_grad(x).1;
        self.residual_with(x, &g)
    }

    fn residual_with(&self, x: &[T], grad: &[T]) -> T {
        let step = T::one() / self.quad_weight.max(T::one());
        let trial: Vec<T> = x.iter().zip(grad).map(|(&xi, &gi)| xi - step * gi).collect();
        dist(x, &self.domain.project_unchecked(&trial))
    }

    /// Moves affine terms and quadratic costs into the quadratic and linear parts.
    /// The result differs from `self` by a constant.
    pub fn folded(&self) -> FtrlObjective<'a, T> {
        let mut out = FtrlObjective {
            quad_weight: self.quad_weight,
            quad_center: self.quad_center.clone(),
            linear: self.linear.clone(),
            terms: Vec::with_capacity(self.terms.len()),
            domain: self.domain,
        };
        for term in &self.terms {
            match term {
                Term::Weighted { weights, oracle } => match oracle.affine() {
                    Some((j, _)) => axpy(&mut out.linear, T::one(), &j.transpose_apply(weights)),
                    None => out.terms.push(term.clone()),
                },
                Term::Cost(f) => match f.quadratic_form() {
                    Some(q) => {
                        if q.curvature > T::zero() {
                            let total = out.quad_weight + q.curvature;
                            let keep = out.quad_weight / total;
                            out.quad_center.iter_mut().for_each(|c| *c = *c * keep);
                            out.quad_weight = total;
                        }
                        axpy(&mut out.linear, T::one(), &q.linear);
                    }
                    None => out.terms.push(term.clone()),
                },
                Term::DualPenalty { .. } => out.terms.push(term.clone()),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T> {
    /// Target gradient-map residual.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar> Default for SolverSettings<T> {
    fn default() -> Self {
        SolverSettings {
            tolerance: lit(1e-9),
            max_iterations: 10_000,
        }
    }
}

impl<T: Scalar> SolverSettings<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) || !self.tolerance.is_finite() || self.max_iterations == 0 {
            return Err(LlpError::config(
                "solver tolerance must be positive and max_iterations ≥ 1",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub x: Vec<T>,
    /// Gradient-map residual or bracket width, depending on the path taken.
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> Solution<T> {
    fn exact(x: Vec<T>) -> Self {
        Solution {
            x,
            residual: T::zero(),
            iterations: 0,
            converged: true,
        }
    }
}

/// Minimizes `obj`. Ties in degenerate objectives are broken toward `fallback`.
pub fn minimize<T: Scalar>(obj: &FtrlObjective<'_, T>, settings: &SolverSettings<T>, fallback: &[T]) -> Solution<T> {
    let obj = obj.folded();
    let domain = obj.domain;
    let start = domain.project_unchecked(fallback);
    if obj.terms.is_empty() {
        return closed_form(&obj, settings, start);
    }
    if domain.dim() == 1 {
        return bisect(&obj, start);
    }
    let mut smooth_bound = Some(obj.quad_weight);
    for term in &obj.terms {
        match term.smoothness() {
            Smoothness::Known(l) => smooth_bound = smooth_bound.map(|s| s + l),
            Smoothness::Unknown => smooth_bound = None,
            Smoothness::Nonsmooth => {
                return if nested_applies(domain) {
                    nested(&obj, settings, start)
                } else {
                    subgradient(&obj, settings, start)
                };
            }
        }
    }
    accelerated_gradient(&obj, settings, start, smooth_bound)
}

fn closed_form<T: Scalar>(obj: &FtrlObjective<'_, T>, settings: &SolverSettings<T>, start: Vec<T>) -> Solution<T> {
    let s = obj.quad_weight;
    if s > T::zero() {
        let target: Vec<T> = obj
            .quad_center
            .iter()
            .zip(&obj.linear)
            .map(|(&c, &l)| c - l / s)
            .collect();
        return Solution::exact(obj.domain.project_unchecked(&target));
    }
    // affine objective: keep the fallback if it already minimizes, otherwise
    // take the closest point of the minimizing face
    if obj.residual_with(&start, &obj.linear) <= settings.tolerance {
        return Solution::exact(start);
    }
    Solution::exact(obj.domain.linear_minimizer(&obj.linear, &start))
}

/// Exact minimization on an interval by bisection on the sign of the derivative.
/// Returns the minimizer nearest to `start`.
fn bisect<T: Scalar>(obj: &FtrlObjective<'_, T>, start: Vec<T>) -> Solution<T> {
    if let SetKind::Simplex { scale, .. } = obj.domain.kind() {
        return Solution::exact(vec![*scale]);
    }
    let (lower, upper) = obj.domain.bounding_box()[0];
    let (x, width, iterations) = bisect_scalar(|x| obj.value_grad(&[x]).1[0], lower, upper, start[0]);
    Solution {
        x: vec![x],
        residual: width,
        iterations,
        converged: true,
    }
}

/// Minimizer of a convex function on `[lower, upper]` from the sign of a
/// (sub)derivative, nearest to `start`. Returns `(x, bracket width, iterations)`.
pub(crate) fn bisect_scalar<T: Scalar>(slope: impl Fn(T) -> T, lower: T, upper: T, start: T) -> (T, T, usize) {
    let x0 = start.max(lower).min(upper);
    let s0 = slope(x0);
    if s0 == T::zero() {
        return (x0, T::zero(), 0);
    }
    let rising = s0 < T::zero();
    if rising && slope(upper) < T::zero() {
        return (upper, T::zero(), 0);
    }
    if !rising && slope(lower) > T::zero() {
        return (lower, T::zero(), 0);
    }
    let (mut lo, mut hi) = if rising { (x0, upper) } else { (lower, x0) };
    let mut iterations = 0;
    loop {
        let mid = lo + (hi - lo) / lit(2.0);
        if mid <= lo || mid >= hi || iterations >= 2100 {
            break;
        }
        iterations += 1;
        let s = slope(mid);
        // move toward the end of the minimizing interval that faces `start`
        let go_left = if rising { s >= T::zero() } else { s > T::zero() };
        if go_left {
            hi = mid
        } else {
            lo = mid
        }
    }
    (if rising { hi } else { lo }, hi - lo, iterations)
}

fn accelerated_gradient<T: Scalar>(
    obj: &FtrlObjective<'_, T>,
    settings: &SolverSettings<T>,
    start: Vec<T>,
    smoothness: Option<T>,
) -> Solution<T> {
    let domain = obj.domain;
    let target = settings.tolerance / lit(10.0);
    let mut l = smoothness.unwrap_or(T::one()).max(obj.quad_weight).max(lit(1e-12));
    let mut x = start;
    let mut y = x.clone();
    let mut momentum = T::one();
    let mut best = (obj.residual(&x), x.clone());
    let two: T = lit(2.0);
    for k in 1..=settings.max_iterations {
        let (fy, gy) = obj.value_grad(&y);
        let mut next;
        loop {
            let step: Vec<T> = y.iter().zip(&gy).map(|(&yi, &gi)| yi - gi / l).collect();
            next = domain.project_unchecked(&step);
            let d = dist(&next, &y);
            let model = fy + dot(&gy, &next) - dot(&gy, &y) + l * d * d / two;
            let slack = lit::<T>(64.0) * T::epsilon() * (fy.abs() + T::one());
            if obj.value(&next) <= model + slack || l > T::max_value() / lit(4.0) {
                break;
            }
            l = l * two;
        }
        let residual = obj.residual(&next);
        if residual < best.0 {
            best = (residual, next.clone());
        }
        if residual <= target {
            return Solution {
                x: next,
                residual,
                iterations: k,
                converged: true,
            };
        }
        let diff: Vec<T> = next.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let gap: Vec<T> = y.iter().zip(&next).map(|(&a, &b)| a - b).collect();
        if dot(&gap, &diff) > T::zero() {
            momentum = T::one();
            y = next.clone();
        } else {
            let upcoming = (T::one() + (T::one() + lit::<T>(4.0) * momentum * momentum).sqrt()) / two;
            let beta = (momentum - T::one()) / upcoming;
            y = next.iter().zip(&diff).map(|(&a, &d)| a + beta * d).collect();
            momentum = upcoming;
        }
        x = next;
    }
    let (residual, x) = best;
    Solution {
        converged: residual <= settings.tolerance,
        x,
        residual,
        iterations: settings.max_iterations,
    }
}

fn nested_applies<T: Scalar>(domain: &ConvexSet<T>) -> bool {
    domain.dim() == 2 && !matches!(domain.kind(), SetKind::Simplex { .. })
}

/// `[lower, upper]` of the second coordinate on the slice `x_1 = first`.
fn slice<T: Scalar>(domain: &ConvexSet<T>, first: T) -> (T, T) {
    match domain.kind() {
        SetKind::Ball { center, radius } => {
            let dx = first - center[0];
            let half = (*radius * *radius - dx * dx).max(T::zero()).sqrt();
            (center[1] - half, center[1] + half)
        }
        _ => domain.bounding_box()[1],
    }
}

/// Nested exact search in two dimensions: golden-section over `x_1` of the
/// partial minimum over `x_2`, which is itself found by bisection. Works for
/// nonsmooth objectives, where gradient maps give no stopping rule.
fn nested<T: Scalar>(obj: &FtrlObjective<'_, T>, settings: &SolverSettings<T>, start: Vec<T>) -> Solution<T> {
    let domain = obj.domain;
    let inner = |first: T| -> (T, Vec<T>) {
        let (lo, hi) = slice(domain, first);
        let (second, _, _) = bisect_scalar(|y| obj.value_grad(&[first, y]).1[1], lo, hi, start[1]);
        let x = domain.project_unchecked(&[first, second]);
        (obj.value(&x), x)
    };
    let (mut a, mut b) = domain.bounding_box()[0];
    let ratio: T = lit((5f64.sqrt() - 1.0) / 2.0);
    let mut best = inner(start[0]);
    let consider = |candidate: (T, Vec<T>), best: &mut (T, Vec<T>)| {
        if candidate.0 < best.0 {
            *best = candidate.clone();
        }
        candidate.0
    };
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let mut fc = consider(inner(c), &mut best);
    let mut fd = consider(inner(d), &mut best);
    let mut iterations = 0;
    let floor = T::epsilon() * (a.abs() + b.abs() + T::one());
    while b - a > floor && iterations < settings.max_iterations.max(200) {
        iterations += 1;
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = consider(inner(c), &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = consider(inner(d), &mut best);
        }
    }
    for end in [a, b] {
        consider(inner(end), &mut best);
    }
    Solution {
        x: best.1,
        residual: b - a,
        iterations,
        converged: true,
    }
}

fn subgradient<T: Scalar>(obj: &FtrlObjective<'_, T>, settings: &SolverSettings<T>, start: Vec<T>) -> Solution<T> {
    let domain = obj.domain;
    let s = obj.quad_weight;
    let mut x = start;
    let mut best = (obj.value(&x), x.clone());
    for k in 1..=settings.max_iterations {
        let (f, g) = obj.value_grad(&x);
        if f < best.0 {
            best = (f, x.clone());
        }
        let gn = norm(&g);
        if gn == T::zero() {
            break;
        }
        let kf: T = lit(k as f64);
        let step = if s > T::zero() {
            T::one() / (s * kf)
        } else {
            domain.diameter_bound() / (gn * kf.sqrt())
        };
        let trial: Vec<T> = x.iter().zip(&g).map(|(&xi, &gi)| xi - step * gi).collect();
        x = domain.project_unchecked(&trial);
    }
    if obj.value(&x) < best.0 {
        best = (obj.value(&x), x);
    }
    let residual = obj.residual(&best.1);
    Solution {
        converged: residual <= settings.tolerance,
        x: best.1,
        residual,
        iterations: settings.max_iterations,
    }
}

/// `λ_{t+1} = [a_t (cumulative + predicted)]_+`, the maximizer of
/// `λᵀ(cumulative + predicted) − ‖λ‖²/(2 a_t)` over `λ ⪰ 0`.
pub fn dual_closed_form<T: Scalar>(a_t: T, cumulative: &[T], predicted: &[T]) -> Result<DualVector<T>> {
    if !(a_t > T::zero()) || !a_t.is_finite() {
        return Err(LlpError::config("dual step a_t must be positive and finite"));
    }
    LlpError::check_dim("dual update", cumulative.len(), predicted.len())?;
    let v: Vec<T> = cumulative.iter().zip(predicted).map(|(&c, &p)| a_t * (c + p)).collect();
    Ok(DualVector::from_positive_part(&v))
}
