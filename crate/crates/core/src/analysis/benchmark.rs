use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{LlpError, Result};
use crate::linalg::{add_assign, dot, Jacobian};
use crate::problem::{AffineConstraint, ClosureCost, QuadraticForm, RoundOracle};
use crate::scalar::{lit, to_f64, Scalar};
use crate::sets::{ConvexSet, SetKind};
use crate::solver::{bisect_scalar, minimize, FtrlObjective, SolverSettings, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchmarkKind {
    /// Points feasible in every round: `g_t(x) ⪯ 0` for all `t`.
    PerRound,
    /// Points feasible on aggregate: `Σ_t g_t(x) ⪯ 0`.
    Aggregate,
}

impl BenchmarkKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchmarkKind::PerRound => "X_T",
            BenchmarkKind::Aggregate => "X_T_max",
        }
    }
}

impl fmt::Display for BenchmarkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkKind {
    type Err = LlpError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "X_T" => Ok(BenchmarkKind::PerRound),
            "X_T_max" => Ok(BenchmarkKind::Aggregate),
            _ => Err(LlpError::config(format!(
                "unknown benchmark kind `{s}` (expected X_T or X_T_max)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSettings<T> {
    /// Grid spacing in units of the diameter bound.
    pub grid_resolution: T,
    pub feasibility_tolerance: T,
    /// Random feasible points used to cross-check iterative answers.
    pub samples: usize,
    pub seed: u64,
}

impl<T: Scalar> Default for BenchmarkSettings<T> {
    fn default() -> Self {
        BenchmarkSettings {
            grid_resolution: lit(1e-4),
            feasibility_tolerance: lit(1e-9),
            samples: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkMethod {
    /// Exact feasible interval and exact one-dimensional minimization.
    Exact,
    Grid,
    Penalty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Benchmark<T> {
    pub x_star: Vec<T>,
    /// `Σ_t f_t(x*)`
    pub optimal_cost: T,
    /// Distance within which the true minimizer is guaranteed (grid) or expected.
    pub error_bar: T,
    pub method: BenchmarkMethod,
}

/// `Σ_t f_t`, exact as a quadratic form when every cost has one.
enum CostSum<'a, T: Scalar> {
    Quadratic(QuadraticForm<T>),
    Oracles(&'a [RoundOracle<T>]),
}

impl<T: Scalar> CostSum<'_, T> {
    fn value(&self, x: &[T]) -> T {
        match self {
            CostSum::Quadratic(q) => q.value(x),
            CostSum::Oracles(o) => o.iter().map(|r| r.cost.value(x)).sum(),
        }
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        match self {
            CostSum::Quadratic(q) => x.iter().zip(&q.linear).map(|(&xi, &l)| q.curvature * xi + l).collect(),
            CostSum::Oracles(o) => {
                let mut g = vec![T::zero(); x.len()];
                for r in o.iter() {
                    add_assign(&mut g, &r.cost.eval(x).1);
                }
                g
            }
        }
    }
}

/// The benchmark constraint set as affine rows, when possible.
enum Rows<'a, T: Scalar> {
    Affine(Vec<(Vec<T>, T)>),
    Oracles(BenchmarkKind, &'a [RoundOracle<T>]),
}

impl<T: Scalar> Rows<'_, T> {
    /// Largest constraint value at `x`; `−∞` when there are no constraints.
    fn max_violation(&self, x: &[T]) -> T {
        match self {
            Rows::Affine(rows) => rows.iter().map(|(j, b)| dot(j, x) + *b).fold(T::neg_infinity(), T::max),
            Rows::Oracles(BenchmarkKind::PerRound, o) => o
                .iter()
                .flat_map(|r| r.constraint.values(x))
                .fold(T::neg_infinity(), T::max),
            Rows::Oracles(BenchmarkKind::Aggregate, o) => {
                let mut sum = vec![T::zero(); o.first().map_or(0, |r| r.constraint.rows())];
                for r in o.iter() {
                    add_assign(&mut sum, &r.constraint.values(x));
                }
                sum.into_iter().fold(T::neg_infinity(), T::max)
            }
        }
    }
}

fn build_rows<T: Scalar>(oracles: &[RoundOracle<T>], kind: BenchmarkKind) -> Rows<'_, T> {
    let affine: Option<Vec<(Jacobian<T>, Vec<T>)>> = oracles.iter().map(|r| r.constraint.affine()).collect();
    let Some(affine) = affine else {
        return Rows::Oracles(kind, oracles);
    };
    let mut rows: Vec<(Vec<T>, T)> = Vec::new();
    match kind {
        BenchmarkKind::PerRound => {
            // among rows with identical normals only the largest offset binds
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for (j, b) in &affine {
                for (k, &bk) in b.iter().enumerate() {
                    let row = j.row(k).to_vec();
                    let key: Vec<u64> = row.iter().map(|v| to_f64(*v).to_bits()).collect();
                    match seen.get(&key) {
                        Some(&i) => rows[i].1 = rows[i].1.max(bk),
                        None => {
                            seen.insert(key, rows.len());
                            rows.push((row, bk));
                        }
                    }
                }
            }
        }
        BenchmarkKind::Aggregate => {
            if let Some((j0, b0)) = affine.first() {
                let mut sum_j: Vec<Vec<T>> = (0..b0.len()).map(|_| vec![T::zero(); j0.cols()]).collect();
                let mut sum_b = vec![T::zero(); b0.len()];
                for (j, b) in &affine {
                    for (k, row) in sum_j.iter_mut().enumerate() {
                        add_assign(row, j.row(k));
                    }
                    add_assign(&mut sum_b, b);
                }
                rows = sum_j.into_iter().zip(sum_b).collect();
            }
        }
    }
    Rows::Affine(rows)
}

/// `x* = argmin Σ_t f_t(x)` over the benchmark set of `kind`.
pub fn compute_benchmark<T: Scalar>(
    oracles: &[RoundOracle<T>],
    domain: &ConvexSet<T>,
    kind: BenchmarkKind,
    settings: &BenchmarkSettings<T>,
) -> Result<Benchmark<T>> {
    if oracles.is_empty() {
        return Err(LlpError::config("benchmark needs at least one round"));
    }
    if !(settings.grid_resolution > T::zero()) || !(settings.feasibility_tolerance >= T::zero()) {
        return Err(LlpError::config(
            "grid resolution must be positive and feasibility tolerance ≥ 0",
        ));
    }
    let quadratic = oracles
        .iter()
        .try_fold(QuadraticForm::zero(domain.dim()), |mut acc, r| {
            r.cost.quadratic_form().map(|q| {
                acc.accumulate(&q);
                acc
            })
        });
    let cost = match quadratic {
        Some(q) => CostSum::Quadratic(q),
        None => CostSum::Oracles(oracles),
    };
    let rows = build_rows(oracles, kind);
    let problem = Problem {
        cost,
        rows,
        domain,
        settings,
    };
    let mut found = match domain.dim() {
        1 => problem.exact_1d(),
        2 => problem.grid_2d().or_else(|_| problem.penalty()),
        _ => problem.penalty(),
    }?;
    found.optimal_cost = oracles.iter().map(|r| r.cost.value(&found.x_star)).sum();
    Ok(found)
}

struct Problem<'a, T: Scalar> {
    cost: CostSum<'a, T>,
    rows: Rows<'a, T>,
    domain: &'a ConvexSet<T>,
    settings: &'a BenchmarkSettings<T>,
}

impl<T: Scalar> Problem<'_, T> {
    fn feasible(&self, x: &[T]) -> bool {
        self.rows.max_violation(x) <= self.settings.feasibility_tolerance
    }

    fn infeasible(&self) -> LlpError {
        LlpError::InfeasibleBenchmark("no point of the domain satisfies the benchmark constraints".into())
    }

    fn exact_1d(&self) -> Result<Benchmark<T>> {
        let (mut lo, mut hi) = match self.domain.kind() {
            SetKind::Simplex { scale, .. } => (*scale, *scale),
            _ => self.domain.bounding_box()[0],
        };
        match &self.rows {
            Rows::Affine(rows) => {
                for (j, b) in rows {
                    let (j, b) = (j[0], *b);
                    if j > T::zero() {
                        hi = hi.min(-b / j);
                    } else if j < T::zero() {
                        lo = lo.max(-b / j);
                    } else if b > self.settings.feasibility_tolerance {
                        return Err(self.infeasible());
                    }
                }
            }
            Rows::Oracles(..) => {
                // the feasible set is an interval; locate one point, then its ends
                let steps = 10_000;
                let at = |k: usize| lo + (hi - lo) * lit::<T>(k as f64 / steps as f64);
                let inside = (0..=steps)
                    .map(at)
                    .find(|x| self.feasible(&[*x]))
                    .ok_or_else(|| self.infeasible())?;
                let edge = |outer: T| {
                    if self.feasible(&[outer]) {
                        return outer;
                    }
                    let (mut good, mut bad) = (inside, outer);
                    for _ in 0..200 {
                        let mid = good + (bad - good) / lit(2.0);
                        if mid == good || mid == bad {
                            break;
                        }
                        if self.feasible(&[mid]) {
                            good = mid
                        } else {
                            bad = mid
                        }
                    }
                    good
                };
                let (l, h) = (edge(lo), edge(hi));
                lo = l;
                hi = h;
            }
        }
        if lo > hi {
            return Err(self.infeasible());
        }
        let x = match &self.cost {
            CostSum::Quadratic(q) if q.curvature > T::zero() => (-q.linear[0] / q.curvature).max(lo).min(hi),
            CostSum::Quadratic(q) if q.linear[0] < T::zero() => hi,
            CostSum::Quadratic(q) if q.linear[0] > T::zero() => lo,
            CostSum::Quadratic(_) => T::zero().max(lo).min(hi),
            CostSum::Oracles(_) => bisect_scalar(|x| self.cost.gradient(&[x])[0], lo, hi, lo).0,
        };
        Ok(Benchmark {
            x_star: vec![x],
            optimal_cost: T::zero(),
            error_bar: T::zero(),
            method: BenchmarkMethod::Exact,
        })
    }

    /// Coarse-to-fine grid over the bounding box, keeping grid points projected
    /// onto the domain.
    fn grid_2d(&self) -> Result<Benchmark<T>> {
        let bbox = self.domain.bounding_box();
        let target = self.settings.grid_resolution * self.domain.diameter_bound();
        let mut window = [bbox[0], bbox[1]];
        let mut points = 200usize;
        let mut best: Option<(T, Vec<T>)> = None;
        let mut spacing;
        loop {
            spacing = (0..2)
                .map(|i| (window[i].1 - window[i].0) / lit(points as f64))
                .fold(T::zero(), T::max);
            let mut round_best: Option<(T, Vec<T>)> = None;
            for a in 0..=points {
                for b in 0..=points {
                    let p = [
                        window[0].0 + (window[0].1 - window[0].0) * lit::<T>(a as f64 / points as f64),
                        window[1].0 + (window[1].1 - window[1].0) * lit::<T>(b as f64 / points as f64),
                    ];
                    let p = self.domain.project_unchecked(&p);
                    if !self.feasible(&p) {
                        continue;
                    }
                    let v = self.cost.value(&p);
                    if round_best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                        round_best = Some((v, p));
                    }
                }
            }
            if let Some(rb) = round_best {
                if best.as_ref().is_none_or(|(bv, _)| rb.0 <= *bv) {
                    best = Some(rb);
                }
            }
            let Some((_, center)) = &best else {
                return Err(self.infeasible());
            };
            if spacing <= target {
                break;
            }
            let reach = spacing * lit(2.0);
            for i in 0..2 {
                window[i] = ((center[i] - reach).max(bbox[i].0), (center[i] + reach).min(bbox[i].1));
            }
            points = 40;
        }
        let (_, x) = best.expect("grid found a feasible point");
        Ok(Benchmark {
            x_star: x,
            optimal_cost: T::zero(),
            error_bar: spacing,
            method: BenchmarkMethod::Grid,
        })
    }

    fn samples(&self) -> Vec<Vec<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.settings.seed);
        let bbox = self.domain.bounding_box();
        (0..self.settings.samples)
            .map(|_| {
                let y: Vec<T> = bbox
                    .iter()
                    .map(|&(l, u)| l + (u - l) * lit::<T>(rng.gen::<f64>()))
                    .collect();
                self.domain.project_unchecked(&y)
            })
            .collect()
    }

    /// Quadratic-penalty continuation, pulled back onto the feasible set along
    /// the segment to the most feasible sample, then checked against samples.
    fn penalty(&self) -> Result<Benchmark<T>> {
        let n = self.domain.dim();
        let mut candidates = self.samples();
        candidates.push(self.domain.project_unchecked(&vec![T::zero(); n]));
        let anchor = candidates
            .iter()
            .min_by(|a, b| {
                self.rows
                    .max_violation(a)
                    .partial_cmp(&self.rows.max_violation(b))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .cloned()
            .ok_or_else(|| self.infeasible())?;
        if !self.feasible(&anchor) {
            return Err(self.infeasible());
        }

        let Rows::Affine(rows) = &self.rows else {
            return self.best_sample(&candidates, anchor);
        };
        let cost: Arc<ClosureCost<T>> = {
            let q = match &self.cost {
                CostSum::Quadratic(q) => Some(q.clone()),
                CostSum::Oracles(_) => None,
            };
            let Some(q) = q else {
                return self.best_sample(&candidates, anchor);
            };
            let curvature = q.curvature;
            Arc::new(ClosureCost::new(n, Some(curvature), move |x: &[T]| {
                let g = x.iter().zip(&q.linear).map(|(&xi, &l)| curvature * xi + l).collect();
                (q.value(x), g)
            }))
        };
        let jacobian = Jacobian::from_rows(rows.iter().map(|(j, _)| j.clone()).collect())?;
        let offset: Vec<T> = rows.iter().map(|(_, b)| *b).collect();
        let constraint = Arc::new(AffineConstraint::new(jacobian, offset));
        let settings = SolverSettings {
            tolerance: lit(1e-10),
            max_iterations: 20_000,
        };
        let mut x = anchor.clone();
        for rate in [1e2, 1e4, 1e6, 1e8] {
            let mut obj = FtrlObjective::new(self.domain);
            obj.terms.push(Term::Cost(cost.clone()));
            obj.terms.push(Term::DualPenalty {
                rate: lit(rate),
                shift: vec![T::zero(); rows.len()],
                oracle: constraint.clone(),
            });
            x = minimize(&obj, &settings, &x).x;
        }
        // largest feasible step from the anchor toward the penalty solution
        let along = |s: T| -> Vec<T> { anchor.iter().zip(&x).map(|(&a, &b)| a + s * (b - a)).collect() };
        let (mut good, mut bad) = (T::zero(), T::one());
        if self.feasible(&along(T::one())) {
            good = T::one();
        } else {
            for _ in 0..100 {
                let mid = (good + bad) / lit(2.0);
                if self.feasible(&along(mid)) {
                    good = mid
                } else {
                    bad = mid
                }
            }
        }
        let x = along(good);
        let mut found = self.best_sample(&candidates, x.clone())?;
        found.error_bar = (bad - good) * crate::linalg::dist(&anchor, &x);
        Ok(found)
    }

    /// `start` unless a feasible candidate has lower cost.
    fn best_sample(&self, candidates: &[Vec<T>], start: Vec<T>) -> Result<Benchmark<T>> {
        let mut best = (self.cost.value(&start), start);
        for c in candidates {
            if self.feasible(c) {
                let v = self.cost.value(c);
                if v < best.0 {
                    best = (v, c.clone());
                }
            }
        }
        Ok(Benchmark {
            x_star: best.1,
            optimal_cost: T::zero(),
            error_bar: T::zero(),
            method: BenchmarkMethod::Penalty,
        })
    }
}
