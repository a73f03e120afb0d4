//! Inner solvers, projections and the dual step against brute-force oracles.

use std::sync::Arc;

use llp_core::linalg::{dist, dot, Jacobian};
use llp_core::problem::{ClosureConstraint, ClosureCost, QuadraticCost, SharedConstraint};
use llp_core::solver::{dual_closed_form, minimize, FtrlObjective, SolverSettings, Term};
use llp_core::ConvexSet;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn abs_first() -> SharedConstraint<f64> {
    Arc::new(ClosureConstraint::new(2, 1, None, |x: &[f64]| {
        let s = x[0].signum() * f64::from(x[0] != 0.0);
        (vec![x[0].abs()], Jacobian::from_row_major(1, 2, vec![s, 0.0]).unwrap())
    }))
}

fn abs_1d() -> SharedConstraint<f64> {
    Arc::new(ClosureConstraint::new(1, 1, None, |x: &[f64]| {
        let s = x[0].signum() * f64::from(x[0] != 0.0);
        (vec![x[0].abs()], Jacobian::from_row_major(1, 1, vec![s]).unwrap())
    }))
}

/// `Σ x_i²` with an affine shift, reported as a generic smooth oracle.
fn squares(n: usize, shift: f64) -> SharedConstraint<f64> {
    Arc::new(ClosureConstraint::new(n, 1, Some(2.0), move |x: &[f64]| {
        let v = x.iter().map(|xi| xi * xi).sum::<f64>() + shift;
        let j = x.iter().map(|xi| 2.0 * xi).collect();
        (vec![v], Jacobian::from_row_major(1, n, j).unwrap())
    }))
}

/// An affine map that hides its structure, forcing the iterative path.
fn opaque_affine(row: Vec<f64>, b: f64) -> SharedConstraint<f64> {
    let n = row.len();
    Arc::new(ClosureConstraint::new(n, 1, Some(0.0), move |x: &[f64]| {
        (
            vec![dot(&row, x) + b],
            Jacobian::from_row_major(1, n, row.clone()).unwrap(),
        )
    }))
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, r: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-r..=r)).collect()
}

/// Minimizer of `obj` over the projections of a grid on `domain`'s bounding
/// box, which covers curved boundaries at the grid spacing: a global pass at
/// `coarse` spacing, then a local pass at 1e-4 around the best point.
fn grid_argmin(obj: &FtrlObjective<'_, f64>, domain: &ConvexSet<f64>, coarse: f64) -> Vec<f64> {
    let bbox = domain.bounding_box();
    let axis = |lo: f64, hi: f64, h: f64| -> Vec<f64> {
        let k = ((hi - lo) / h).round() as usize;
        (0..=k).map(|i| (lo + i as f64 * h).min(hi)).collect()
    };
    let search = |ranges: &[(f64, f64)], h: f64| -> Vec<f64> {
        let axes: Vec<Vec<f64>> = ranges.iter().map(|&(lo, hi)| axis(lo, hi, h)).collect();
        let mut best = (f64::INFINITY, Vec::new());
        let mut visit = |x: Vec<f64>| {
            let x = domain.project(&x).unwrap();
            let v = obj.value(&x);
            if v < best.0 {
                best = (v, x);
            }
        };
        if axes.len() == 1 {
            axes[0].iter().for_each(|&a| visit(vec![a]));
        } else {
            for &a in &axes[0] {
                for &b in &axes[1] {
                    visit(vec![a, b]);
                }
            }
        }
        best.1
    };
    let rough = search(&bbox, coarse);
    let window: Vec<(f64, f64)> = rough
        .iter()
        .zip(&bbox)
        .map(|(&c, &(lo, hi))| ((c - 5.0 * coarse).max(lo), (c + 5.0 * coarse).min(hi)))
        .collect();
    search(&window, 1e-4)
}

fn random_domain(rng: &mut ChaCha8Rng, n: usize) -> ConvexSet<f64> {
    if n == 2 && rng.gen_bool(0.5) {
        ConvexSet::ball(uniform(rng, 2, 0.3), rng.gen_range(0.5..1.0)).unwrap()
    } else {
        ConvexSet::cube(-1.0, 1.0, n).unwrap()
    }
}

fn random_objective<'a>(rng: &mut ChaCha8Rng, domain: &'a ConvexSet<f64>, nonsmooth: bool) -> FtrlObjective<'a, f64> {
    let n = domain.dim();
    let mut obj = FtrlObjective::new(domain);
    obj.quad_weight = rng.gen_range(0.5..5.0);
    obj.quad_center = uniform(rng, n, 1.0);
    obj.linear = uniform(rng, n, 3.0);
    if rng.gen_bool(0.5) {
        obj.terms.push(Term::Weighted {
            weights: vec![rng.gen_range(0.0..2.0)],
            oracle: squares(n, rng.gen_range(-1.0..1.0)),
        });
    }
    if rng.gen_bool(0.3) {
        obj.terms.push(Term::Cost(Arc::new(QuadraticCost::new(
            uniform(rng, n, 1.0),
            rng.gen_range(0.1..1.0),
        ))));
    }
    if nonsmooth {
        let oracle = if n == 1 { abs_1d() } else { abs_first() };
        obj.terms.push(Term::Weighted {
            weights: vec![rng.gen_range(0.5..3.0)],
            oracle,
        });
    }
    obj
}

#[test]
fn inner_solver_matches_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let settings = SolverSettings::default();
    for case in 0..100 {
        let n = 1 + case % 2;
        let domain = random_domain(&mut rng, n);
        let obj = random_objective(&mut rng, &domain, case % 4 < 2);
        let sol = minimize(&obj, &settings, &vec![0.0; n]);
        let coarse = if n == 1 { 1e-4 } else { 1e-2 };
        let grid = grid_argmin(&obj, &domain, coarse);
        let err = dist(&sol.x, &grid);
        assert!(err <= 1e-3, "case {case}: solver {:?} grid {:?}", sol.x, grid);
    }
}

#[test]
fn strong_convexity_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let settings = SolverSettings::default();
    for case in 0..40 {
        let n = 1 + case % 3;
        let domain = ConvexSet::cube(-1.0, 1.0, n).unwrap();
        let obj = random_objective(&mut rng, &domain, n <= 2 && case % 2 == 0);
        let sol = minimize(&obj, &settings, &vec![0.0; n]);
        let (fx, gx) = obj.value_grad(&sol.x);
        let allowance = settings.tolerance * (1.0 + gx.iter().map(|g| g * g).sum::<f64>().sqrt());
        for _ in 0..100 {
            let y = uniform(&mut rng, n, 1.0);
            assert!(fx <= obj.value(&y) + allowance.max(1e-9), "case {case}");
        }
    }
}

#[test]
fn closed_form_matches_iterative_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let settings = SolverSettings::default();
    for case in 0..200 {
        let n = 1 + case % 3;
        let domain = if case % 5 == 0 {
            ConvexSet::simplex(1.0, n).unwrap()
        } else {
            ConvexSet::cube(-1.0, 1.0, n).unwrap()
        };
        let mut closed = FtrlObjective::new(&domain);
        closed.quad_weight = rng.gen_range(0.2..4.0);
        closed.quad_center = uniform(&mut rng, n, 1.0);
        closed.linear = uniform(&mut rng, n, 2.0);
        let row = uniform(&mut rng, n, 1.0);
        let w = rng.gen_range(0.0..2.0);
        let mut iterative = closed.clone();
        iterative.terms.push(Term::Weighted {
            weights: vec![w],
            oracle: opaque_affine(row.clone(), 0.3),
        });
        closed.linear.iter_mut().zip(&row).for_each(|(l, r)| *l += w * r);
        let a = minimize(&closed, &settings, &vec![0.0; n]);
        let b = minimize(&iterative, &settings, &vec![0.0; n]);
        assert_eq!(a.iterations, 0, "case {case} should take the closed form");
        assert!(dist(&a.x, &b.x) <= 1e-6, "case {case}: {:?} vs {:?}", a.x, b.x);
    }
}

/// Maximizer of `λᵀv − ‖λ‖²/(2a)` over a grid on `[0, hi]^d`.
fn dual_grid_argmax(a: f64, v: &[f64], hi: f64) -> Vec<f64> {
    let objective = |l: &[f64]| dot(l, v) - dot(l, l) / (2.0 * a);
    let search = |ranges: &[(f64, f64)], h: f64| -> Vec<f64> {
        let pts = |(lo, up): (f64, f64)| -> Vec<f64> {
            let k = ((up - lo) / h).round() as usize;
            (0..=k).map(|i| lo + i as f64 * h).collect()
        };
        let axes: Vec<Vec<f64>> = ranges.iter().map(|&r| pts(r)).collect();
        let mut best = (f64::NEG_INFINITY, Vec::new());
        let mut visit = |l: Vec<f64>| {
            let o = objective(&l);
            if o > best.0 {
                best = (o, l);
            }
        };
        if axes.len() == 1 {
            axes[0].iter().for_each(|&x| visit(vec![x]));
        } else {
            for &x in &axes[0] {
                for &y in &axes[1] {
                    visit(vec![x, y]);
                }
            }
        }
        best.1
    };
    let coarse = hi / 400.0;
    let rough = search(&vec![(0.0, hi); v.len()], coarse);
    let window: Vec<(f64, f64)> = rough
        .iter()
        .map(|&c| ((c - 2.0 * coarse).max(0.0), c + 2.0 * coarse))
        .collect();
    search(&window, 1e-4)
}

#[test]
fn dual_step_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for case in 0..100 {
        let d = 1 + case % 2;
        let a = rng.gen_range(0.01..2.0);
        let cumulative = uniform(&mut rng, d, 5.0);
        let predicted = uniform(&mut rng, d, 1.0);
        let lambda = dual_closed_form(a, &cumulative, &predicted).unwrap();
        let v: Vec<f64> = cumulative.iter().zip(&predicted).map(|(c, p)| c + p).collect();
        let hi = a * v.iter().map(|x| x.abs()).fold(0.0, f64::max) + 1.0;
        let grid = dual_grid_argmax(a, &v, hi);
        assert!(dist(lambda.as_slice(), &grid) <= 1e-3, "case {case}");
    }
}

#[test]
fn nonsmooth_cost_term_in_one_dimension() {
    // min (1/2)x² + |x − 0.5| on [−1, 1] is attained at the kink
    let domain = ConvexSet::cube(-1.0, 1.0, 1).unwrap();
    let mut obj = FtrlObjective::new(&domain);
    obj.quad_weight = 1.0;
    obj.terms
        .push(Term::Cost(Arc::new(ClosureCost::new(1, None, |x: &[f64]| {
            ((x[0] - 0.5).abs(), vec![(x[0] - 0.5).signum()])
        }))));
    let sol = minimize(&obj, &SolverSettings::default(), &[0.0]);
    assert!((sol.x[0] - 0.5).abs() < 1e-6, "{:?}", sol.x);
}

#[test]
fn simplex_projection_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..200 {
        let n = rng.gen_range(1..6);
        let scale = rng.gen_range(0.5..3.0);
        let set = ConvexSet::simplex(scale, n).unwrap();
        let y = uniform(&mut rng, n, 3.0);
        let x = set.project(&y).unwrap();
        assert!((x.iter().sum::<f64>() - scale).abs() < 1e-10);
        // x = [y − τ]_+ for a single threshold τ
        let support: Vec<usize> = (0..n).filter(|&i| x[i] > 1e-12).collect();
        let tau = y[support[0]] - x[support[0]];
        for i in 0..n {
            if x[i] > 1e-12 {
                assert!((y[i] - x[i] - tau).abs() < 1e-9);
            } else {
                assert!(y[i] <= tau + 1e-9);
            }
        }
    }
}

fn sets() -> impl Strategy<Value = ConvexSet<f64>> {
    prop_oneof![
        (1usize..4).prop_map(|n| ConvexSet::cube(-1.0, 1.0, n).unwrap()),
        (1usize..4, 0.1f64..3.0).prop_map(|(n, r)| ConvexSet::ball(vec![0.2; n], r).unwrap()),
        (1usize..4, 0.5f64..2.0).prop_map(|(n, s)| ConvexSet::simplex(s, n).unwrap()),
    ]
}

fn set_and_points() -> impl Strategy<Value = (ConvexSet<f64>, Vec<f64>, Vec<f64>)> {
    sets().prop_flat_map(|set| {
        let n = set.dim();
        (
            Just(set),
            prop::collection::vec(-5.0f64..5.0, n),
            prop::collection::vec(-5.0f64..5.0, n),
        )
    })
}

proptest! {
    #[test]
    fn projection_lands_in_set_and_is_idempotent((set, y, _) in set_and_points()) {
        let p = set.project(&y).unwrap();
        prop_assert!(set.contains(&p, 1e-9));
        let q = set.project(&p).unwrap();
        prop_assert!(dist(&p, &q) <= 1e-9);
    }

    #[test]
    fn projection_is_nonexpansive((set, y, w) in set_and_points()) {
        let (p, q) = (set.project(&y).unwrap(), set.project(&w).unwrap());
        prop_assert!(dist(&p, &q) <= dist(&y, &w) + 1e-9);
    }

    #[test]
    fn projection_obeys_variational_inequality((set, y, w) in set_and_points()) {
        // (y − P y)ᵀ(z − P y) ≤ 0 for every z in the set
        let p = set.project(&y).unwrap();
        let z = set.project(&w).unwrap();
        let lhs: f64 = y.iter().zip(&p).zip(&z).map(|((yi, pi), zi)| (yi - pi) * (zi - pi)).sum();
        prop_assert!(lhs <= 1e-8);
    }
}
