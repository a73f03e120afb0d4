//! End-to-end properties of the learners on the built-in scenarios.

use llp_core::analysis::*;
use llp_core::learner::{build_learner, dual_rate, LearnerConfig, Variant};
use llp_core::linalg::{dist, norm};
use llp_core::predictors::{Predictor, PredictorKind};
use llp_core::problem::{Environment, ImpossibilityAdversary, ScenarioKind, ScenarioSpec};
use llp_core::{simulate, Trace};
use num::{BigRational, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Run {
    trace: Trace<f64>,
    config: LearnerConfig<f64>,
}

fn run(spec: &ScenarioSpec, variant: Variant, predictor: PredictorKind, beta: f64) -> Run {
    let mut env = spec.build::<f64>().unwrap();
    let mut config = LearnerConfig::new(variant, *env.bounds());
    config.beta = beta;
    let mut learner = build_learner(config.clone(), env.as_ref()).unwrap();
    let mut predictor = Predictor::new(predictor, *env.bounds());
    let trace = simulate(env.as_mut(), learner.as_mut(), &mut predictor).unwrap();
    Run { trace, config }
}

fn benchmark(trace: &Trace<f64>, kind: BenchmarkKind) -> Vec<f64> {
    compute_benchmark(&trace.oracles, &trace.domain, kind, &BenchmarkSettings::default())
        .unwrap()
        .x_star
}

fn alternating(t: usize) -> ScenarioSpec {
    ScenarioSpec::new(ScenarioKind::AlternatingLinear, t)
}

fn quadratic(t: usize, seed: u64) -> ScenarioSpec {
    ScenarioSpec::new(ScenarioKind::RandomQuadratic, t)
        .with_seed(seed)
        .with_shape(2, 2)
}

fn predictors() -> [PredictorKind; 4] {
    [
        PredictorKind::None,
        PredictorKind::Perfect,
        PredictorKind::Noisy { level: 0.3, seed: 5 },
        PredictorKind::Adversarial,
    ]
}

#[test]
fn perfect_predictions_collapse_regret() {
    let r = run(&alternating(2000), Variant::Llp, PredictorKind::Perfect, 0.0);
    let x_star = benchmark(&r.trace, BenchmarkKind::PerRound);
    let m = compute_metrics(&r.trace, Some(&x_star)).unwrap();
    let report = evaluate_bounds(&r.trace.records, &r.config, m.final_regret().unwrap());
    assert_eq!(report.b_t, 0.0);
    assert!(m.final_regret().unwrap() <= 1e-3);
    for rec in &r.trace.records {
        assert!(dist(&rec.x, &rec.z) <= 1e-7, "round {}", rec.t);
        assert_eq!(rec.h, 0.0);
        assert_eq!(rec.xi, 0.0);
    }
}

#[test]
fn regret_and_violation_within_bounds() {
    for (i, predictor) in predictors().into_iter().enumerate() {
        for variant in [Variant::Llp, Variant::Llp2, Variant::LlpLinearized] {
            for spec in [alternating(600), quadratic(300, i as u64)] {
                let r = run(&spec, variant, predictor, 0.5);
                let x_star = benchmark(&r.trace, BenchmarkKind::PerRound);
                let m = compute_metrics(&r.trace, Some(&x_star)).unwrap();
                let regret = m.final_regret().unwrap();
                let report = evaluate_bounds(&r.trace.records, &r.config, regret);
                let slack = solver_slack(&r.config, r.trace.horizon());
                let tag = format!("{variant} {predictor} {:?}", spec.kind);
                assert!(regret <= report.b_t + slack, "{tag}: R {regret} B {}", report.b_t);
                assert!(m.final_violation() <= report.v_bound + slack, "{tag}");
                assert!(m.final_violation_z() <= report.vz_bound + slack, "{tag}");
                assert!(report.b_t.is_finite() && report.b_t >= 0.0 && report.v_bound >= 0.0);
            }
        }
    }
}

#[test]
fn prescient_distance_per_round() {
    for predictor in predictors() {
        for variant in [Variant::Llp, Variant::Llp2] {
            let r = run(&quadratic(400, 9), variant, predictor, 0.5);
            let tol = r.config.solver.tolerance;
            for rec in r.trace.records.iter().filter(|rec| rec.prescient_weight > 0.0) {
                let bound = rec.h / rec.prescient_weight + 10.0 * tol;
                assert!(dist(&rec.x, &rec.z) <= bound, "{variant} {predictor} round {}", rec.t);
            }
        }
    }
}

#[test]
fn dual_regret_within_its_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for predictor in predictors() {
        let r = run(&quadratic(500, 2), Variant::Llp, predictor, 0.5);
        for _ in 0..20 {
            let lambda: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..20.0)).collect();
            let (regret, bound) = dual_regret(&r.trace.records, &lambda);
            assert!(regret <= bound + 1e-9, "{predictor}: {regret} > {bound}");
        }
    }
}

#[test]
fn weighted_prediction_errors_below_majorants() {
    for predictor in predictors() {
        for spec in [alternating(1000), quadratic(500, 4)] {
            let r = run(&spec, Variant::Llp, predictor, 0.5);
            let last = r.trace.records.last().unwrap();
            let weighted = *weighted_xi_prefix(&r.trace.records).last().unwrap();
            let (adaptive, by_time) =
                xi_majorants(&BoundParams::from_config(&r.config), last.xi_sq_cum, r.trace.horizon());
            assert!(weighted <= adaptive.min(by_time) + 1e-12, "{predictor}");
        }
    }
}

#[test]
fn metrics_match_recomputation() {
    let r = run(
        &quadratic(800, 6),
        Variant::Llp,
        PredictorKind::Noisy { level: 0.2, seed: 1 },
        0.5,
    );
    let x_star = benchmark(&r.trace, BenchmarkKind::PerRound);
    let m = compute_metrics(&r.trace, Some(&x_star)).unwrap();
    let mut regret = 0.0;
    let mut sum = [0.0; 2];
    for (rec, oracle) in r.trace.records.iter().zip(&r.trace.oracles) {
        regret += oracle.cost.value(&rec.x) - oracle.cost.value(&x_star);
        let g = oracle.constraint.values(&rec.x);
        sum.iter_mut().zip(g).for_each(|(s, v)| *s += v);
    }
    let violation = norm(&sum.iter().map(|s| s.max(0.0)).collect::<Vec<_>>());
    assert!((m.final_regret().unwrap() - regret).abs() <= 1e-9);
    assert!((m.final_violation() - violation).abs() <= 1e-9);
    assert!(m.violation.iter().all(|&v| v >= 0.0));
}

#[test]
fn linearized_equals_llp_on_affine_constraints() {
    for predictor in [
        PredictorKind::None,
        PredictorKind::Perfect,
        PredictorKind::PerfectGradients,
    ] {
        let a = run(&alternating(500), Variant::Llp, predictor, 0.5);
        let b = run(&alternating(500), Variant::LlpLinearized, predictor, 0.5);
        for (ra, rb) in a.trace.records.iter().zip(&b.trace.records) {
            assert!(dist(&ra.x, &rb.x) <= 1e-9, "{predictor} round {}", ra.t);
        }
    }
}

#[test]
fn nonproximal_bound_dominates() {
    let r = run(&alternating(1000), Variant::Llp2, PredictorKind::None, 0.5);
    let report = evaluate_bounds(&r.trace.records, &r.config, 0.0);
    assert!(report.nonproximal_bound.unwrap() >= report.proximal_bound);
    assert!(report.mu_next > 0.0);
}

#[test]
fn adversary_blocks_pair_up() {
    let spec = ScenarioSpec::new(ScenarioKind::ImpossibilityAdversary, 3000);
    let mut env = ImpossibilityAdversary::<f64>::new(&spec).unwrap();
    let config = LearnerConfig::new(Variant::Llp, *env.bounds());
    let mut learner = build_learner(config, &env).unwrap();
    let mut predictor = Predictor::new(PredictorKind::None, *env.bounds());
    let trace = simulate(&mut env, learner.as_mut(), &mut predictor).unwrap();
    assert!(!env.block_lengths().is_empty());
    for &(i, j) in env.block_lengths() {
        assert_eq!(i, j);
    }
    assert_eq!(trace.checkpoints.len(), env.block_lengths().len());
}

#[test]
fn scenarios_are_convex_and_within_declared_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let specs = [
        alternating(50),
        ScenarioSpec::new(ScenarioKind::StochasticConstraint, 50).with_seed(2),
        ScenarioSpec::new(ScenarioKind::PerturbedLinear, 50)
            .with_seed(2)
            .with_shape(2, 1),
        quadratic(50, 3),
        ScenarioSpec::new(ScenarioKind::RandomQuadratic, 50)
            .with_seed(5)
            .with_shape(3, 2),
    ];
    for spec in specs {
        let mut env = spec.build::<f64>().unwrap();
        let n = env.dim();
        let b = *env.bounds();
        for t in 1..=spec.horizon {
            env.record_action(t, &vec![0.0; n]);
            let oracle = env.round(t).unwrap();
            for _ in 0..100 {
                let x = env
                    .domain()
                    .project(&(0..n).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<_>>())
                    .unwrap();
                let y = env
                    .domain()
                    .project(&(0..n).map(|_| rng.gen_range(-1.5..1.5)).collect::<Vec<_>>())
                    .unwrap();
                let alpha = rng.gen_range(0.0..=1.0);
                let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + (1.0 - alpha) * b).collect();
                let f = |p: &[f64]| oracle.cost.value(p);
                assert!(
                    f(&mix) <= alpha * f(&x) + (1.0 - alpha) * f(&y) + 1e-10,
                    "{}",
                    spec.kind
                );
                let (gx, gy, gm) = (
                    oracle.constraint.values(&x),
                    oracle.constraint.values(&y),
                    oracle.constraint.values(&mix),
                );
                for j in 0..gx.len() {
                    assert!(gm[j] <= alpha * gx[j] + (1.0 - alpha) * gy[j] + 1e-10);
                }
                let (fx, grad) = oracle.cost.eval(&x);
                assert!(norm(&grad) <= b.l_f + 1e-12 && fx.abs() <= b.f + 1e-12, "{}", spec.kind);
                assert!(norm(&gx) <= b.g + 1e-12, "{}", spec.kind);
                assert!(
                    oracle.constraint.eval(&x).1.frobenius() <= b.l_g + 1e-12,
                    "{}",
                    spec.kind
                );
                assert!(norm(&x) <= b.d + 1e-12);
            }
        }
    }
}

#[test]
fn imperfect_predictions_respect_error_bounds() {
    for predictor in [PredictorKind::Noisy { level: 5.0, seed: 2 }, PredictorKind::Adversarial] {
        let spec = quadratic(200, 1);
        let mut env = spec.build::<f64>().unwrap();
        let b = *env.bounds();
        let mut p = Predictor::new(predictor, b);
        let x = vec![0.3, -0.2];
        for t in 1..=spec.horizon {
            let bundle = p.predict(env.as_mut(), t, &x).unwrap();
            env.record_action(t, &x);
            let truth = env.round(t).unwrap();
            let eps: Vec<f64> = truth
                .cost
                .eval(&x)
                .1
                .iter()
                .zip(bundle.cost_gradient_at(&x))
                .map(|(c, p)| c - p)
                .collect();
            let delta = truth.constraint.eval(&x).1.sub(&bundle.linearized_jacobian_at(&x, 2));
            assert!(norm(&eps) <= b.e_m + 1e-12, "{predictor}");
            assert!(delta.frobenius() <= b.delta_m + 1e-12, "{predictor}");
            assert!(norm(&bundle.value_at(&x, 2)) <= b.g + 1e-12, "{predictor}");
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let spec = quadratic(300, 11);
    let pred = PredictorKind::Noisy { level: 0.2, seed: 4 };
    let a = run(&spec, Variant::Llp, pred, 0.5);
    let b = run(&spec, Variant::Llp, pred, 0.5);
    assert_eq!(a.trace.records, b.trace.records);
}

#[test]
fn single_precision_run() {
    let spec = alternating(300);
    let mut env = spec.build::<f32>().unwrap();
    let config = LearnerConfig::new(Variant::Llp, *env.bounds());
    let mut learner = build_learner(config, env.as_ref()).unwrap();
    let mut predictor = Predictor::new(PredictorKind::Perfect, *env.bounds());
    let trace = simulate(env.as_mut(), learner.as_mut(), &mut predictor).unwrap();
    assert_eq!(trace.horizon(), 300);
    assert!(trace
        .records
        .iter()
        .all(|r| r.x[0].is_finite() && (-1.0..=1.0).contains(&r.x[0])));
}

#[test]
fn greedy_baseline_runs_everywhere() {
    for spec in [alternating(200), quadratic(200, 1)] {
        let r = run(&spec, Variant::GreedyBaseline, PredictorKind::None, 0.5);
        assert!(r.trace.records.iter().all(|rec| r.trace.domain.contains(&rec.x, 1e-12)));
    }
}

#[test]
fn power_sum_bound() {
    // Σ_{t≤T} t^{−d} ≤ T^{1−d}/(1−d)
    for d in [0.1f64, 0.5, 0.9] {
        let mut sum = 0.0;
        for t in 1..=1_000_000u32 {
            let tf = f64::from(t);
            sum += tf.powf(-d);
            assert!(sum <= tf.powf(1.0 - d) / (1.0 - d) * (1.0 + 1e-12), "d={d} T={t}");
        }
    }
}

#[test]
fn dual_regularizer_increments_telescope() {
    // φ_{0:t} = 1/a_t; every increment φ_t is nonnegative and they sum exactly to φ_{0:T}
    let r = run(
        &quadratic(400, 7),
        Variant::Llp,
        PredictorKind::Noisy { level: 0.5, seed: 9 },
        0.5,
    );
    let a0 = dual_rate(r.config.a, r.config.bounds.g, 0.0, 0, r.config.beta);
    let phis: Vec<BigRational> = std::iter::once(a0)
        .chain(r.trace.records.iter().map(|rec| rec.a_t))
        .map(|a| BigRational::from_float(1.0 / a).unwrap())
        .collect();
    let mut total = BigRational::zero();
    for pair in phis.windows(2) {
        let step = &pair[1] - &pair[0];
        assert!(step >= BigRational::zero());
        total += step;
    }
    assert_eq!(&total + &phis[0], *phis.last().unwrap());
}

#[test]
fn growth_fit_on_learner_runs() {
    let points: Vec<(f64, f64)> = [100, 1000, 10000]
        .iter()
        .chain(&[30000])
        .map(|&t| {
            let r = run(&alternating(t), Variant::Llp, PredictorKind::None, 0.5);
            let m = compute_metrics(&r.trace, None).unwrap();
            (t as f64, m.final_violation())
        })
        .collect();
    let fit = fit_growth_exponent(&points).unwrap();
    assert!(fit.exponent <= 0.85, "{fit:?}");
}
