use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use lblab_core::approx_bounds::{chebyshev_ratio, l2_weighted_exact, l2_weighted_lb, maxnorm_lb};
use lblab_core::approx_oracle::best_uniform;
use lblab_core::harness::ExperimentConfig;
use lblab_core::instances::{fsm_instance, rlm_instance, Family, Instance, OracleFamily};
use lblab_core::optimizers::schedules::Sdca;
use lblab_core::optimizers::{
    audit_obliviousness, make_optimizer, run, run_with, OptParams, Optimizer, Sampling, Schedule,
    Step, StreamRng, Term, Update,
};
use lblab_core::oracles::{answer, OracleQuery};
use lblab_core::polynomials::{MultiPoly, UniPoly};
use lblab_core::symbolic_trace::trace_oblivious;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn small_poly() -> impl Strategy<Value = UniPoly> {
    prop::collection::vec(-20i64..=20, 0..6).prop_map(|c| UniPoly::from_i64(&c))
}

fn fsm_params(n: usize, d: usize, l: f64) -> OptParams {
    OptParams {
        l: Some(l),
        mu: Some(1.0),
        n: Some(n),
        d: Some(d),
        ..Default::default()
    }
}

const STOCHASTIC: [&str; 6] = ["sgd", "sag", "saga", "svrg", "sdca_primal", "cd_random"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn evaluation_is_a_ring_homomorphism(p in small_poly(), q in small_poly(), num in -9i64..=9, den in 1i64..=7) {
        let x = rat(num, den);
        prop_assert_eq!((&p * &q).eval(&x), p.eval(&x) * q.eval(&x));
        prop_assert_eq!((&p + &q).eval(&x), p.eval(&x) + q.eval(&x));
        prop_assert_eq!((&p - &q).eval(&x), p.eval(&x) - q.eval(&x));
    }

    #[test]
    fn degrees_add_under_multiplication(p in small_poly(), q in small_poly()) {
        prop_assume!(!p.is_zero() && !q.is_zero());
        let (a, b) = (MultiPoly::from_uni(&p), MultiPoly::from_uni(&q));
        let prod = a.checked_mul(&b).unwrap();
        prop_assert_eq!(
            prod.total_degree().finite().unwrap(),
            a.total_degree().finite().unwrap() + b.total_degree().finite().unwrap()
        );
        prop_assert_eq!(MultiPoly::from_json(&prod.to_json()).unwrap(), prod);
    }

    #[test]
    fn uniform_bound_is_positive_and_decreasing(a in 0.1f64..10.0, width in 0.1f64..100.0, c in 0.0f64..5.0, k in 0u32..30) {
        let b = a + width;
        let now = maxnorm_lb(a, b, c, k).unwrap();
        let next = maxnorm_lb(a, b, c, k + 1).unwrap();
        prop_assert!(now > 0.0 && next < now);
        let r = chebyshev_ratio((b + a + 2.0 * c) / (b - a));
        prop_assert!(r > 0.0 && r < 1.0);
    }

    #[test]
    fn weighted_l2_optimum_exceeds_its_bound(alpha in -0.99f64..-0.01, k in 0u32..=8) {
        let exact = l2_weighted_exact(alpha, k).unwrap();
        let lb = l2_weighted_lb(alpha, k).unwrap();
        prop_assert!(exact >= lb * (1.0 - 1e-12), "{} < {}", exact, lb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn best_uniform_never_beats_the_bound(a in 0.5f64..3.0, ratio in 1.5f64..50.0, k in 0usize..=6) {
        let b = a * ratio;
        let fit = best_uniform(|x| 1.0 / x, a, b, k, 1025).unwrap();
        let lb = maxnorm_lb(a, b, 0.0, k as u32).unwrap();
        prop_assert!(fit.error >= lb * (1.0 - 1e-9), "{} < {}", fit.error, lb);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn fsm_minimizer_has_zero_gradient(etas in prop::collection::vec(-49.5f64..=49.5, 1..6), d in 2usize..7) {
        let inst = fsm_instance(&etas, 100.0, 1.0, 1.0, d).unwrap();
        let g = inst.model.gradient(&inst.minimizer);
        prop_assert!(g.iter().all(|x| x.abs() <= 1e-12), "{:?}", g);
        // Any other point is worse.
        let mut w = inst.minimizer.clone();
        w[0] += 0.1;
        prop_assert!(inst.model.value(&w) > inst.optimal_value);
    }

    #[test]
    fn rlm_duality_gap_closes(psis in prop::collection::vec(-1.5f64..=1.5, 1..5), lambda in 0.001f64..1.0) {
        let n = 2 * psis.len();
        let inst = rlm_instance(&psis, lambda, n).unwrap();
        let g = inst.dual.gradient(&inst.dual_minimizer);
        prop_assert!(g.iter().all(|x| x.abs() <= 1e-10));
        let w = inst.primal_from_dual(&inst.dual_minimizer);
        let gap = inst.primal_value(&w) + inst.dual_optimum;
        prop_assert!(gap.abs() <= 1e-10 * (1.0 + inst.dual_optimum.abs()), "gap {}", gap);
    }

    #[test]
    fn coordinate_oracle_zeroes_the_partial(
        etas in prop::collection::vec(-4.5f64..=4.5, 2..4),
        w in prop::collection::vec(-3.0f64..3.0, 4),
        i in 0usize..4,
    ) {
        let inst = fsm_instance(&etas, 10.0, 1.0, 1.0, 4).unwrap();
        for j in 0..etas.len() {
            let out = answer(&inst.model, &w, &OracleQuery::SteepestCd { coordinate: i, component: j }).unwrap();
            prop_assert!(inst.model.component_gradient(j, &out)[i].abs() <= 1e-12);
            for c in (0..4).filter(|&c| c != i) {
                prop_assert_eq!(out[c], w[c]);
            }
        }
    }

    #[test]
    fn stochastic_schedules_are_oblivious_and_reproducible(which in 0usize..6, seed in any::<u64>(), eta in -49.5f64..=49.5) {
        let inst = Instance::Quadratic(fsm_instance(&[eta, 0.0, -eta], 100.0, 1.0, 1.0, 4).unwrap());
        let opt = make_optimizer(STOCHASTIC[which], &OptParams::for_instance(&inst)).unwrap();
        prop_assert!(audit_obliviousness(&opt, &inst, 40, seed).unwrap());
        let a = run(&opt, &inst, 40, seed).unwrap();
        let b = run(&opt, &inst, 40, seed).unwrap();
        prop_assert_eq!(a.suboptimality, b.suboptimality);
        prop_assert_eq!(a.touches, b.touches);
    }

    #[test]
    fn draws_without_replacement_are_permutations(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = StreamRng::new(seed);
        for _ in 0..3 {
            let mut seen: Vec<usize> = (0..n).map(|_| rng.component(n, Sampling::WithoutReplacement)).collect();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..n).collect::<Vec<_>>());
        }
    }

    #[test]
    fn config_hash_tracks_content(seeds in 1usize..1000, iters in 0usize..1000) {
        let src = format!("[experiment]\nseeds = {seeds}\niterations = {iters}\n");
        let a = ExperimentConfig::from_toml(&src).unwrap();
        let b = ExperimentConfig::from_toml(&src).unwrap();
        prop_assert_eq!(a.hash(), b.hash());
        let c = ExperimentConfig::from_toml(&format!("[experiment]\nseeds = {}\niterations = {iters}\n", seeds + 1)).unwrap();
        prop_assert_ne!(a.hash(), c.hash());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn symbolic_and_float_runs_agree(which in 0usize..6, seed in 0u64..1000, eighths in -36i32..=36) {
        let family = Family::Fsm { n: 3, d: 4, l: 10.0, mu: 1.0, r: 1.0, coordinate: 1 };
        let eta = eighths as f64 / 8.0;
        let opt = make_optimizer(STOCHASTIC[which], &fsm_params(3, 4, 10.0)).unwrap();
        let k = 6;
        let trace = trace_oblivious(&opt, &family, k, seed).unwrap();
        for (step, &deg) in trace.degree_history.iter().enumerate() {
            prop_assert!(deg <= step);
        }
        let exact = trace.iterate().eval_f64(&family.parameter_point(eta)).unwrap();
        let rec = run_with(&opt, &family.instantiate(eta).unwrap(), k, seed, true).unwrap();
        let float = &rec.iterates.unwrap()[k];
        for (a, b) in exact.iter().zip(float) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }
}

/// Exact coordinate maximisation alternating between the two dual
/// coordinates of one data pair.
struct AlternatePair;

impl Schedule for AlternatePair {
    fn name(&self) -> &str {
        "alternate_pair"
    }
    fn tracked_points(&self) -> usize {
        1
    }
    fn family(&self) -> OracleFamily {
        OracleFamily::Dual
    }
    fn step(&self, k: usize, _rng: &mut StreamRng) -> Step {
        vec![Update {
            target: 0,
            terms: vec![Term {
                source: 0,
                query: OracleQuery::DualExactCd { coordinate: k % 2 },
            }],
        }]
    }
}

#[test]
fn rlm_budget_holds_per_variable_but_not_per_entry() {
    let family = Family::Rlm {
        n: 6,
        lambda: 0.1,
        block: 0,
    };
    let opt = Optimizer::Oblivious(Box::new(AlternatePair));
    let k = 4;
    let trace = trace_oblivious(&opt, &family, k, 0).unwrap();
    let it = trace.iterate();
    // Both coordinates depend on the same sine, so summing each entry's
    // degree double counts it.
    assert!(it.per_variable_degree_sum() <= k);
    assert!(
        it.entry_degree_sum() > k,
        "entry degree sum {}",
        it.entry_degree_sum()
    );
}

#[test]
fn sdca_stays_within_the_per_variable_budget() {
    let family = Family::Rlm {
        n: 6,
        lambda: 0.1,
        block: 2,
    };
    let opt = Optimizer::Oblivious(Box::new(Sdca {
        n: 6,
        sampling: Sampling::WithReplacement,
    }));
    for seed in 0..4 {
        let trace = trace_oblivious(&opt, &family, 10, seed).unwrap();
        assert!(trace.iterate().per_variable_degree_sum() <= 10);
    }
}
