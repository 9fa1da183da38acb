use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use lblab_core::approx_oracle::{best_l1, best_uniform};
use lblab_core::instances::{fsm_instance, nesterov_chain, Family, Instance};
use lblab_core::optimizers::{expected_error_curve, make_optimizer, run, Metric, OptParams};
use lblab_core::symbolic_trace::{trace_gd_toy, trace_oblivious};
use num_rational::BigRational;

fn approximation(c: &mut Criterion) {
    let mut g = c.benchmark_group("approximation");
    g.sample_size(10);
    g.bench_function("uniform_k8_4097", |b| {
        b.iter(|| best_uniform(|x| 1.0 / x, 1.0, 100.0, black_box(8), 4097).unwrap())
    });
    g.bench_function("l1_k8_8193", |b| {
        b.iter(|| best_l1(|x| 1.0 / (2.5 - x), -1.0, 1.0, black_box(8), 8193).unwrap())
    });
    g.finish();
}

fn traces(c: &mut Criterion) {
    let mut g = c.benchmark_group("symbolic");
    g.sample_size(10);
    let l = BigRational::from_integer(4.into());
    g.bench_function("gd_toy_k20", |b| b.iter(|| trace_gd_toy(black_box(20), &l)));
    let fam = Family::Fsm {
        n: 3,
        d: 4,
        l: 10.0,
        mu: 1.0,
        r: 1.0,
        coordinate: 0,
    };
    let p = OptParams {
        l: Some(10.0),
        mu: Some(1.0),
        n: Some(3),
        d: Some(4),
        ..Default::default()
    };
    let saga = make_optimizer("saga", &p).unwrap();
    g.bench_function("saga_fsm_k8", |b| {
        b.iter(|| trace_oblivious(&saga, &fam, black_box(8), 0).unwrap())
    });
    g.finish();
}

fn numeric(c: &mut Criterion) {
    let mut g = c.benchmark_group("numeric");
    g.sample_size(10);
    let inst = Instance::Quadratic(fsm_instance(&[-49.5; 8], 100.0, 1.0, 1.0, 4).unwrap());
    let p = OptParams::for_instance(&inst);
    for name in ["gd", "sag", "svrg"] {
        let opt = make_optimizer(name, &p).unwrap();
        g.bench_function(format!("{name}_fsm_200"), |b| {
            b.iter(|| run(&opt, &inst, black_box(200), 1).unwrap())
        });
    }
    let chain = Instance::Quadratic(nesterov_chain(200, 200.0, 1.0).unwrap());
    let lbfgs = make_optimizer(
        "lbfgs",
        &OptParams {
            memory: Some(100),
            ..OptParams::for_instance(&chain)
        },
    )
    .unwrap();
    g.bench_function("lbfgs_chain_100", |b| {
        b.iter(|| run(&lbfgs, &chain, black_box(100), 0).unwrap())
    });
    let fam = Family::Fsm {
        n: 8,
        d: 4,
        l: 100.0,
        mu: 1.0,
        r: 1.0,
        coordinate: 0,
    };
    let sag = make_optimizer("sag", &p).unwrap();
    let grid = fam.grid(3);
    g.bench_function("sag_curve_3x10x100", |b| {
        b.iter(|| expected_error_curve(&sag, &fam, &grid, 100, 10, Metric::Suboptimality).unwrap())
    });
    g.finish();
}

criterion_group!(benches, approximation, traces, numeric);
criterion_main!(benches);
