use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spiopt_bench::{f1_config, ALL_KINDS};
use spiopt_core::{gradcheck_suite, run, theorem_suite, Objective, ParamVector, TestFunction};

fn f1_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("f1_run_1000_steps");
    for kind in ALL_KINDS {
        let cfg = f1_config(kind, 1000);
        group.bench_with_input(BenchmarkId::from_parameter(kind), &cfg, |b, cfg| {
            b.iter(|| run(&TestFunction::F1, black_box(cfg)).unwrap())
        });
    }
    group.finish();
}

fn objective_evals(c: &mut Criterion) {
    let p = ParamVector::from([0.3, -0.7]);
    for f in TestFunction::ALL {
        c.bench_function(&format!("eval_{}", f.label()), |b| b.iter(|| f.eval(black_box(&p))));
    }
}

fn suites(c: &mut Criterion) {
    c.bench_function("theorem_suite_200", |b| {
        b.iter(|| theorem_suite(200, 2024, 100).unwrap())
    });
    c.bench_function("gradcheck_suite", |b| b.iter(|| gradcheck_suite(black_box(0))));
}

criterion_group!(benches, f1_runs, objective_evals, suites);
criterion_main!(benches);
