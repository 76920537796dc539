use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use unigrad::problems::builtin_problem;
use unigrad::{Method, SolverConfig};

fn methods(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve/quadratic_d50");
    let p = builtin_problem("quadratic", 50, &Default::default()).unwrap();
    for method in Method::ALL {
        let cfg = SolverConfig {
            delta: Some(1e-3),
            ..SolverConfig::with_eps(1e-3)
        };
        group.bench_with_input(BenchmarkId::from_parameter(method), &cfg, |b, cfg| {
            b.iter(|| method.solve(black_box(&p), cfg).unwrap())
        });
    }
    group.finish();
}

fn ufgm_accuracy(c: &mut Criterion) {
    let mut group = c.benchmark_group("ufgm/hoelder_d10");
    let p = builtin_problem("hoelder", 10, &Default::default()).unwrap();
    for eps in [1e-2, 1e-3, 1e-4] {
        let cfg = SolverConfig::with_eps(eps);
        group.bench_with_input(BenchmarkId::from_parameter(eps), &cfg, |b, cfg| {
            b.iter(|| Method::Ufgm.solve(black_box(&p), cfg).unwrap())
        });
    }
    group.finish();
}

fn composite(c: &mut Criterion) {
    let p = builtin_problem("l1_quadratic", 100, &Default::default()).unwrap();
    let cfg = SolverConfig::with_eps(1e-4);
    c.bench_function("ufgm/l1_quadratic_d100", |b| {
        b.iter(|| Method::Ufgm.solve(black_box(&p), &cfg).unwrap())
    });
}

criterion_group!(benches, methods, ufgm_accuracy, composite);
criterion_main!(benches);
