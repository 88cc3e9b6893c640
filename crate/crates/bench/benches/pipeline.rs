use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopf_dde::equilibrium::solve_equilibrium;
use hopf_dde::sim::{integrate, History};
use hopf_dde::{analyze, ModelParams};

fn equilibrium(c: &mut Criterion) {
    let mut group = c.benchmark_group("equilibrium");
    for k in [17.5, 120.0, 1750.0] {
        let p = ModelParams::base(k, 60.0);
        group.bench_with_input(BenchmarkId::from_parameter(k), &p, |b, p| {
            b.iter(|| solve_equilibrium(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn full_analysis(c: &mut Criterion) {
    let p = ModelParams::base(17.5, 60.0);
    c.bench_function("analyze k=17.5", |b| b.iter(|| analyze(black_box(&p)).unwrap()));
}

fn simulation(c: &mut Criterion) {
    let an = analyze(&ModelParams::base(17.5, 60.0)).unwrap();
    let p = an.params.with_tau(1.05 * an.hopf.tau);
    let x0 = an.equilibrium.as_array();
    let hist = History::constant([x0[0] + 0.1, x0[1]]);
    let mut group = c.benchmark_group("integrate 5 periods");
    group.sample_size(20);
    for n in [64usize, 128, 256] {
        let h = p.tau / n as f64;
        group.bench_with_input(BenchmarkId::new("steps_per_delay", n), &h, |b, &h| {
            b.iter(|| integrate(&p, &hist, 5.0 * an.hopf.period(), h).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, equilibrium, full_analysis, simulation);
criterion_main!(benches);
