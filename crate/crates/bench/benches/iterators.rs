use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use steplearn_bench::instances;
use steplearn_core::cost::{evaluate, CostMeasure};
use steplearn_core::iterators::{run, run_summary};
use steplearn_core::learner::erm::CostTable;
use steplearn_core::AlgorithmConfig;

fn trajectories(c: &mut Criterion) {
    let mut group = c.benchmark_group("trajectory");
    for dim in [1, 10, 50] {
        let inst = &instances(dim, 1)[0];
        for config in [AlgorithmConfig::gd(1.0), AlgorithmConfig::cg(1.0, 0.3)] {
            let id = BenchmarkId::new(format!("{:?}", config.method).to_lowercase(), dim);
            group.bench_with_input(id, &config, |b, cfg| {
                b.iter(|| run(black_box(inst), cfg, 10_000).unwrap())
            });
        }
    }
    group.finish();
}

fn summaries(c: &mut Criterion) {
    let inst = &instances(10, 1)[0];
    let config = AlgorithmConfig::cg(1.0, 0.3);
    c.bench_function("run_summary/cg/10", |b| {
        b.iter(|| run_summary(black_box(inst), &config, 10_000).unwrap())
    });
    let traj = run(inst, &config, 10_000).unwrap();
    c.bench_function("primal_integral/cg/10", |b| {
        b.iter(|| evaluate(black_box(&traj), CostMeasure::PrimalIntegral).unwrap())
    });
}

fn cost_table(c: &mut Criterion) {
    let samples = instances(5, 64);
    let configs: Vec<_> = (0..32).map(|i| AlgorithmConfig::gd(0.6 + 0.02 * i as f64)).collect();
    c.bench_function("cost_table/64x32", |b| {
        b.iter(|| CostTable::compute(&configs, black_box(&samples), CostMeasure::PrimalIntegral, 10_000))
    });
}

criterion_group!(benches, trajectories, summaries, cost_table);
criterion_main!(benches);
