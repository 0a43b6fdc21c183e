use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use steplearn_bench::{cg_context, gd_context};
use steplearn_core::certificate::report::certificate_report;
use steplearn_core::certificate::{cg_eta_inner_max_fstar, g_star, h_star};

fn refined_bounds(c: &mut Criterion) {
    let ctx = cg_context();
    let (rho, eta) = (ctx.rho_interval.hi, ctx.eta_interval.unwrap().lo);
    c.bench_function("g_star", |b| b.iter(|| g_star(black_box(&ctx), rho, eta).unwrap()));
    c.bench_function("h_star", |b| b.iter(|| h_star(black_box(&ctx), rho, eta).unwrap()));
    c.bench_function("fstar/j=20", |b| {
        b.iter(|| cg_eta_inner_max_fstar(black_box(&ctx), rho, 20).unwrap())
    });
}

fn reports(c: &mut Criterion) {
    let gd = gd_context();
    c.bench_function("certificate_report/gd", |b| b.iter(|| certificate_report(black_box(&gd)).unwrap()));
    let cg = cg_context();
    c.bench_function("certificate_report/cg", |b| b.iter(|| certificate_report(black_box(&cg)).unwrap()));
}

criterion_group!(benches, refined_bounds, reports);
criterion_main!(benches);
