use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use sltb_core::distributions::{ScaleLocation, SltbParams};
use sltb_core::numeric::special::{lgamma, reg_inc_beta};

fn density(c: &mut Criterion) {
    let sl = ScaleLocation::default();
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    c.bench_function("ln_pdf over 101 points", |b| {
        b.iter(|| grid.iter().map(|&g| sl.ln_pdf(black_box(g), 0.7, 12.0)).sum::<f64>())
    });
    let lg = lgamma(12.0).unwrap();
    c.bench_function("ln_pdf_with cached ln gamma", |b| {
        b.iter(|| grid.iter().map(|&g| sl.ln_pdf_with(black_box(g), 0.7, 12.0, lg)).sum::<f64>())
    });
    let p = SltbParams::with_defaults(0.7, 12.0).unwrap();
    c.bench_function("checked logpdf", |b| b.iter(|| p.logpdf(black_box(0.42)).unwrap()));
    c.bench_function("quantile", |b| b.iter(|| p.quantile(black_box(0.37)).unwrap()));
    c.bench_function("regularized incomplete beta", |b| {
        b.iter(|| reg_inc_beta(black_box(0.3), 8.4, 3.6).unwrap())
    });
}

criterion_group!(benches, density);
criterion_main!(benches);
