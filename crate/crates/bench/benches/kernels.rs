use criterion::{criterion_group, criterion_main, Criterion};
use germlie::lie::MatrixLieBackend;
use germlie::regularity::evol;
use germlie::sweeps::SweepConfig;
use germlie_bench::{algebra_pair, curve, series_pair};
use std::hint::black_box;

fn bch(c: &mut Criterion) {
    let (x, y) = algebra_pair(2, 0.3);
    for order in [4, 8] {
        let lie = MatrixLieBackend::with_order(2, order);
        c.bench_function(&format!("bch_order_{order}"), |b| {
            b.iter(|| lie.bch(black_box(&x), black_box(&y)).unwrap())
        });
    }
}

fn series_mul(c: &mut Criterion) {
    for degree in [8, 16] {
        let (a, b) = series_pair(2, degree);
        c.bench_function(&format!("series_mul_degree_{degree}"), |bench| {
            bench.iter(|| black_box(&a).mul(black_box(&b)).unwrap())
        });
    }
}

fn evolution(c: &mut Criterion) {
    let cfg = SweepConfig::default();
    let (group, gamma) = curve(&cfg);
    c.bench_function("evol_16_steps", |b| b.iter(|| evol(&group, black_box(&gamma), 16).unwrap()));
}

criterion_group!(benches, bch, series_mul, evolution);
criterion_main!(benches);
