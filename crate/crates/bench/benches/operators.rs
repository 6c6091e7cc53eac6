use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use kantorovich::funcdsl::presets;
use kantorovich::operators::{apply, apply_grid, Variant};
use kantorovich_bench::{grid, spec};

fn single_point(c: &mut Criterion) {
    let f1 = presets::f1();
    let f3 = presets::f3();
    let mut group = c.benchmark_group("apply");
    for variant in [
        Variant::SamplingKantorovich,
        Variant::SamplingKantorovichSymmetric,
        Variant::ConvKantorovichScaled,
        Variant::ConvKantorovichUnit,
    ] {
        let s = spec(variant, 15.0);
        group.bench_function(BenchmarkId::new(variant.label(), 15), |b| {
            b.iter(|| apply(&s, &f1, black_box(0.37)).unwrap())
        });
    }
    let s = spec(Variant::MellinKantorovich, 20.0);
    group.bench_function(BenchmarkId::new("(4)", 20), |b| {
        b.iter(|| apply(&s, &f3, black_box(1.7)).unwrap())
    });
    group.finish();
}

fn figure_grid(c: &mut Criterion) {
    let f1 = presets::f1();
    let z = grid(-4.0, 4.0, 801);
    let mut group = c.benchmark_group("apply_grid_801");
    group.sample_size(10);
    for w in [5.0, 15.0] {
        let s = spec(Variant::ConvKantorovichScaled, w);
        group.bench_function(BenchmarkId::new("(2)", w), |b| {
            b.iter(|| apply_grid(&s, &f1, black_box(&z)).unwrap())
        });
        let s = spec(Variant::SamplingKantorovich, w);
        group.bench_function(BenchmarkId::new("(1)", w), |b| {
            b.iter(|| apply_grid(&s, &f1, black_box(&z)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_point, figure_grid);
criterion_main!(benches);
