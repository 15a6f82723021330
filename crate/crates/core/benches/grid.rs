//! Parallel vs serial evaluation of an integrator grid.

use std::collections::BTreeMap;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lzsm::batch::{map_grid, map_grid_serial, spaced};
use lzsm::schrodinger::diabatic_persistence_probability;
use lzsm::{make_profile, Family, Settings};

fn point(x: &f64) -> f64 {
    let params: BTreeMap<String, f64> = [("v0", *x), ("alpha", 0.5), ("T", 10.0)]
        .iter()
        .map(|&(k, v)| (k.to_string(), v))
        .collect();
    let p = make_profile(Family::TanhModulated, &params).unwrap();
    diabatic_persistence_probability(&p, &Settings::default())
        .unwrap()
        .probability
}

fn grid(c: &mut Criterion) {
    let mut g = c.benchmark_group("tanh_modulated_grid");
    g.sample_size(10);
    for n in [8usize, 32] {
        let xs = spaced(0.1, 10.0, n, true);
        g.bench_with_input(BenchmarkId::new("parallel", n), &xs, |b, xs| {
            b.iter(|| map_grid(xs, point))
        });
        g.bench_with_input(BenchmarkId::new("serial", n), &xs, |b, xs| {
            b.iter(|| map_grid_serial(xs, point))
        });
    }
    g.finish();
}

criterion_group!(benches, grid);
criterion_main!(benches);
