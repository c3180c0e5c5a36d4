//! One worker thread versus every core on the data-parallel hot paths.
//!
//! `cargo bench -p debtlab` compares the two pool sizes; with
//! `--no-default-features` both ids run the sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use debtlab::dataset::{generate, make_variant, GeneratorConfig};
use debtlab::evalcv::{cross_validate, FoldPlan, NeuralFactory, Trainer};
use debtlab::factor::simulate_null_eigenvalues;
use debtlab::forest::{fit_forest, ForestConfig};
use debtlab::neural::TrainConfig;
use debtlab::{par, DatasetVariant};
use std::hint::black_box;

fn pools() -> [(&'static str, usize); 2] {
    [("sequential", 1), ("all_cores", 0)]
}

fn bench(c: &mut Criterion) {
    let raw = generate(&GeneratorConfig::with_rows(3000, 7)).unwrap();
    let b = make_variant(&raw, DatasetVariant::B, 7).unwrap();
    let plan = FoldPlan::new(b.n_rows(), 10, 7).unwrap();
    let forest_cfg = ForestConfig { n_trees: 50, seed: 7, ..Default::default() };
    let rprop = NeuralFactory::new(
        Trainer::Rprop,
        vec![5],
        TrainConfig { max_epochs: 100, tol: 0.0, seed: 7, ..Default::default() },
    );

    let mut g = c.benchmark_group("parallel");
    g.sample_size(10);
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new("forest_fit", name), |bch| {
            bch.iter(|| par::with_threads(threads, || black_box(fit_forest(&b, &forest_cfg).unwrap())))
        });
        g.bench_function(BenchmarkId::new("cv_rprop", name), |bch| {
            bch.iter(|| par::with_threads(threads, || black_box(cross_validate(&rprop, &b, &plan).unwrap())))
        });
        g.bench_function(BenchmarkId::new("null_eigenvalues", name), |bch| {
            bch.iter(|| par::with_threads(threads, || black_box(simulate_null_eigenvalues(3000, 9, 100, 7).unwrap())))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
