#![allow(dead_code)]

use debtlab::Table;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Builds a table from predictor columns and a response (named `y`).
pub fn table_from(cols: &[Vec<f64>], y: &[f64]) -> Table {
    let mut names: Vec<String> = (0..cols.len()).map(|j| format!("x{}", j + 1)).collect();
    names.push("y".into());
    let rows: Vec<Vec<f64>> = (0..y.len())
        .map(|i| {
            let mut r: Vec<f64> = cols.iter().map(|c| c[i]).collect();
            r.push(y[i]);
            r
        })
        .collect();
    Table::new(names, rows, cols.len(), None).unwrap()
}

pub fn uniform_cols(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m).map(|_| (0..n).map(|_| rng.random::<f64>()).collect()).collect()
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    use rand_distr::{Distribution, StandardNormal};
    StandardNormal.sample(rng)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    sab / (saa * sbb).sqrt()
}
