mod common;

use common::{normal, rng, table_from, uniform_cols};
use debtlab::dataset::{generate, GeneratorConfig};
use debtlab::evalcv::{cross_validate, FoldPlan, ForestFactory, OlsFactory};
use debtlab::forest::*;
use debtlab::Error;
use proptest::prelude::*;
use rand::Rng;

/// Plain CART by exhaustive search over every column and midpoint, with
/// the same stopping rules as the forest trees.
enum Cart {
    Leaf(f64),
    Split(usize, f64, Box<Cart>, Box<Cart>),
}

fn sse(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| (v - m).powi(2)).sum()
}

fn cart(x: &[Vec<f64>], y: &[f64], rows: &[usize], min_leaf: usize) -> Cart {
    let ys: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let constant = ys.iter().all(|&v| v == ys[0]);
    if rows.len() < 2 * min_leaf || constant {
        return Cart::Leaf(if constant { ys[0] } else { mean });
    }
    let parent = sse(&ys);
    let mut best: Option<(f64, usize, f64)> = None;
    for (c, col) in x.iter().enumerate() {
        let mut values: Vec<f64> = rows.iter().map(|&i| col[i]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for w in values.windows(2) {
            let thr = 0.5 * (w[0] + w[1]);
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| col[i] <= thr);
            if l.len() < min_leaf || r.len() < min_leaf {
                continue;
            }
            let score = sse(&l.iter().map(|&i| y[i]).collect::<Vec<_>>())
                + sse(&r.iter().map(|&i| y[i]).collect::<Vec<_>>());
            let incumbent = best.map_or(parent, |b| b.0);
            if score < incumbent - 1e-9 * parent {
                best = Some((score, c, thr));
            }
        }
    }
    match best {
        None => Cart::Leaf(mean),
        Some((_, c, thr)) => {
            let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x[c][i] <= thr);
            Cart::Split(c, thr, Box::new(cart(x, y, &l, min_leaf)), Box::new(cart(x, y, &r, min_leaf)))
        }
    }
}

fn cart_predict(t: &Cart, row: &[f64]) -> f64 {
    match t {
        Cart::Leaf(v) => *v,
        Cart::Split(c, thr, l, r) => cart_predict(if row[*c] <= *thr { l } else { r }, row),
    }
}

fn plain(m: usize, min_leaf: usize) -> ForestConfig {
    ForestConfig {
        n_trees: 1,
        mtry: Some(m),
        min_leaf,
        seed: 1,
        bootstrap: false,
    }
}

#[test]
fn single_unbootstrapped_tree_matches_exhaustive_cart() {
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let n = r.random_range(20..=100);
        let m = r.random_range(1..=4);
        let min_leaf = r.random_range(1..=6);
        let cols = uniform_cols(&mut r, n, m);
        let y: Vec<f64> = (0..n).map(|i| (cols[0][i] * 6.0).sin() + 0.2 * normal(&mut r)).collect();
        let t = table_from(&cols, &y);
        let f = fit_forest(&t, &plain(m, min_leaf)).unwrap();
        let oracle = cart(&cols, &y, &(0..n).collect::<Vec<_>>(), min_leaf);
        let probes = uniform_cols(&mut r, 200, m);
        for i in 0..n + 200 {
            let row: Vec<f64> = if i < n {
                cols.iter().map(|c| c[i]).collect()
            } else {
                probes.iter().map(|c| c[i - n]).collect()
            };
            let got = f.trees[0].predict_row(&row);
            let want = cart_predict(&oracle, &row);
            assert!((got - want).abs() < 1e-12, "seed {seed}: {got} vs {want}");
        }
    }
}

#[test]
fn constant_response_gives_single_leaves_and_zero_oob() {
    let mut r = rng(1);
    let cols = uniform_cols(&mut r, 60, 3);
    let t = table_from(&cols, &[0.3; 60]);
    let f = fit_forest(&t, &ForestConfig { n_trees: 20, ..Default::default() }).unwrap();
    assert!(f.trees.iter().all(|tr| tr.nodes.len() == 1));
    assert!(f.predict(&t).unwrap().iter().all(|v| (v - 0.3).abs() < 1e-12));
    assert!(f.oob_error(&t).unwrap() < 1e-12);
}

#[test]
fn forest_mean_is_average_of_trees() {
    let t = generate(&GeneratorConfig::with_rows(400, 2)).unwrap();
    let f = fit_forest(&t, &ForestConfig { n_trees: 25, ..Default::default() }).unwrap();
    let x = f.encode(&t).unwrap();
    let pred = f.predict(&t).unwrap();
    for i in 0..t.n_rows() {
        let oracle = f.trees.iter().map(|tr| tr.predict_row(x.row(i))).sum::<f64>() / 25.0;
        assert!((pred[i] - oracle).abs() < 1e-12);
    }
    let single = fit_forest(&t, &ForestConfig { n_trees: 1, ..Default::default() }).unwrap();
    let p1 = single.predict(&t).unwrap();
    for i in 0..t.n_rows() {
        assert_eq!(p1[i], single.trees[0].predict_row(x.row(i)));
    }
}

#[test]
fn same_seed_same_forest() {
    let t = generate(&GeneratorConfig::with_rows(300, 5)).unwrap();
    let cfg = ForestConfig { n_trees: 30, seed: 44, ..Default::default() };
    let (a, b) = (fit_forest(&t, &cfg).unwrap(), fit_forest(&t, &cfg).unwrap());
    assert_eq!(a.trees, b.trees);
    let probe = generate(&GeneratorConfig::with_rows(100, 6)).unwrap();
    assert_eq!(a.predict(&probe).unwrap(), b.predict(&probe).unwrap());
}

#[test]
fn oob_tracks_cross_validation() {
    let t = generate(&GeneratorConfig::with_rows(2000, 7)).unwrap();
    let config = ForestConfig { n_trees: 200, ..Default::default() };
    let oob = fit_forest(&t, &config).unwrap().oob_error(&t).unwrap();
    let plan = FoldPlan::new(t.n_rows(), 10, 7).unwrap();
    let cv = cross_validate(&ForestFactory { config }, &t, &plan).unwrap().rmse_mean;
    assert!((oob - cv).abs() <= 0.15 * cv, "oob {oob} cv {cv}");
}

#[test]
fn single_tree_oob_excludes_in_bag_rows() {
    let mut r = rng(3);
    let cols = uniform_cols(&mut r, 100, 2);
    let y: Vec<f64> = (0..100).map(|i| cols[0][i] + cols[1][i]).collect();
    let t = table_from(&cols, &y);
    let f = fit_forest(&t, &ForestConfig { n_trees: 1, ..Default::default() }).unwrap();
    let oob = &f.oob_indices[0];
    assert!(!oob.is_empty() && oob.len() < 100);
    let x = f.encode(&t).unwrap();
    let sse: f64 = oob.iter().map(|&i| (y[i] - f.trees[0].predict_row(x.row(i))).powi(2)).sum();
    let expected = (sse / oob.len() as f64).sqrt();
    assert!((f.oob_error(&t).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn no_oob_coverage_is_an_error() {
    let mut r = rng(4);
    let cols = uniform_cols(&mut r, 30, 2);
    let t = table_from(&cols, &cols[0]);
    let f = fit_forest(&t, &plain(2, 2)).unwrap();
    assert!(matches!(f.oob_error(&t), Err(Error::NoOobCoverage)));
}

#[test]
fn config_errors() {
    let mut r = rng(5);
    let cols = uniform_cols(&mut r, 30, 2);
    let t = table_from(&cols, &cols[1]);
    assert!(fit_forest(&t, &ForestConfig { mtry: Some(3), ..Default::default() }).is_err());
    assert!(fit_forest(&t, &ForestConfig { n_trees: 0, ..Default::default() }).is_err());
    assert!(fit_forest(&t.select_rows(&[0, 1, 2]), &ForestConfig::default()).is_err());
}

#[test]
fn duplicating_rows_with_doubled_leaf_size_keeps_splits() {
    for seed in 0..8u64 {
        let mut r = rng(seed + 100);
        let cols = uniform_cols(&mut r, 80, 4);
        let y: Vec<f64> = (0..80).map(|i| cols[1][i] * cols[2][i] + 0.1 * normal(&mut r)).collect();
        let doubled_cols: Vec<Vec<f64>> = cols.iter().map(|c| c.iter().chain(c).copied().collect()).collect();
        let doubled_y: Vec<f64> = y.iter().chain(&y).copied().collect();
        for mtry in [2, 4] {
            let base = ForestConfig { mtry: Some(mtry), ..plain(4, 3) };
            let a = fit_forest(&table_from(&cols, &y), &base).unwrap();
            let b = fit_forest(&table_from(&doubled_cols, &doubled_y), &ForestConfig { min_leaf: 6, ..base }).unwrap();
            let (ta, tb) = (&a.trees[0].nodes, &b.trees[0].nodes);
            assert_eq!(ta.len(), tb.len());
            for (na, nb) in ta.iter().zip(tb) {
                match (na, nb) {
                    (Node::Split { col: c1, threshold: t1, .. }, Node::Split { col: c2, threshold: t2, .. }) => {
                        assert_eq!((c1, t1), (c2, t2))
                    }
                    (Node::Leaf { value: v1, .. }, Node::Leaf { value: v2, .. }) => assert!((v1 - v2).abs() < 1e-12),
                    _ => panic!("node kinds differ"),
                }
            }
        }
    }
}

#[test]
fn forest_captures_interaction_that_ols_misses() {
    let mut r = rng(12);
    let cols: Vec<Vec<f64>> = (0..2).map(|_| (0..2000).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    let y: Vec<f64> = (0..2000).map(|i| cols[0][i] * cols[1][i] + 0.05 * normal(&mut r)).collect();
    let t = table_from(&cols, &y);
    let plan = FoldPlan::new(2000, 10, 1).unwrap();
    let forest = ForestFactory { config: ForestConfig { n_trees: 100, ..Default::default() } };
    let rf = cross_validate(&forest, &t, &plan).unwrap().r2_mean;
    let ols = cross_validate(&OlsFactory, &t, &plan).unwrap().r2_mean;
    assert!(rf - ols >= 0.3, "forest {rf} ols {ols}");
}

#[test]
fn importance_ranks_the_signal_column_first() {
    let mut r = rng(21);
    let cols = uniform_cols(&mut r, 500, 3);
    let y: Vec<f64> = (0..500).map(|i| 2.0 * cols[2][i] + 0.05 * normal(&mut r)).collect();
    let t = table_from(&cols, &y);
    let f = fit_forest(&t, &ForestConfig { n_trees: 50, mtry: Some(3), ..Default::default() }).unwrap();
    let imp = f.permutation_importance(&t, 1).unwrap();
    let top = imp.iter().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
    assert_eq!(top.0, "x3");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn predictions_stay_in_training_range(seed in any::<u64>(), n in 20usize..150, trees in 1usize..20) {
        let mut r = rng(seed);
        let cols = uniform_cols(&mut r, n, 3);
        let y: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let t = table_from(&cols, &y);
        let f = fit_forest(&t, &ForestConfig { n_trees: trees, min_leaf: 2, seed, ..Default::default() }).unwrap();
        let (lo, hi) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let probe_cols: Vec<Vec<f64>> = (0..3).map(|_| (0..50).map(|_| r.random_range(-2.0..3.0)).collect()).collect();
        for p in f.predict(&table_from(&probe_cols, &[0.0; 50])).unwrap() {
            prop_assert!(p >= lo - 1e-12 && p <= hi + 1e-12);
        }
    }
}
