//! Random-forest regression: CART trees grown on bootstrap samples with a
//! random subset of `mtry` candidate columns per node, predictions averaged.
//!
//! A bootstrap sample is represented by per-row draw counts rather than by
//! materialized duplicates. Counts act as weights everywhere (node sizes,
//! means, variances), which is exactly equivalent to growing on the
//! resampled rows. Column orderings are sorted once per forest and filtered
//! per tree, so growing a tree never sorts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::encode::{ClassCoding, FeatureEncoder};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par;
use crate::rng::{substream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate columns per split; `None` means ⌈m/3⌉.
    pub mtry: Option<usize>,
    pub min_leaf: usize,
    pub seed: u64,
    /// Draw a bootstrap sample per tree. Disabling grows every tree on the
    /// full table, which is only useful for testing against plain CART.
    pub bootstrap: bool,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            n_trees: 500,
            mtry: None,
            min_leaf: 5,
            seed: 7,
            bootstrap: true,
        }
    }
}

impl ForestConfig {
    pub fn resolved_mtry(&self, m: usize) -> usize {
        self.mtry.unwrap_or_else(|| m.div_ceil(3))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        value: f64,
        /// Number of training draws that reached the leaf.
        weight: usize,
    },
    Split {
        col: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

/// Nodes in preorder; the root is `nodes[0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<Node>,
    pub max_depth_reached: usize,
}

impl RegressionTree {
    #[inline]
    pub fn predict_row(&self, x: &[f64]) -> f64 {
        let mut k = 0;
        loop {
            match self.nodes[k] {
                Node::Leaf { value, .. } => return value,
                Node::Split {
                    col,
                    threshold,
                    left,
                    right,
                } => k = if x[col] <= threshold { left } else { right },
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

/// A candidate split must lower the summed child SSE by more than this
/// fraction of the node SSE to replace the incumbent (or the unsplit node).
/// Keeps rounding noise from overriding the column-then-threshold order.
pub const SPLIT_TIE_TOLERANCE: f64 = 1e-12;

/// Column-major training data plus per-column row orderings.
struct Presorted {
    cols: Vec<Vec<f64>>,
    y: Vec<f64>,
    order: Vec<Vec<u32>>,
}

impl Presorted {
    fn new(x: &Matrix, y: Vec<f64>) -> Self {
        let cols: Vec<Vec<f64>> = (0..x.cols()).map(|j| x.column(j)).collect();
        let order = cols
            .iter()
            .map(|c| {
                let mut idx: Vec<u32> = (0..c.len() as u32).collect();
                idx.sort_by(|&a, &b| c[a as usize].total_cmp(&c[b as usize]).then(a.cmp(&b)));
                idx
            })
            .collect();
        Presorted { cols, y, order }
    }
}

struct TreeBuilder<'a> {
    data: &'a Presorted,
    weights: &'a [u32],
    min_leaf: usize,
    mtry: usize,
    rng: &'a mut StreamRng,
    sorted: Vec<Vec<u32>>,
    goes_left: Vec<bool>,
    scratch: Vec<u32>,
    features: Vec<usize>,
    nodes: Vec<Node>,
    max_depth: usize,
}

struct BestSplit {
    col: usize,
    threshold: f64,
    score: f64,
}

impl<'a> TreeBuilder<'a> {
    fn new(
        data: &'a Presorted,
        weights: &'a [u32],
        min_leaf: usize,
        mtry: usize,
        rng: &'a mut StreamRng,
    ) -> Self {
        let sorted = data
            .order
            .iter()
            .map(|o| o.iter().copied().filter(|&r| weights[r as usize] > 0).collect())
            .collect();
        TreeBuilder {
            data,
            weights,
            min_leaf,
            mtry,
            rng,
            sorted,
            goes_left: vec![false; weights.len()],
            scratch: Vec::new(),
            features: (0..data.cols.len()).collect(),
            nodes: Vec::new(),
            max_depth: 0,
        }
    }

    fn build(mut self) -> RegressionTree {
        let n = self.sorted.first().map_or(0, Vec::len);
        self.grow(0, n, 0);
        RegressionTree {
            nodes: self.nodes,
            max_depth_reached: self.max_depth,
        }
    }

    fn grow(&mut self, start: usize, end: usize, depth: usize) -> usize {
        self.max_depth = self.max_depth.max(depth);
        let (mut w, mut s, mut ymin, mut ymax) = (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY);
        for &r in &self.sorted[0][start..end] {
            let r = r as usize;
            let wr = self.weights[r] as usize;
            let y = self.data.y[r];
            w += wr;
            s += wr as f64 * y;
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        let id = self.nodes.len();
        let leaf = Node::Leaf {
            value: if ymin == ymax { ymin } else { s / w as f64 },
            weight: w,
        };
        if w < 2 * self.min_leaf || ymin == ymax {
            self.nodes.push(leaf);
            return id;
        }
        let mean = s / w as f64;
        let node_sse: f64 = self.sorted[0][start..end]
            .iter()
            .map(|&r| self.weights[r as usize] as f64 * (self.data.y[r as usize] - mean).powi(2))
            .sum();
        let Some(best) = self.best_split(start, end, w, s, SPLIT_TIE_TOLERANCE * node_sse) else {
            self.nodes.push(leaf);
            return id;
        };
        self.nodes.push(Node::Split {
            col: best.col,
            threshold: best.threshold,
            left: 0,
            right: 0,
        });

        let col = &self.data.cols[best.col];
        let mut n_left = 0;
        for &r in &self.sorted[best.col][start..end] {
            let l = col[r as usize] <= best.threshold;
            self.goes_left[r as usize] = l;
            n_left += l as usize;
        }
        for f in 0..self.sorted.len() {
            let range = &mut self.sorted[f][start..end];
            self.scratch.clear();
            let mut k = 0;
            for i in 0..range.len() {
                let r = range[i];
                if self.goes_left[r as usize] {
                    range[k] = r;
                    k += 1;
                } else {
                    self.scratch.push(r);
                }
            }
            range[k..].copy_from_slice(&self.scratch);
        }

        let left = self.grow(start, start + n_left, depth + 1);
        let right = self.grow(start + n_left, end, depth + 1);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }

    fn sample_features(&mut self) -> Vec<usize> {
        let m = self.features.len();
        for i in 0..self.mtry {
            let j = self.rng.random_range(i..m);
            self.features.swap(i, j);
        }
        let mut chosen = self.features[..self.mtry].to_vec();
        chosen.sort_unstable();
        chosen
    }

    /// Maximizes `S_l²/W_l + S_r²/W_r`, i.e. minimizes the summed child SSE.
    fn best_split(
        &mut self,
        start: usize,
        end: usize,
        w: usize,
        s: f64,
        margin: f64,
    ) -> Option<BestSplit> {
        let parent = s * s / w as f64;
        let mut best: Option<BestSplit> = None;
        for f in self.sample_features() {
            let col = &self.data.cols[f];
            let rows = &self.sorted[f][start..end];
            let (mut wl, mut sl) = (0usize, 0.0);
            for k in 0..rows.len() - 1 {
                let r = rows[k] as usize;
                let wr = self.weights[r] as usize;
                wl += wr;
                sl += wr as f64 * self.data.y[r];
                let (xa, xb) = (col[r], col[rows[k + 1] as usize]);
                if xa == xb || wl < self.min_leaf {
                    continue;
                }
                let wrt = w - wl;
                if wrt < self.min_leaf {
                    break;
                }
                let sr = s - sl;
                let score = sl * sl / wl as f64 + sr * sr / wrt as f64;
                let incumbent = best.as_ref().map_or(parent, |b| b.score);
                if score > incumbent + margin {
                    let mid = 0.5 * (xa + xb);
                    let threshold = if mid < xb { mid } else { xa };
                    best = Some(BestSplit {
                        col: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<RegressionTree>,
    /// Per tree, the training rows left out of its bootstrap sample.
    pub oob_indices: Vec<Vec<usize>>,
    pub config: ForestConfig,
    pub mtry: usize,
    n_train: usize,
    encoder: FeatureEncoder,
}

fn bootstrap_weights(n: usize, rng: &mut StreamRng) -> Vec<u32> {
    let mut w = vec![0u32; n];
    for _ in 0..n {
        w[rng.random_range(0..n)] += 1;
    }
    w
}

pub fn fit_forest(t: &Table, config: &ForestConfig) -> Result<Forest> {
    if t.n_rows() == 0 {
        return Err(Error::InvalidTable("empty table".into()));
    }
    if config.n_trees == 0 {
        return Err(Error::InvalidConfig("n_trees must be >= 1".into()));
    }
    if config.min_leaf == 0 {
        return Err(Error::InvalidConfig("min_leaf must be >= 1".into()));
    }
    if t.n_rows() < 2 * config.min_leaf {
        return Err(Error::TooFewRows {
            needed: 2 * config.min_leaf,
            got: t.n_rows(),
        });
    }
    let encoder = FeatureEncoder::fit(t, ClassCoding::Indicators);
    let m = encoder.n_features();
    let mtry = config.resolved_mtry(m);
    if m == 0 || mtry == 0 || mtry > m {
        return Err(Error::InvalidConfig(format!(
            "mtry must lie in 1..={m}, got {mtry}"
        )));
    }
    let x = encoder.transform(t)?;
    let data = Presorted::new(&x, t.response());
    let n = t.n_rows();

    let grown = par::map_indexed(config.n_trees, |b| {
        let mut rng = substream(config.seed, "forest.tree", b as u64);
        let weights = if config.bootstrap {
            bootstrap_weights(n, &mut rng)
        } else {
            vec![1; n]
        };
        let tree = TreeBuilder::new(&data, &weights, config.min_leaf, mtry, &mut rng).build();
        let oob = (0..n).filter(|&i| weights[i] == 0).collect();
        (tree, oob)
    });
    let (trees, oob_indices) = grown.into_iter().unzip();
    Ok(Forest {
        trees,
        oob_indices,
        config: config.clone(),
        mtry,
        n_train: n,
        encoder,
    })
}

impl Forest {
    pub fn feature_names(&self) -> Vec<String> {
        self.encoder.feature_names()
    }

    pub fn encode(&self, t: &Table) -> Result<Matrix> {
        self.encoder.transform(t)
    }

    /// Mean of the tree outputs per row.
    pub fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        let x = self.encoder.transform(t)?;
        Ok(self.predict_matrix(&x))
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Vec<f64> {
        let k = self.trees.len() as f64;
        par::map_indexed(x.rows(), |i| {
            let row = x.row(i);
            self.trees.iter().map(|t| t.predict_row(row)).sum::<f64>() / k
        })
    }

    fn oob_predictions(&self, x: &Matrix) -> (Vec<f64>, Vec<usize>) {
        let n = x.rows();
        let mut sum = vec![0.0; n];
        let mut count = vec![0usize; n];
        for (tree, oob) in self.trees.iter().zip(&self.oob_indices) {
            for &i in oob {
                sum[i] += tree.predict_row(x.row(i));
                count[i] += 1;
            }
        }
        (sum, count)
    }

    /// Out-of-bag RMSE over rows that were left out by at least one tree.
    pub fn oob_error(&self, t: &Table) -> Result<f64> {
        if t.n_rows() != self.n_train {
            return Err(Error::DimensionMismatch {
                expected: self.n_train,
                got: t.n_rows(),
            });
        }
        let x = self.encoder.transform(t)?;
        let (sum, count) = self.oob_predictions(&x);
        let y = t.response();
        let (mut sse, mut covered) = (0.0, 0usize);
        for i in 0..y.len() {
            if count[i] > 0 {
                let e = y[i] - sum[i] / count[i] as f64;
                sse += e * e;
                covered += 1;
            }
        }
        if covered == 0 {
            return Err(Error::NoOobCoverage);
        }
        Ok((sse / covered as f64).sqrt())
    }

    /// Out-of-bag permutation importance: for each feature, the mean over
    /// trees of the increase in OOB mean squared error after shuffling that
    /// feature among the tree's OOB rows.
    pub fn permutation_importance(&self, t: &Table, seed: u64) -> Result<Vec<(String, f64)>> {
        if t.n_rows() != self.n_train {
            return Err(Error::DimensionMismatch {
                expected: self.n_train,
                got: t.n_rows(),
            });
        }
        let x = self.encoder.transform(t)?;
        let y = t.response();
        let names = self.encoder.feature_names();
        let scores = par::map_indexed(names.len(), |j| {
            let mut rng = substream(seed, "forest.importance", j as u64);
            let mut total = 0.0;
            let mut used = 0usize;
            let mut row = vec![0.0; x.cols()];
            for (tree, oob) in self.trees.iter().zip(&self.oob_indices) {
                if oob.is_empty() {
                    continue;
                }
                let mut perm = oob.clone();
                for i in (1..perm.len()).rev() {
                    perm.swap(i, rng.random_range(0..=i));
                }
                let (mut base, mut shuffled) = (0.0, 0.0);
                for (&i, &p) in oob.iter().zip(&perm) {
                    let e = y[i] - tree.predict_row(x.row(i));
                    base += e * e;
                    row.copy_from_slice(x.row(i));
                    row[j] = x[(p, j)];
                    let e = y[i] - tree.predict_row(&row);
                    shuffled += e * e;
                }
                total += (shuffled - base) / oob.len() as f64;
                used += 1;
            }
            if used == 0 {
                0.0
            } else {
                total / used as f64
            }
        });
        Ok(names.into_iter().zip(scores).collect())
    }
}
