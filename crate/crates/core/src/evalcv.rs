//! Shared evaluation harness: fold plans, RMSE and R², k-fold
//! cross-validation over pluggable model factories, hidden-size sweeps and
//! the four-family × four-dataset comparison.

use std::fmt;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::dataset::{make_variant_with, DatasetVariant, ExpandConfig, Table};
use crate::encode::{ClassCoding, FeatureEncoder};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::forest::{fit_forest, Forest, ForestConfig};
use crate::linreg::{fit_ols, LinearModel};
use crate::neural::{train_backprop_xy, train_rprop_xy, Activation, Network, Topology, TrainConfig};
use crate::par;
use crate::rng::{derive_seed, substream};

/// Row-to-fold assignment. Fold sizes differ by at most one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    n_folds: usize,
    assignments: Vec<usize>,
    seed: u64,
}

impl FoldPlan {
    /// Deals a uniformly shuffled row order round-robin into `n_folds` folds.
    pub fn new(n_rows: usize, n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {n_folds}")));
        }
        if n_rows < 2 * n_folds {
            return Err(Error::TooFewRows {
                needed: 2 * n_folds,
                got: n_rows,
            });
        }
        let mut order: Vec<usize> = (0..n_rows).collect();
        order.shuffle(&mut substream(seed, "evalcv.folds", 0));
        let mut assignments = vec![0; n_rows];
        for (k, &r) in order.iter().enumerate() {
            assignments[r] = k % n_folds;
        }
        Ok(FoldPlan {
            n_folds,
            assignments,
            seed,
        })
    }

    /// A plan from explicit assignments, checked against the fold-size rules.
    pub fn from_assignments(assignments: Vec<usize>, n_folds: usize, seed: u64) -> Result<Self> {
        if n_folds < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 folds, got {n_folds}")));
        }
        let mut sizes = vec![0usize; n_folds];
        for &a in &assignments {
            if a >= n_folds {
                return Err(Error::InvalidConfig(format!("fold index {a} out of range")));
            }
            sizes[a] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        if *lo < 2 || hi - lo > 1 {
            return Err(Error::InvalidConfig(format!("unbalanced fold sizes {sizes:?}")));
        }
        Ok(FoldPlan {
            n_folds,
            assignments,
            seed,
        })
    }

    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn n_rows(&self) -> usize {
        self.assignments.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.assignments[r] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|&r| self.assignments[r] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.n_folds];
        for &a in &self.assignments {
            s[a] += 1;
        }
        s
    }

    /// FNV-1a hash of the fold count and assignments, as 16 hex digits.
    pub fn digest(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        };
        eat(self.n_folds as u64);
        for &a in &self.assignments {
            eat(a as u64);
        }
        format!("{h:016x}")
    }
}

fn check_pair(observed: &[f64], predicted: &[f64], min_len: usize) -> Result<()> {
    if observed.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: observed.len(),
            got: predicted.len(),
        });
    }
    if observed.len() < min_len {
        return Err(Error::TooFewRows {
            needed: min_len,
            got: observed.len(),
        });
    }
    Ok(())
}

/// `sqrt(Σ(y_obs − y_model)² / n)`
pub fn rmse(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 1)?;
    let sse: f64 = observed.iter().zip(predicted).map(|(o, p)| (o - p) * (o - p)).sum();
    Ok((sse / observed.len() as f64).sqrt())
}

fn centered_sums(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        saa += dx * dx;
        sbb += dy * dy;
        sab += dx * dy;
    }
    (saa, sbb, sab)
}

/// Squared Pearson correlation of observed and predicted values, clamped to
/// [0, 1]; 0 when the predictions are constant.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 2)?;
    let (soo, spp, sop) = centered_sums(observed, predicted);
    if soo == 0.0 {
        return Err(Error::ZeroVariance("observed".into()));
    }
    if spp == 0.0 || predicted.iter().all(|&p| p == predicted[0]) {
        return Ok(0.0);
    }
    Ok((sop * sop / (soo * spp)).clamp(0.0, 1.0))
}

/// `1 − SSE/SST`; may be negative for models worse than the mean.
pub fn r_squared_traditional(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(observed, predicted, 2)?;
    let n = observed.len() as f64;
    let mean = observed.iter().sum::<f64>() / n;
    let sst: f64 = observed.iter().map(|o| (o - mean) * (o - mean)).sum();
    if sst == 0.0 {
        return Err(Error::ZeroVariance("observed".into()));
    }
    let sse: f64 = observed.iter().zip(predicted).map(|(o, p)| (o - p) * (o - p)).sum();
    Ok(1.0 - sse / sst)
}

/// A fitted model that can score a table with the training schema.
pub trait Regressor: Send + Sync {
    fn predict(&self, t: &Table) -> Result<Vec<f64>>;

    /// Training epochs used, for iterative learners.
    fn epochs(&self) -> Option<usize> {
        None
    }
}

/// Builds a fresh model for each fold. `fold` lets stochastic learners
/// derive an independent seed per fold.
pub trait ModelFactory: Send + Sync {
    fn tag(&self) -> String;
    fn fit(&self, train: &Table, fold: usize) -> Result<Box<dyn Regressor>>;
}

impl Regressor for LinearModel {
    fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        LinearModel::predict(self, t)
    }
}

impl Regressor for Forest {
    fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        Forest::predict(self, t)
    }
}

/// Predicts the training mean.
#[derive(Debug, Clone, Copy, Default)]
pub struct MeanFactory;

struct MeanModel(f64);

impl Regressor for MeanModel {
    fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        Ok(vec![self.0; t.n_rows()])
    }
}

impl ModelFactory for MeanFactory {
    fn tag(&self) -> String {
        "mean".into()
    }

    fn fit(&self, train: &Table, _fold: usize) -> Result<Box<dyn Regressor>> {
        let y = train.response();
        Ok(Box::new(MeanModel(y.iter().sum::<f64>() / y.len() as f64)))
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OlsFactory;

impl ModelFactory for OlsFactory {
    fn tag(&self) -> String {
        ModelKind::Linear.label().into()
    }

    fn fit(&self, train: &Table, _fold: usize) -> Result<Box<dyn Regressor>> {
        Ok(Box::new(fit_ols(train)?))
    }
}

#[derive(Debug, Clone, Default)]
pub struct ForestFactory {
    pub config: ForestConfig,
}

impl ModelFactory for ForestFactory {
    fn tag(&self) -> String {
        ModelKind::Forest.label().into()
    }

    fn fit(&self, train: &Table, fold: usize) -> Result<Box<dyn Regressor>> {
        let cfg = ForestConfig {
            seed: derive_seed(self.config.seed, "evalcv.forest", fold as u64),
            ..self.config.clone()
        };
        Ok(Box::new(fit_forest(train, &cfg)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trainer {
    Backprop,
    Rprop,
}

/// Column means of the training inputs, subtracted before the network sees
/// them. A pure shift: the [0,1] scale of the inputs is kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputShift(pub Vec<f64>);

impl InputShift {
    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows() as f64;
        InputShift((0..x.cols()).map(|j| x.column(j).iter().sum::<f64>() / n).collect())
    }

    pub fn apply(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows() {
            for (v, m) in out.row_mut(i).iter_mut().zip(&self.0) {
                *v -= m;
            }
        }
        out
    }
}

/// A feed-forward network with an input encoder (class column, if any, as K
/// indicators) and an optional input shift.
pub struct NeuralModel {
    pub encoder: FeatureEncoder,
    pub shift: Option<InputShift>,
    pub network: Network,
    pub epochs: usize,
}

impl NeuralModel {
    /// Encoded (and shifted) network inputs for `t`.
    pub fn inputs(&self, t: &Table) -> Result<Matrix> {
        let x = self.encoder.transform(t)?;
        Ok(match &self.shift {
            Some(s) => s.apply(&x),
            None => x,
        })
    }

    /// Encodes the training table, fits the optional shift and returns the
    /// inputs the network trains on.
    pub fn prepare(train: &Table, center_inputs: bool) -> Result<(FeatureEncoder, Option<InputShift>, Matrix)> {
        let encoder = FeatureEncoder::fit(train, ClassCoding::Indicators);
        let x = encoder.transform(train)?;
        if center_inputs {
            let shift = InputShift::fit(&x);
            let xs = shift.apply(&x);
            Ok((encoder, Some(shift), xs))
        } else {
            Ok((encoder, None, x))
        }
    }
}

impl Regressor for NeuralModel {
    fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        self.network.predict_matrix(&self.inputs(t)?)
    }

    fn epochs(&self) -> Option<usize> {
        Some(self.epochs)
    }
}

/// Networks trained per fold. For backprop, `train.learning_rate` is the step
/// on the mean-per-row gradient, so the step applied to the summed gradient
/// is `learning_rate / n_train`. With `center_inputs` each input column is
/// shifted by its training-fold mean.
#[derive(Debug, Clone)]
pub struct NeuralFactory {
    pub trainer: Trainer,
    pub hidden_sizes: Vec<usize>,
    pub activation: Activation,
    pub train: TrainConfig,
    pub center_inputs: bool,
}

impl NeuralFactory {
    pub fn new(trainer: Trainer, hidden_sizes: Vec<usize>, train: TrainConfig) -> Self {
        NeuralFactory {
            trainer,
            hidden_sizes,
            activation: Activation::Sigmoid,
            train,
            center_inputs: true,
        }
    }
}

pub(crate) fn train_network(
    trainer: Trainer,
    net: Network,
    x: &Matrix,
    y: &[f64],
    cfg: &TrainConfig,
) -> Result<crate::neural::Training> {
    match trainer {
        Trainer::Backprop => {
            let cfg = TrainConfig {
                learning_rate: cfg.learning_rate / x.rows() as f64,
                ..*cfg
            };
            train_backprop_xy(net, x, y, &cfg)
        }
        Trainer::Rprop => train_rprop_xy(net, x, y, cfg),
    }
}

impl ModelFactory for NeuralFactory {
    fn tag(&self) -> String {
        let kind = match self.trainer {
            Trainer::Backprop => ModelKind::Backprop,
            Trainer::Rprop => ModelKind::Rprop,
        };
        format!("{} {:?}", kind.label(), self.hidden_sizes)
    }

    fn fit(&self, train: &Table, fold: usize) -> Result<Box<dyn Regressor>> {
        let (encoder, shift, x) = NeuralModel::prepare(train, self.center_inputs)?;
        let y = train.response();
        let topo = Topology::new(x.cols(), self.hidden_sizes.clone())?;
        let seed = derive_seed(self.train.seed, "evalcv.nn.init", fold as u64);
        let net = Network::random(topo, self.activation, self.train.init_scale, seed);
        let out = train_network(self.trainer, net, &x, &y, &self.train)?;
        Ok(Box::new(NeuralModel {
            encoder,
            shift,
            network: out.network,
            epochs: out.epochs,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub n_train: usize,
    pub n_test: usize,
    pub rmse: f64,
    pub r2: f64,
    pub r2_traditional: f64,
    pub epochs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub model_tag: String,
    pub dataset_tag: String,
    pub n_folds: usize,
    pub plan_digest: String,
    pub per_fold: Vec<FoldResult>,
    pub rmse_mean: f64,
    pub r2_mean: f64,
    pub r2_traditional_mean: f64,
    pub selected_hyper: Option<usize>,
    /// Held-out prediction for every row, indexed like the input table.
    pub predictions: Vec<f64>,
}

impl CvReport {
    pub fn with_dataset(mut self, tag: impl Into<String>) -> Self {
        self.dataset_tag = tag.into();
        self
    }

    /// Mean epochs over folds, when the model reports them.
    pub fn mean_epochs(&self) -> Option<f64> {
        let e: Option<Vec<usize>> = self.per_fold.iter().map(|f| f.epochs).collect();
        e.map(|e| e.iter().sum::<usize>() as f64 / e.len() as f64)
    }
}

/// Trains on all rows outside each fold and scores the fold. Folds run in
/// parallel; a failing fold is reported with its index (the lowest one if
/// several fail).
pub fn cross_validate(factory: &dyn ModelFactory, t: &Table, plan: &FoldPlan) -> Result<CvReport> {
    if plan.n_rows() != t.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: t.n_rows(),
            got: plan.n_rows(),
        });
    }
    let y = t.response();
    let folds = par::try_map_indexed(plan.n_folds(), |f| {
        let run = || -> Result<(FoldResult, Vec<usize>, Vec<f64>)> {
            let train_rows = plan.train_rows(f);
            let test_rows = plan.test_rows(f);
            let model = factory.fit(&t.select_rows(&train_rows), f)?;
            let pred = model.predict(&t.select_rows(&test_rows))?;
            let obs: Vec<f64> = test_rows.iter().map(|&r| y[r]).collect();
            let res = FoldResult {
                fold: f,
                n_train: train_rows.len(),
                n_test: test_rows.len(),
                rmse: rmse(&obs, &pred)?,
                r2: r_squared(&obs, &pred)?,
                r2_traditional: r_squared_traditional(&obs, &pred)?,
                epochs: model.epochs(),
            };
            Ok((res, test_rows, pred))
        };
        run().map_err(|e| Error::Fold {
            fold: f,
            source: Box::new(e),
        })
    })?;
    let mut predictions = vec![f64::NAN; t.n_rows()];
    let mut per_fold = Vec::with_capacity(folds.len());
    for (res, rows, pred) in folds {
        for (r, p) in rows.into_iter().zip(pred) {
            predictions[r] = p;
        }
        per_fold.push(res);
    }
    let k = per_fold.len() as f64;
    Ok(CvReport {
        model_tag: factory.tag(),
        dataset_tag: String::new(),
        n_folds: plan.n_folds(),
        plan_digest: plan.digest(),
        rmse_mean: per_fold.iter().map(|f| f.rmse).sum::<f64>() / k,
        r2_mean: per_fold.iter().map(|f| f.r2).sum::<f64>() / k,
        r2_traditional_mean: per_fold.iter().map(|f| f.r2_traditional).sum::<f64>() / k,
        per_fold,
        selected_hyper: None,
        predictions,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub best: CvReport,
    /// One report per candidate size, in the order given.
    pub candidates: Vec<(usize, CvReport)>,
}

/// Cross-validates one single-hidden-layer network per size and keeps the
/// lowest mean RMSE, ties going to fewer neurons.
pub fn sweep_hidden_sizes(
    t: &Table,
    sizes: &[usize],
    trainer: Trainer,
    train: &TrainConfig,
    center_inputs: bool,
    plan: &FoldPlan,
) -> Result<SweepResult> {
    if sizes.is_empty() {
        return Err(Error::InvalidConfig("hidden-size sweep needs at least one size".into()));
    }
    let candidates: Vec<(usize, CvReport)> = par::try_map_indexed(sizes.len(), |i| {
        let factory = NeuralFactory {
            center_inputs,
            ..NeuralFactory::new(trainer, vec![sizes[i]], *train)
        };
        let mut rep = cross_validate(&factory, t, plan)?;
        rep.selected_hyper = Some(sizes[i]);
        Ok((sizes[i], rep))
    })?;
    let best = candidates
        .iter()
        .min_by(|a, b| a.1.rmse_mean.total_cmp(&b.1.rmse_mean).then(a.0.cmp(&b.0)))
        .expect("non-empty")
        .1
        .clone();
    Ok(SweepResult { best, candidates })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    Forest,
    Backprop,
    Rprop,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Linear, Self::Forest, Self::Backprop, Self::Rprop];

    pub fn label(self) -> &'static str {
        match self {
            Self::Linear => "Linear Regression",
            Self::Forest => "Random Forests",
            Self::Backprop => "NN (Backpropagation)",
            Self::Rprop => "NN (Resilient Backpropagation)",
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            Self::Linear => "linreg",
            Self::Forest => "forest",
            Self::Backprop => "backprop",
            Self::Rprop => "rprop",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linreg" | "lm" | "ols" | "linear" => Ok(Self::Linear),
            "forest" | "rf" => Ok(Self::Forest),
            "backprop" | "bp" => Ok(Self::Backprop),
            "rprop" => Ok(Self::Rprop),
            other => Err(Error::InvalidConfig(format!(
                "unknown model '{other}' (expected linreg, forest, backprop or rprop)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareConfig {
    pub n_folds: usize,
    pub models: Vec<ModelKind>,
    pub variants: Vec<DatasetVariant>,
    pub hidden_sizes: Vec<usize>,
    pub forest: ForestConfig,
    pub backprop: TrainConfig,
    pub rprop: TrainConfig,
    pub expand: ExpandConfig,
    /// Shift network inputs by their training-fold means.
    pub center_inputs: bool,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            n_folds: 10,
            models: ModelKind::ALL.to_vec(),
            variants: DatasetVariant::ALL.to_vec(),
            hidden_sizes: (1..=10).collect(),
            forest: ForestConfig {
                n_trees: 100,
                ..Default::default()
            },
            backprop: TrainConfig {
                max_epochs: 200,
                tol: 0.0,
                learning_rate: 0.5,
                ..Default::default()
            },
            rprop: TrainConfig {
                max_epochs: 300,
                tol: 1e-9,
                ..Default::default()
            },
            expand: ExpandConfig::default(),
            center_inputs: true,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model: ModelKind,
    pub dataset: DatasetVariant,
    pub report: Option<CvReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub seed: u64,
    pub n_folds: usize,
    pub plan_digest: String,
    pub rows: Vec<ComparisonRow>,
}

/// Evaluates one model family on one dataset. Networks go through the
/// hidden-size sweep.
pub fn evaluate_model(kind: ModelKind, t: &Table, cfg: &CompareConfig, plan: &FoldPlan, seed: u64) -> Result<CvReport> {
    match kind {
        ModelKind::Linear => cross_validate(&OlsFactory, t, plan),
        ModelKind::Forest => {
            let factory = ForestFactory {
                config: ForestConfig {
                    seed,
                    ..cfg.forest.clone()
                },
            };
            cross_validate(&factory, t, plan)
        }
        ModelKind::Backprop | ModelKind::Rprop => {
            let (trainer, base) = if kind == ModelKind::Backprop {
                (Trainer::Backprop, cfg.backprop)
            } else {
                (Trainer::Rprop, cfg.rprop)
            };
            let train = TrainConfig { seed, ..base };
            let mut best = sweep_hidden_sizes(t, &cfg.hidden_sizes, trainer, &train, cfg.center_inputs, plan)?.best;
            best.model_tag = kind.label().into();
            Ok(best)
        }
    }
}

/// Builds the requested dataset variants from the transformed table and runs
/// every requested model family on each, all with one shared fold plan. A
/// failing cell is recorded and the run continues.
pub fn compare_models(t_transformed: &Table, cfg: &CompareConfig, seed: u64) -> Result<ComparisonTable> {
    let plan = FoldPlan::new(t_transformed.n_rows(), cfg.n_folds, seed)?;
    let mut cells = Vec::new();
    for &v in &cfg.variants {
        let table = make_variant_with(t_transformed, v, seed, &cfg.expand)?;
        for &m in &cfg.models {
            let res = evaluate_model(m, &table, cfg, &plan, seed).map(|r| r.with_dataset(v.tag()));
            cells.push((m, v, res));
        }
    }
    // Table layout: grouped by model family, then dataset.
    let mut rows = Vec::with_capacity(cells.len());
    for &m in &cfg.models {
        for (cm, v, res) in cells.iter().filter(|c| c.0 == m) {
            let (report, error) = match res {
                Ok(r) => (Some(r.clone()), None),
                Err(e) => (None, Some(e.to_string())),
            };
            rows.push(ComparisonRow {
                model: *cm,
                dataset: *v,
                report,
                error,
            });
        }
    }
    Ok(ComparisonTable {
        seed,
        n_folds: cfg.n_folds,
        plan_digest: plan.digest(),
        rows,
    })
}

impl ComparisonTable {
    pub fn row(&self, model: ModelKind, dataset: DatasetVariant) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.model == model && r.dataset == dataset)
    }

    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "model",
            "dataset",
            "rmse",
            "r2",
            "r2_traditional",
            "selected_hidden",
            "n_folds",
            "plan_digest",
            "error",
        ])?;
        for r in &self.rows {
            let (rmse, r2, r2t, hyper) = match &r.report {
                Some(rep) => (
                    rep.rmse_mean.to_string(),
                    rep.r2_mean.to_string(),
                    rep.r2_traditional_mean.to_string(),
                    rep.selected_hyper.map(|h| h.to_string()).unwrap_or_default(),
                ),
                None => Default::default(),
            };
            w.write_record([
                r.model.label().to_string(),
                r.dataset.tag().to_string(),
                rmse,
                r2,
                r2t,
                hyper,
                self.n_folds.to_string(),
                self.plan_digest.clone(),
                r.error.clone().unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<writer>", e))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(std::io::BufWriter::new(f))
    }

    /// Aligned plain-text table, one block per model family.
    pub fn to_text(&self) -> String {
        let width = self.rows.iter().map(|r| r.model.label().len()).max().unwrap_or(5).max(5);
        let mut s = String::new();
        let _ = writeln!(s, "{:<width$}  {:<7}  {:>8}  {:>6}  {:>6}", "Model", "Dataset", "RMSE", "R2", "Hidden");
        let mut last = None;
        for r in &self.rows {
            let name = if last == Some(r.model) { "" } else { r.model.label() };
            last = Some(r.model);
            match &r.report {
                Some(rep) => {
                    let hidden = rep.selected_hyper.map(|h| h.to_string()).unwrap_or_else(|| "-".into());
                    let _ = writeln!(
                        s,
                        "{:<width$}  {:<7}  {:>8.4}  {:>6.3}  {:>6}",
                        name,
                        r.dataset.tag(),
                        rep.rmse_mean,
                        rep.r2_mean,
                        hidden
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{:<width$}  {:<7}  failed: {}",
                        name,
                        r.dataset.tag(),
                        r.error.as_deref().unwrap_or("unknown error")
                    );
                }
            }
        }
        let _ = writeln!(s, "folds: {}  plan: {}  seed: {}", self.n_folds, self.plan_digest, self.seed);
        s
    }
}
