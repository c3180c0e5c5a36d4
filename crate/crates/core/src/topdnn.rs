//! Networks whose hidden layers are sized from the data: the first hidden
//! layer has one neuron per retained factor, and an optional second layer
//! has one neuron per debtor class. Training is Rprop under the common
//! cross-validation harness.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{Error, Result};
use crate::evalcv::{cross_validate, train_network, CvReport, FoldPlan, ModelFactory, NeuralModel, Regressor, Trainer};
use crate::factor::{
    correlation_eigen, extract_loadings, parallel_analysis_from, scree_data, CorrelationEigen, FactorConfig,
    FactorModel, ParallelAnalysis, ScreeData,
};
use crate::neural::{Activation, Network, Topology, TrainConfig};
use crate::rng::derive_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TopDnnConfig {
    pub factor: FactorConfig,
    pub include_class_layer: bool,
    /// Start the input → first-layer weights at the loading matrix.
    pub loading_init: bool,
    /// Feed class indicators as inputs too (dataset D style).
    pub class_inputs: bool,
    pub n_folds: usize,
    pub train: TrainConfig,
    /// Shift network inputs by their training-fold means.
    pub center_inputs: bool,
}

impl Default for TopDnnConfig {
    fn default() -> Self {
        TopDnnConfig {
            factor: FactorConfig::default(),
            include_class_layer: true,
            loading_init: false,
            class_inputs: false,
            n_folds: 10,
            train: TrainConfig {
                max_epochs: 1000,
                tol: 1e-4,
                ..Default::default()
            },
            center_inputs: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyPlan {
    pub n_factors: usize,
    pub n_classes: usize,
    pub include_class_layer: bool,
    pub loading_init: bool,
}

impl TopologyPlan {
    pub fn validate(&self) -> Result<()> {
        if self.n_factors == 0 {
            return Err(Error::NoFactorStructure);
        }
        if self.include_class_layer && self.n_classes < 2 {
            return Err(Error::Precondition(format!(
                "a class layer needs at least 2 classes, found {}",
                self.n_classes
            )));
        }
        Ok(())
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        if self.include_class_layer {
            vec![self.n_factors, self.n_classes]
        } else {
            vec![self.n_factors]
        }
    }

    pub fn without_class_layer(self) -> Self {
        TopologyPlan {
            include_class_layer: false,
            ..self
        }
    }
}

/// What the factor count was decided from.
#[derive(Debug, Clone, Serialize)]
pub struct FactorEvidence {
    pub parallel: ParallelAnalysis,
    pub scree: ScreeData,
    pub scree_agrees: bool,
}

#[derive(Debug, Clone)]
pub struct PlannedTopology {
    pub plan: TopologyPlan,
    pub evidence: FactorEvidence,
    pub eigen: CorrelationEigen,
}

/// Factor count from parallel analysis (the scree suggestion is reported
/// alongside but never overrides it) and class count from the distinct
/// labels of the class column.
pub fn plan_topology(t: &Table, cfg: &TopDnnConfig, seed: u64) -> Result<PlannedTopology> {
    let n_classes = if cfg.include_class_layer {
        if t.class_col().is_none() {
            return Err(Error::Precondition("a class layer needs a class column".into()));
        }
        t.class_levels().len()
    } else {
        t.class_col().map_or(0, |_| t.class_levels().len())
    };
    let eigen = correlation_eigen(t)?;
    let parallel = parallel_analysis_from(
        &eigen.eigenvalues,
        t.n_rows(),
        cfg.factor.n_sims,
        cfg.factor.quantile,
        derive_seed(seed, "topdnn.parallel", 0),
    )?;
    let scree = scree_data(&eigen.eigenvalues, cfg.factor.drop_threshold);
    let plan = TopologyPlan {
        n_factors: parallel.retained,
        n_classes,
        include_class_layer: cfg.include_class_layer,
        loading_init: cfg.loading_init,
    };
    plan.validate()?;
    Ok(PlannedTopology {
        plan,
        evidence: FactorEvidence {
            scree_agrees: scree.suggested == parallel.retained,
            parallel,
            scree,
        },
        eigen,
    })
}

/// A fully connected network with the planned hidden sizes. With loading
/// initialization the first weight matrix is `fa.loadings · init_scale`;
/// every other parameter is uniform on `[-init_scale, init_scale]`.
pub fn build_network(
    plan: &TopologyPlan,
    input_size: usize,
    fa: Option<&FactorModel>,
    init_scale: f64,
    seed: u64,
) -> Result<Network> {
    plan.validate()?;
    let topo = Topology::new(input_size, plan.hidden_sizes())?;
    let mut net = Network::random(topo, Activation::Sigmoid, init_scale, seed);
    if plan.loading_init {
        let fa = fa.ok_or_else(|| Error::Precondition("loading initialization needs a factor model".into()))?;
        if fa.loadings.rows() != input_size || fa.n_factors != plan.n_factors {
            return Err(Error::DimensionMismatch {
                expected: input_size * plan.n_factors,
                got: fa.loadings.rows() * fa.n_factors,
            });
        }
        for (w, l) in net.weights_mut(0).iter_mut().zip(fa.loadings.as_slice()) {
            *w = l * init_scale;
        }
    }
    Ok(net)
}

/// Cross-validation factory for a planned topology.
#[derive(Debug, Clone)]
pub struct TopDnnFactory {
    pub plan: TopologyPlan,
    pub factor_model: Option<FactorModel>,
    pub train: TrainConfig,
    pub center_inputs: bool,
    pub label: String,
}

impl TopDnnFactory {
    fn fit_model(&self, train: &Table, seed: u64) -> Result<NeuralModel> {
        let (encoder, shift, x) = NeuralModel::prepare(train, self.center_inputs)?;
        let net = build_network(
            &self.plan,
            x.cols(),
            self.factor_model.as_ref(),
            self.train.init_scale,
            seed,
        )?;
        let out = train_network(Trainer::Rprop, net, &x, &train.response(), &self.train)?;
        Ok(NeuralModel {
            encoder,
            shift,
            network: out.network,
            epochs: out.epochs,
        })
    }
}

impl ModelFactory for TopDnnFactory {
    fn tag(&self) -> String {
        self.label.clone()
    }

    fn fit(&self, train: &Table, fold: usize) -> Result<Box<dyn Regressor>> {
        let seed = derive_seed(self.train.seed, "topdnn.init", fold as u64);
        Ok(Box::new(self.fit_model(train, seed)?))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TopDnnVariant {
    pub label: String,
    pub hidden_sizes: Vec<usize>,
    pub report: CvReport,
    /// Trained on every row, for the structure export.
    #[serde(skip)]
    pub network: Network,
    pub input_names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceComparison {
    pub mean_epochs_random: f64,
    pub mean_epochs_loading: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TopDnnReport {
    pub plan: TopologyPlan,
    pub evidence: FactorEvidence,
    pub factor_model: FactorModel,
    pub variants: Vec<TopDnnVariant>,
    pub convergence: Option<ConvergenceComparison>,
}

pub const FACTOR_ONLY_LABEL: &str = "NN with factor analysis";
pub const FACTOR_CLASS_LABEL: &str = "NN with factor analysis and clustering";

/// Plans the topology from `t`, then cross-validates the factor-only network
/// and (when the class layer is enabled) the factor + class network on one
/// shared fold plan. The class column sizes the second layer; it is an input
/// only when `class_inputs` is set.
pub fn run_topdnn(t: &Table, cfg: &TopDnnConfig, seed: u64) -> Result<TopDnnReport> {
    let planned = plan_topology(t, cfg, seed)?;
    let plan = planned.plan;
    let fa = extract_loadings(&planned.eigen, plan.n_factors, cfg.factor.suppress_threshold)?;
    let data = if cfg.class_inputs { t.clone() } else { t.without_class() };
    let folds = FoldPlan::new(data.n_rows(), cfg.n_folds, seed)?;
    let train = TrainConfig { seed, ..cfg.train };

    let mut plans = vec![(FACTOR_ONLY_LABEL, plan.without_class_layer())];
    if plan.include_class_layer {
        plans.push((FACTOR_CLASS_LABEL, plan));
    }
    let fa_for_init = (plan.loading_init && !cfg.class_inputs).then(|| fa.clone());
    if plan.loading_init && cfg.class_inputs {
        return Err(Error::Precondition(
            "loading initialization is only defined when class indicators are not inputs".into(),
        ));
    }

    let mut variants = Vec::new();
    for (label, p) in &plans {
        let factory = TopDnnFactory {
            plan: *p,
            factor_model: fa_for_init.clone(),
            train,
            center_inputs: cfg.center_inputs,
            label: (*label).to_string(),
        };
        let report = cross_validate(&factory, &data, &folds)?.with_dataset(if cfg.class_inputs { "D" } else { "B" });
        let model = factory.fit_model(&data, derive_seed(seed, "topdnn.final", 0))?;
        variants.push(TopDnnVariant {
            label: (*label).to_string(),
            hidden_sizes: p.hidden_sizes(),
            report,
            input_names: model.encoder.feature_names(),
            network: model.network,
        });
    }

    let convergence = if plan.loading_init {
        let random = TopDnnFactory {
            plan: TopologyPlan {
                loading_init: false,
                ..plans[0].1
            },
            factor_model: None,
            train,
            center_inputs: cfg.center_inputs,
            label: "random init".into(),
        };
        let rep = cross_validate(&random, &data, &folds)?;
        Some(ConvergenceComparison {
            mean_epochs_random: rep.mean_epochs().unwrap_or(f64::NAN),
            mean_epochs_loading: variants[0].report.mean_epochs().unwrap_or(f64::NAN),
        })
    } else {
        None
    };

    Ok(TopDnnReport {
        plan,
        evidence: planned.evidence,
        factor_model: fa,
        variants,
        convergence,
    })
}

impl TopDnnReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ev = &self.evidence;
        let _ = writeln!(
            s,
            "factors: {} (parallel analysis, {} simulations, q={}); scree suggests {}{}",
            self.plan.n_factors,
            ev.parallel.n_sims,
            ev.parallel.quantile,
            ev.scree.suggested,
            if ev.scree_agrees { "" } else { " (disagrees; parallel analysis used)" }
        );
        let _ = writeln!(s, "classes: {}", self.plan.n_classes);
        let width = self.variants.iter().map(|v| v.label.len()).max().unwrap_or(5).max(5);
        let _ = writeln!(s, "{:<width$}  {:<10}  {:>8}  {:>6}", "Model", "Hidden", "RMSE", "R2");
        for v in &self.variants {
            let _ = writeln!(
                s,
                "{:<width$}  {:<10}  {:>8.4}  {:>6.3}",
                v.label,
                format!("{:?}", v.hidden_sizes),
                v.report.rmse_mean,
                v.report.r2_mean
            );
        }
        if let Some(c) = &self.convergence {
            let _ = writeln!(
                s,
                "mean epochs to convergence: random init {:.1}, loading init {:.1}",
                c.mean_epochs_random, c.mean_epochs_loading
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub layer: usize,
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    pub magnitude: f64,
}

/// Layer sizes, node labels and every weighted edge, for drawing the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkStructure {
    pub label: String,
    pub layer_sizes: Vec<usize>,
    pub layer_names: Vec<String>,
    pub input_names: Vec<String>,
    pub edges: Vec<Edge>,
    pub biases: Vec<Vec<f64>>,
}

pub fn network_structure(net: &Network, input_names: &[String], label: &str) -> NetworkStructure {
    let sizes = net.topology().layer_sizes();
    let mut layer_names = vec!["input".to_string()];
    for (i, _) in net.topology().hidden_sizes().iter().enumerate() {
        layer_names.push(match i {
            0 => "factors".to_string(),
            1 => "classes".to_string(),
            _ => format!("hidden{}", i + 1),
        });
    }
    layer_names.push("output".into());
    let mut edges = Vec::new();
    for l in 0..net.n_layers() {
        let fan_out = sizes[l + 1];
        for (k, w) in net.weights(l).iter().enumerate() {
            edges.push(Edge {
                layer: l,
                from: k / fan_out,
                to: k % fan_out,
                weight: *w,
                magnitude: w.abs(),
            });
        }
    }
    NetworkStructure {
        label: label.to_string(),
        layer_sizes: sizes,
        layer_names,
        input_names: input_names.to_vec(),
        edges,
        biases: (0..net.n_layers()).map(|l| net.biases(l).to_vec()).collect(),
    }
}
