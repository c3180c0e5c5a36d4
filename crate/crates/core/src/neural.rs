//! Feed-forward regression networks: sigmoid (or tanh) hidden layers, an
//! identity output unit, exact full-batch gradients of ½·SSE, and two
//! trainers, plain gradient descent and resilient backpropagation (Rprop).
//!
//! Parameters live in one flat vector, layer by layer: the fan_in × fan_out
//! weight matrix (row-major) followed by the layer's biases. Gradients use
//! the same layout.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::encode::{ClassCoding, FeatureEncoder};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Activation {
    #[default]
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Self::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Self::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the activation output.
    #[inline]
    fn slope(self, a: f64) -> f64 {
        match self {
            Self::Sigmoid => a * (1.0 - a),
            Self::Tanh => 1.0 - a * a,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    input_size: usize,
    hidden_sizes: Vec<usize>,
    output_size: usize,
}

impl Topology {
    pub fn new(input_size: usize, hidden_sizes: Vec<usize>) -> Result<Self> {
        if input_size == 0 || hidden_sizes.is_empty() || hidden_sizes.contains(&0) {
            return Err(Error::InvalidConfig(format!(
                "topology needs input >= 1 and non-empty hidden sizes >= 1 (got {input_size}, {hidden_sizes:?})"
            )));
        }
        Ok(Topology {
            input_size,
            hidden_sizes,
            output_size: 1,
        })
    }

    pub fn input_size(&self) -> usize {
        self.input_size
    }

    pub fn hidden_sizes(&self) -> &[usize] {
        &self.hidden_sizes
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    /// `[input, hidden..., output]`
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut v = vec![self.input_size];
        v.extend(&self.hidden_sizes);
        v.push(self.output_size);
        v
    }

    pub fn n_params(&self) -> usize {
        self.layer_sizes().windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    topology: Topology,
    params: Vec<f64>,
    /// Offset of each layer's weight block in `params`.
    offsets: Vec<usize>,
    hidden_activation: Activation,
}

fn layer_offsets(sizes: &[usize]) -> Vec<usize> {
    let mut offs = Vec::with_capacity(sizes.len() - 1);
    let mut at = 0;
    for w in sizes.windows(2) {
        offs.push(at);
        at += w[0] * w[1] + w[1];
    }
    offs
}

impl Network {
    pub fn zeros(topology: Topology, hidden_activation: Activation) -> Self {
        let offsets = layer_offsets(&topology.layer_sizes());
        Network {
            params: vec![0.0; topology.n_params()],
            offsets,
            topology,
            hidden_activation,
        }
    }

    /// Weights and biases uniform on `[-init_scale, init_scale]`.
    pub fn random(topology: Topology, hidden_activation: Activation, init_scale: f64, seed: u64) -> Self {
        let mut net = Self::zeros(topology, hidden_activation);
        let mut rng = substream(seed, "neural.init", 0);
        for p in net.params.iter_mut() {
            *p = if init_scale > 0.0 {
                rng.random_range(-init_scale..=init_scale)
            } else {
                0.0
            };
        }
        net
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden_activation
    }

    pub fn n_layers(&self) -> usize {
        self.offsets.len()
    }

    fn layer_dims(&self, l: usize) -> (usize, usize) {
        let sizes = self.topology.layer_sizes();
        (sizes[l], sizes[l + 1])
    }

    /// Weight matrix of layer `l` (fan_in × fan_out, row-major).
    pub fn weights(&self, l: usize) -> &[f64] {
        let (i, o) = self.layer_dims(l);
        &self.params[self.offsets[l]..self.offsets[l] + i * o]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let (i, o) = self.layer_dims(l);
        let at = self.offsets[l];
        &mut self.params[at..at + i * o]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        let (i, o) = self.layer_dims(l);
        let at = self.offsets[l] + i * o;
        &self.params[at..at + o]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let (i, o) = self.layer_dims(l);
        let at = self.offsets[l] + i * o;
        &mut self.params[at..at + o]
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    /// `identity(W_L·σ(…σ(W₁x + b₁)…) + b_L)` for one input vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.topology.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.topology.input_size,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network input".into()));
        }
        let mut a = x.to_vec();
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let (fan_in, fan_out) = self.layer_dims(l);
            let w = self.weights(l);
            let mut z = self.biases(l).to_vec();
            for k in 0..fan_in {
                let ak = a[k];
                for (zj, wkj) in z.iter_mut().zip(&w[k * fan_out..(k + 1) * fan_out]) {
                    *zj += ak * wkj;
                }
            }
            if l < last {
                for v in z.iter_mut() {
                    *v = self.hidden_activation.apply(*v);
                }
            }
            a = z;
        }
        Ok(a[0])
    }

    pub fn predict_matrix(&self, x: &Matrix) -> Result<Vec<f64>> {
        if x.cols() != self.topology.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.topology.input_size,
                got: x.cols(),
            });
        }
        let mut ws = Workspace::new(self, x);
        self.forward_batch(&mut ws);
        Ok(ws.acts.last().expect("output layer").clone())
    }

    /// Batch forward pass. Activations are unit-major: unit j of a layer
    /// occupies `acts[l][j*n..(j+1)*n]`, so the inner loops run over rows.
    fn forward_batch(&self, ws: &mut Workspace) {
        let n = ws.n;
        let last = self.n_layers() - 1;
        for l in 0..self.n_layers() {
            let (fan_in, fan_out) = self.layer_dims(l);
            let w = self.weights(l);
            let b = self.biases(l);
            let (before, after) = ws.acts.split_at_mut(l);
            let input: &[f64] = if l == 0 { &ws.xt } else { &before[l - 1] };
            let out = &mut after[0];
            // Four output units per pass share each input row load; the
            // per-element summation order is the same as one unit at a time.
            for (blk, zs) in out[..fan_out * n].chunks_mut(4 * n).enumerate() {
                let j0 = blk * 4;
                let units = zs.len() / n;
                for (u, z) in zs.chunks_mut(n).enumerate() {
                    z.fill(b[j0 + u]);
                }
                for k in 0..fan_in {
                    let xk = &input[k * n..(k + 1) * n];
                    let wk = &w[k * fan_out + j0..k * fan_out + j0 + units];
                    axpy_block(wk, xk, zs, n);
                }
                if l < last {
                    let act = self.hidden_activation;
                    for v in zs.iter_mut() {
                        *v = act.apply(*v);
                    }
                }
            }
        }
    }

    /// Full-batch SSE and the gradient of ½·SSE written into `grad`.
    fn sse_and_gradient(&self, y: &[f64], ws: &mut Workspace, grad: &mut [f64]) -> f64 {
        let n = ws.n;
        self.forward_batch(ws);
        let n_layers = self.n_layers();
        let mut sse = 0.0;
        {
            let out = &ws.acts[n_layers - 1];
            let delta = &mut ws.deltas[n_layers - 1];
            for i in 0..n {
                let e = out[i] - y[i];
                delta[i] = e;
            }
            sse += dot(delta, delta);
        }
        for l in (0..n_layers).rev() {
            let (fan_in, fan_out) = self.layer_dims(l);
            let off = self.offsets[l];
            let (gw, rest) = grad[off..].split_at_mut(fan_in * fan_out);
            let gb = &mut rest[..fan_out];
            let input: &[f64] = if l == 0 { &ws.xt } else { &ws.acts[l - 1] };
            let delta = &ws.deltas[l];
            for j in 0..fan_out {
                gb[j] = sum(&delta[j * n..(j + 1) * n]);
            }
            for k in 0..fan_in {
                let xk = &input[k * n..(k + 1) * n];
                for (blk, ds) in delta[..fan_out * n].chunks(4 * n).enumerate() {
                    let j0 = blk * 4;
                    dot_block(xk, ds, n, &mut gw[k * fan_out + j0..k * fan_out + j0 + ds.len() / n]);
                }
            }
            if l > 0 {
                let w = self.weights(l);
                let (lower, upper) = ws.deltas.split_at_mut(l);
                let delta_in = &mut lower[l - 1];
                let delta_out = &upper[0];
                let act = &ws.acts[l - 1];
                let slope = self.hidden_activation;
                for (blk, dks) in delta_in[..fan_in * n].chunks_mut(4 * n).enumerate() {
                    let k0 = blk * 4;
                    let units = dks.len() / n;
                    dks.fill(0.0);
                    let mut wj = [0.0; 4];
                    for j in 0..fan_out {
                        for (u, v) in wj[..units].iter_mut().enumerate() {
                            *v = w[(k0 + u) * fan_out + j];
                        }
                        axpy_block(&wj[..units], &delta_out[j * n..(j + 1) * n], dks, n);
                    }
                    for (v, a) in dks.iter_mut().zip(&act[k0 * n..(k0 + units) * n]) {
                        *v *= slope.slope(*a);
                    }
                }
            }
        }
        sse
    }

    /// Exact gradient of ½·Σ(ŷ − y)² over the batch, plus the SSE.
    pub fn gradient_xy(&self, x: &Matrix, y: &[f64]) -> Result<(Vec<f64>, f64)> {
        self.check_data(x, y)?;
        let mut ws = Workspace::new(self, x);
        let mut grad = vec![0.0; self.params.len()];
        let sse = self.sse_and_gradient(y, &mut ws, &mut grad);
        Ok((grad, sse))
    }

    pub fn sse_xy(&self, x: &Matrix, y: &[f64]) -> Result<f64> {
        self.check_data(x, y)?;
        let p = self.predict_matrix(x)?;
        Ok(p.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    fn check_data(&self, x: &Matrix, y: &[f64]) -> Result<()> {
        if x.cols() != self.topology.input_size {
            return Err(Error::DimensionMismatch {
                expected: self.topology.input_size,
                got: x.cols(),
            });
        }
        if y.len() != x.rows() {
            return Err(Error::DimensionMismatch {
                expected: x.rows(),
                got: y.len(),
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&NetworkDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: NetworkDoc = serde_json::from_str(s)?;
        Network::try_from(doc)
    }
}

/// Serialized form: topology plus row-major weight arrays per layer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDoc {
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl From<&Network> for NetworkDoc {
    fn from(net: &Network) -> Self {
        NetworkDoc {
            layer_sizes: net.topology.layer_sizes(),
            hidden_activation: net.hidden_activation,
            weights: (0..net.n_layers()).map(|l| net.weights(l).to_vec()).collect(),
            biases: (0..net.n_layers()).map(|l| net.biases(l).to_vec()).collect(),
        }
    }
}

impl TryFrom<NetworkDoc> for Network {
    type Error = Error;
    fn try_from(doc: NetworkDoc) -> Result<Self> {
        let sizes = &doc.layer_sizes;
        if sizes.len() < 3 || *sizes.last().unwrap() != 1 {
            return Err(Error::InvalidConfig(format!("bad layer sizes {sizes:?}")));
        }
        let topo = Topology::new(sizes[0], sizes[1..sizes.len() - 1].to_vec())?;
        let mut net = Network::zeros(topo, doc.hidden_activation);
        if doc.weights.len() != net.n_layers() || doc.biases.len() != net.n_layers() {
            return Err(Error::DimensionMismatch {
                expected: net.n_layers(),
                got: doc.weights.len().min(doc.biases.len()),
            });
        }
        for l in 0..net.n_layers() {
            let (w, b) = (&doc.weights[l], &doc.biases[l]);
            if w.len() != net.weights(l).len() || b.len() != net.biases(l).len() {
                return Err(Error::DimensionMismatch {
                    expected: net.weights(l).len() + net.biases(l).len(),
                    got: w.len() + b.len(),
                });
            }
            net.weights_mut(l).copy_from_slice(w);
            net.biases_mut(l).copy_from_slice(b);
        }
        if net.params.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("network parameter".into()));
        }
        Ok(net)
    }
}

struct Workspace {
    n: usize,
    /// Inputs transposed to unit-major order.
    xt: Vec<f64>,
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    fn new(net: &Network, x: &Matrix) -> Self {
        let n = x.rows();
        let sizes = net.topology.layer_sizes();
        let acts: Vec<Vec<f64>> = sizes[1..].iter().map(|&s| vec![0.0; n * s]).collect();
        Workspace {
            n,
            xt: x.transpose().as_slice().to_vec(),
            deltas: acts.clone(),
            acts,
        }
    }
}

#[inline]
fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// `ys[u] += a[u]·x` for up to four unit-major rows of length `n`, in one
/// pass over `x`.
#[inline]
fn axpy_block(a: &[f64], x: &[f64], ys: &mut [f64], n: usize) {
    match a.len() {
        4 => {
            let (y0, rest) = ys.split_at_mut(n);
            let (y1, rest) = rest.split_at_mut(n);
            let (y2, y3) = rest.split_at_mut(n);
            let (x, y3) = (&x[..n], &mut y3[..n]);
            for i in 0..n {
                let xi = x[i];
                y0[i] += a[0] * xi;
                y1[i] += a[1] * xi;
                y2[i] += a[2] * xi;
                y3[i] += a[3] * xi;
            }
        }
        _ => {
            for (u, y) in ys.chunks_mut(n).enumerate() {
                axpy(a[u], x, y);
            }
        }
    }
}

/// `out[u] = dot(x, ds[u])` for up to four unit-major rows, with the same
/// lane layout and summation order as [`dot`].
#[inline]
fn dot_block(x: &[f64], ds: &[f64], n: usize, out: &mut [f64]) {
    if out.len() != 4 {
        for (u, d) in ds.chunks(n).enumerate() {
            out[u] = dot(x, d);
        }
        return;
    }
    let rows: [&[f64]; 4] = [&ds[..n], &ds[n..2 * n], &ds[2 * n..3 * n], &ds[3 * n..4 * n]];
    let mut acc = [[0.0; 4]; 4];
    let full = n - n % 4;
    let chunks = x[..full]
        .chunks_exact(4)
        .zip(rows[0][..full].chunks_exact(4))
        .zip(rows[1][..full].chunks_exact(4))
        .zip(rows[2][..full].chunks_exact(4))
        .zip(rows[3][..full].chunks_exact(4));
    for ((((xc, r0), r1), r2), r3) in chunks {
        for l in 0..4 {
            acc[0][l] += xc[l] * r0[l];
            acc[1][l] += xc[l] * r1[l];
            acc[2][l] += xc[l] * r2[l];
            acc[3][l] += xc[l] * r3[l];
        }
    }
    for u in 0..4 {
        let tail: f64 = x[full..].iter().zip(&rows[u][full..]).map(|(a, b)| a * b).sum();
        out[u] = (acc[u][0] + acc[u][1]) + (acc[u][2] + acc[u][3]) + tail;
    }
}

/// Dot product with four interleaved partial sums, so it vectorizes while
/// the summation order stays fixed.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..4 {
            acc[l] += x[l] * y[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn sum(a: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let c = a.chunks_exact(4);
    let tail: f64 = c.remainder().iter().sum();
    for x in c {
        for l in 0..4 {
            acc[l] += x[l];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Encodes a table for network use: numeric predictors plus K class
/// indicators when a class column is present.
pub fn encode_table(t: &Table) -> Result<(FeatureEncoder, Matrix, Vec<f64>)> {
    let enc = FeatureEncoder::fit(t, ClassCoding::Indicators);
    let x = enc.transform(t)?;
    Ok((enc, x, t.response()))
}

/// Gradient of ½·SSE of `net` on table `t`, plus the SSE.
pub fn gradient(net: &Network, t: &Table) -> Result<(Vec<f64>, f64)> {
    let (_, x, y) = encode_table(t)?;
    net.gradient_xy(&x, &y)
}

/// Canonical Rprop constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RpropParams {
    pub delta0: f64,
    pub eta_plus: f64,
    pub eta_minus: f64,
    pub delta_max: f64,
    pub delta_min: f64,
}

impl Default for RpropParams {
    fn default() -> Self {
        RpropParams {
            delta0: 0.1,
            eta_plus: 1.2,
            eta_minus: 0.5,
            delta_max: 50.0,
            delta_min: 1e-6,
        }
    }
}

/// Per-parameter step sizes and the sign of the previous gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct RpropState {
    pub step_sizes: Vec<f64>,
    pub prev_signs: Vec<i8>,
    pub params: RpropParams,
}

#[inline]
fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

impl RpropState {
    pub fn new(n: usize, params: RpropParams) -> Self {
        RpropState {
            step_sizes: vec![params.delta0; n],
            prev_signs: vec![0; n],
            params,
        }
    }

    /// One Rprop update without weight backtracking: grow the step while the
    /// gradient keeps its sign, shrink it and skip the update on a flip.
    pub fn step(&mut self, weights: &mut [f64], grad: &[f64]) {
        let p = self.params;
        for i in 0..weights.len() {
            let s = sign(grad[i]);
            let agreement = s * self.prev_signs[i];
            if agreement > 0 {
                self.step_sizes[i] = (self.step_sizes[i] * p.eta_plus).min(p.delta_max);
                weights[i] -= f64::from(s) * self.step_sizes[i];
                self.prev_signs[i] = s;
            } else if agreement < 0 {
                self.step_sizes[i] = (self.step_sizes[i] * p.eta_minus).max(p.delta_min);
                self.prev_signs[i] = 0;
            } else {
                weights[i] -= f64::from(s) * self.step_sizes[i];
                self.prev_signs[i] = s;
            }
        }
    }

    pub fn step_range(&self) -> (f64, f64) {
        self.step_sizes
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    /// Stop once an epoch lowers the SSE by a positive amount below `tol`.
    /// An epoch that leaves the SSE unchanged or raises it never stops
    /// training (Rprop can skip every update after a sign flip).
    pub tol: f64,
    /// Gradient-descent step on the ½·SSE gradient (backprop only).
    pub learning_rate: f64,
    pub seed: u64,
    pub init_scale: f64,
    pub rprop: RpropParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 1000,
            tol: 1e-8,
            learning_rate: 0.01,
            seed: 7,
            init_scale: 0.5,
            rprop: RpropParams::default(),
        }
    }
}

impl TrainConfig {
    fn validate(&self, backprop: bool) -> Result<()> {
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be >= 1".into()));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(Error::InvalidConfig("tol must be finite and >= 0".into()));
        }
        if backprop && !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return Err(Error::InvalidConfig("learning_rate must be finite and >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    MaxEpochs,
    Converged,
}

#[derive(Debug, Clone)]
pub struct Training {
    pub network: Network,
    /// SSE before each epoch's update, then the SSE of the returned network.
    pub loss_trace: Vec<f64>,
    pub epochs: usize,
    pub stop: StopReason,
    /// Rprop only: (min Δ, max Δ) after each epoch.
    pub step_size_range: Vec<(f64, f64)>,
}

enum Rule<'a> {
    Gradient(f64),
    Rprop(&'a mut RpropState),
}

fn run(mut net: Network, x: &Matrix, y: &[f64], cfg: &TrainConfig, mut rule: Rule<'_>) -> Result<Training> {
    net.check_data(x, y)?;
    let mut ws = Workspace::new(&net, x);
    let mut grad = vec![0.0; net.params.len()];
    let mut trace = Vec::with_capacity(cfg.max_epochs + 1);
    let mut ranges = Vec::new();
    let mut stop = StopReason::MaxEpochs;
    let mut epochs = 0;
    for epoch in 0..cfg.max_epochs {
        let sse = net.sse_and_gradient(y, &mut ws, &mut grad);
        if !sse.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Diverged { epoch });
        }
        if let Some(&prev) = trace.last() {
            let improvement: f64 = prev - sse;
            if improvement > 0.0 && improvement < cfg.tol {
                trace.push(sse);
                stop = StopReason::Converged;
                return Ok(Training {
                    network: net,
                    loss_trace: trace,
                    epochs,
                    stop,
                    step_size_range: ranges,
                });
            }
        }
        trace.push(sse);
        match &mut rule {
            Rule::Gradient(lr) => {
                for (p, g) in net.params.iter_mut().zip(&grad) {
                    *p -= *lr * g;
                }
            }
            Rule::Rprop(state) => {
                state.step(&mut net.params, &grad);
                ranges.push(state.step_range());
            }
        }
        epochs = epoch + 1;
    }
    let final_sse = net.sse_and_gradient(y, &mut ws, &mut grad);
    if !final_sse.is_finite() {
        return Err(Error::Diverged { epoch: epochs });
    }
    trace.push(final_sse);
    Ok(Training {
        network: net,
        loss_trace: trace,
        epochs,
        stop,
        step_size_range: ranges,
    })
}

/// Full-batch gradient descent `w ← w − lr·∇(½·SSE)`.
pub fn train_backprop_xy(net: Network, x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<Training> {
    cfg.validate(true)?;
    run(net, x, y, cfg, Rule::Gradient(cfg.learning_rate))
}

/// Full-batch resilient backpropagation.
pub fn train_rprop_xy(net: Network, x: &Matrix, y: &[f64], cfg: &TrainConfig) -> Result<Training> {
    cfg.validate(false)?;
    let mut state = RpropState::new(net.params.len(), cfg.rprop);
    run(net, x, y, cfg, Rule::Rprop(&mut state))
}

pub fn train_backprop(net: Network, t: &Table, cfg: &TrainConfig) -> Result<Training> {
    let (_, x, y) = encode_table(t)?;
    train_backprop_xy(net, &x, &y, cfg)
}

pub fn train_rprop(net: Network, t: &Table, cfg: &TrainConfig) -> Result<Training> {
    let (_, x, y) = encode_table(t)?;
    train_rprop_xy(net, &x, &y, cfg)
}
