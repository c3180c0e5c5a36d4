//! Synthetic debtor data in the transformed view:
//! two demographic coordinates, three financial factors and four spending
//! cluster scores driven by three latent factors, eight debtor classes, and
//! a [0,1]-scaled unsecured-debt response.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::Table;
use crate::error::{Error, Result};
use crate::rng::substream;

pub const N_CLASSES: usize = 8;

/// Class sizes of the reference sample of 10000 debtors (class 8 is the
/// unclassified group).
pub const REFERENCE_CLASS_SIZES: [f64; N_CLASSES] =
    [2301.0, 1440.0, 1033.0, 948.0, 507.0, 1588.0, 553.0, 1630.0];

/// The nine transformed predictors, in output order.
pub const TRANSFORMED_PREDICTORS: [&str; 9] = [
    "x",
    "y",
    "housingfactor",
    "financialfactor1",
    "financialfactor2",
    "Necessity",
    "Household",
    "Excessive",
    "Leisure",
];

pub const CLASS_COLUMN: &str = "class";
pub const RESPONSE_COLUMN: &str = "udebt";

const SPENDING: usize = 0;
const FINANCIAL: usize = 1;
const HOUSING: usize = 2;

/// (latent factor, loading) for each transformed predictor.
const PREDICTOR_LOADINGS: [(usize, f64); 9] = [
    (FINANCIAL, 0.65),
    (HOUSING, 0.60),
    (HOUSING, 0.85),
    (FINANCIAL, 0.85),
    (FINANCIAL, 0.75),
    (SPENDING, 0.90),
    (SPENDING, 0.80),
    (SPENDING, 0.70),
    (HOUSING, 0.65),
];

/// Latent (spending, financial, housing) means per class.
const CLASS_LATENT_MEANS: [[f64; 3]; N_CLASSES] = [
    [-1.0, -1.0, -0.5], // young, unemployed, low income/debt/spending
    [0.8, 0.0, 0.4],    // average, high clothing/food spending
    [1.0, 1.0, 1.0],    // high income-debt-spending, expensive houses
    [0.0, -0.4, 0.9],   // older, retired, low debt
    [1.0, 1.0, -1.0],   // high income-debt-spending, cheap houses
    [0.0, 0.0, -0.7],   // average, single or separated
    [-1.0, -1.0, 1.0],  // old, retired, low everything
    [0.0, 0.0, 0.0],    // unclassified
];

const LATENT_SHIFT_SCALE: [f64; 3] = [1.0, 0.8, 0.6];

/// Slope shared by all classes, per transformed predictor.
const COMMON_SLOPES: [f64; 9] = [0.15, -0.10, 0.30, 0.50, 0.25, 0.35, 0.20, 0.15, 0.10];

const CLASS_INTERCEPTS: [f64; N_CLASSES] = [-0.6, 0.0, 0.8, -0.4, 0.9, 0.1, -0.7, 0.0];
/// Class-specific slope deviations on financialfactor1 and Necessity.
const CLASS_SLOPE_FIN1: [f64; N_CLASSES] = [-0.3, 0.1, 0.4, -0.2, 0.3, 0.0, -0.3, 0.0];
const CLASS_SLOPE_NEC: [f64; N_CLASSES] = [0.2, 0.3, -0.2, 0.0, 0.1, 0.2, -0.2, 0.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n_rows: usize,
    pub seed: u64,
    pub class_weights: [f64; N_CLASSES],
    pub noise_sd: f64,
    pub nonlinearity_gain: f64,
    /// Multiplies the class-specific intercepts and slopes of the response.
    /// Zero makes the response class-independent given the predictors.
    pub class_effect: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let total: f64 = REFERENCE_CLASS_SIZES.iter().sum();
        GeneratorConfig {
            n_rows: 10_000,
            seed: 7,
            class_weights: REFERENCE_CLASS_SIZES.map(|s| s / total),
            noise_sd: 1.4,
            nonlinearity_gain: 1.0,
            class_effect: 1.0,
        }
    }
}

impl GeneratorConfig {
    pub fn with_rows(n_rows: usize, seed: u64) -> Self {
        GeneratorConfig {
            n_rows,
            seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidConfig("n_rows must be positive".into()));
        }
        if self.class_weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidConfig(
                "class weights must be finite and nonnegative".into(),
            ));
        }
        if self.class_weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidConfig("class weights are all zero".into()));
        }
        for (name, v) in [
            ("noise_sd", self.noise_sd),
            ("nonlinearity_gain", self.nonlinearity_gain),
            ("class_effect", self.class_effect),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }
}

/// Rescales `v` in place onto [0,1]. A constant column maps to 0.
pub(crate) fn min_max_scale(v: &mut [f64]) {
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let span = hi - lo;
    for x in v.iter_mut() {
        *x = if span > 0.0 { ((*x - lo) / span).clamp(0.0, 1.0) } else { 0.0 };
    }
}

fn normals(seed: u64, label: &str, index: u64, n: usize) -> Vec<f64> {
    let mut rng = substream(seed, label, index);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Smooth nonlinear part of the response, on standardized predictors.
fn nonlinear_terms(z: &[f64; 9]) -> f64 {
    let (house, fin1, fin2, nec) = (z[2], z[3], z[4], z[5]);
    0.45 * fin1 * nec + 0.35 * (house * house - 1.0) + 0.5 * (1.5 * fin2).tanh()
}

pub fn generate(config: &GeneratorConfig) -> Result<Table> {
    config.validate()?;
    let n = config.n_rows;
    let seed = config.seed;

    let weights = WeightedIndex::new(config.class_weights)
        .map_err(|e| Error::InvalidConfig(format!("class weights: {e}")))?;
    let mut class_rng = substream(seed, "generate.class", 0);
    let classes: Vec<usize> = (0..n).map(|_| weights.sample(&mut class_rng)).collect();

    let latent: Vec<Vec<f64>> = (0..3)
        .map(|f| {
            let noise = normals(seed, "generate.latent", f as u64, n);
            classes
                .iter()
                .zip(noise)
                .map(|(&k, e)| CLASS_LATENT_MEANS[k][f] * LATENT_SHIFT_SCALE[f] + e)
                .collect()
        })
        .collect();

    let mut columns: Vec<Vec<f64>> = PREDICTOR_LOADINGS
        .iter()
        .enumerate()
        .map(|(j, &(f, loading))| {
            let unique = normals(seed, "generate.unique", j as u64, n);
            let spread = (1.0 - loading * loading).sqrt();
            latent[f]
                .iter()
                .zip(unique)
                .map(|(l, u)| loading * l + spread * u)
                .collect()
        })
        .collect();

    let response_noise = normals(seed, "generate.noise", 0, n);
    let mut response: Vec<f64> = (0..n)
        .map(|i| {
            let k = classes[i];
            let z: [f64; 9] = std::array::from_fn(|j| columns[j][i]);
            let mut slopes = COMMON_SLOPES;
            slopes[3] += config.class_effect * CLASS_SLOPE_FIN1[k];
            slopes[5] += config.class_effect * CLASS_SLOPE_NEC[k];
            let linear = config.class_effect * CLASS_INTERCEPTS[k]
                + slopes.iter().zip(&z).map(|(b, v)| b * v).sum::<f64>();
            linear + config.nonlinearity_gain * nonlinear_terms(&z) + config.noise_sd * response_noise[i]
        })
        .collect();

    for c in columns.iter_mut() {
        min_max_scale(c);
    }
    min_max_scale(&mut response);

    let mut names: Vec<String> = TRANSFORMED_PREDICTORS.iter().map(|s| s.to_string()).collect();
    names.push(CLASS_COLUMN.into());
    names.push(RESPONSE_COLUMN.into());
    let mut data = Vec::with_capacity(n * names.len());
    for i in 0..n {
        data.extend(columns.iter().map(|c| c[i]));
        data.push((classes[i] + 1) as f64);
        data.push(response[i]);
    }
    Table::from_row_major(names, n, data, 10, Some(9))
}
