//! Ordinary least squares with residual diagnostics.
//!
//! The model is `y = β₀ + Σ βⱼ xⱼ + ε`, solved by Householder QR on the
//! design `[1 | X]`. The class column, if present, enters as K−1 dummies.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Table;
use crate::encode::{ClassCoding, FeatureEncoder};
use crate::error::{Error, Result};
use crate::linalg::{lstsq_householder, Matrix};

/// Optional transform of the response applied before fitting. Predictions
/// are mapped back to the original scale; fitted values and residuals stay
/// on the transformed scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum ResponseTransform {
    #[default]
    Identity,
    /// `ln(y + shift)`
    Log { shift: f64 },
    /// `y^exponent`, exponent > 0, y ≥ 0
    Power { exponent: f64 },
}

impl ResponseTransform {
    fn forward(self, y: f64) -> Result<f64> {
        let v = match self {
            Self::Identity => y,
            Self::Log { shift } => (y + shift).ln(),
            Self::Power { exponent } => {
                if exponent <= 0.0 || y < 0.0 {
                    return Err(Error::InvalidConfig(
                        "power transform needs exponent > 0 and y >= 0".into(),
                    ));
                }
                y.powf(exponent)
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("transformed response of {y}")))
        }
    }

    fn inverse(self, v: f64) -> f64 {
        match self {
            Self::Identity => v,
            Self::Log { shift } => v.exp() - shift,
            Self::Power { exponent } => v.max(0.0).powf(1.0 / exponent),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub predictor_names: Vec<String>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub transform: ResponseTransform,
    encoder: FeatureEncoder,
}

pub fn fit_ols(t: &Table) -> Result<LinearModel> {
    fit_ols_with(t, ResponseTransform::Identity)
}

pub fn fit_ols_with(t: &Table, transform: ResponseTransform) -> Result<LinearModel> {
    let encoder = FeatureEncoder::fit(t, ClassCoding::Dummies);
    let x = encoder.transform(t)?;
    let p = x.cols();
    let n = x.rows();
    if n <= p + 1 {
        return Err(Error::TooFewRows { needed: p + 2, got: n });
    }
    let y: Vec<f64> = t
        .response()
        .into_iter()
        .map(|v| transform.forward(v))
        .collect::<Result<_>>()?;

    let mut design = Matrix::zeros(n, p + 1);
    for i in 0..n {
        let row = design.row_mut(i);
        row[0] = 1.0;
        row[1..].copy_from_slice(x.row(i));
    }
    let names = encoder.feature_names();
    let beta = lstsq_householder(&design, &y).map_err(|j| Error::RankDeficient {
        column: if j == 0 {
            "(intercept)".to_string()
        } else {
            names[j - 1].clone()
        },
    })?;

    let mut model = LinearModel {
        intercept: beta[0],
        coefficients: beta[1..].to_vec(),
        predictor_names: names,
        fitted: Vec::new(),
        residuals: Vec::new(),
        transform,
        encoder,
    };
    model.fitted = (0..n).map(|i| model.linear_predictor(x.row(i))).collect();
    model.residuals = y.iter().zip(&model.fitted).map(|(o, f)| o - f).collect();
    Ok(model)
}

impl LinearModel {
    #[inline]
    fn linear_predictor(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    /// `β₀ + Σ βⱼ xᵢⱼ`, mapped back through the response transform.
    pub fn predict(&self, t: &Table) -> Result<Vec<f64>> {
        let x = self.encoder.transform(t)?;
        Ok((0..x.rows())
            .map(|i| self.transform.inverse(self.linear_predictor(x.row(i))))
            .collect())
    }

    /// Training `1 − SSE/SST` on the model scale.
    pub fn r_squared(&self) -> f64 {
        let n = self.fitted.len() as f64;
        let observed: Vec<f64> = self.fitted.iter().zip(&self.residuals).map(|(f, r)| f + r).collect();
        let mean = observed.iter().sum::<f64>() / n;
        let sst: f64 = observed.iter().map(|v| (v - mean).powi(2)).sum();
        let sse: f64 = self.residuals.iter().map(|r| r * r).sum();
        if sst == 0.0 {
            0.0
        } else {
            1.0 - sse / sst
        }
    }

    pub fn n_params(&self) -> usize {
        self.coefficients.len() + 1
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.predictor_names
            .iter()
            .position(|n| n == name)
            .map(|j| self.coefficients[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// R² of squared residuals on fitted values above which the residual
    /// variance is flagged as non-constant.
    pub hetero_threshold: f64,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            hetero_threshold: 0.05,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticBundle {
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub standardized: Vec<f64>,
    /// (standard-normal quantile at (i − 0.5)/n, sorted standardized residual)
    pub qq: Vec<(f64, f64)>,
    pub breusch_pagan_r2: f64,
    pub heteroscedastic: bool,
}

pub const MIN_QQ_OBSERVATIONS: usize = 10;

pub fn diagnostics(m: &LinearModel) -> Result<DiagnosticBundle> {
    residual_diagnostics(&m.fitted, &m.residuals, m.n_params(), &DiagnosticsConfig::default())
}

pub fn diagnostics_with(m: &LinearModel, cfg: &DiagnosticsConfig) -> Result<DiagnosticBundle> {
    residual_diagnostics(&m.fitted, &m.residuals, m.n_params(), cfg)
}

fn squared_correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa == 0.0 || sbb == 0.0 {
        0.0
    } else {
        (sab * sab / (saa * sbb)).clamp(0.0, 1.0)
    }
}

/// Residual diagnostics from raw (fitted, residual) series.
pub fn residual_diagnostics(
    fitted: &[f64],
    residuals: &[f64],
    n_params: usize,
    cfg: &DiagnosticsConfig,
) -> Result<DiagnosticBundle> {
    let n = residuals.len();
    if fitted.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: fitted.len(),
        });
    }
    if n < MIN_QQ_OBSERVATIONS {
        return Err(Error::TooFewRows {
            needed: MIN_QQ_OBSERVATIONS,
            got: n,
        });
    }
    let dof = if n > n_params { n - n_params } else { n };
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let sigma = (sse / dof as f64).sqrt();
    let standardized: Vec<f64> = residuals
        .iter()
        .map(|r| if sigma > 0.0 { r / sigma } else { 0.0 })
        .collect();

    let normal = Normal::standard();
    let mut sorted = standardized.clone();
    sorted.sort_by(f64::total_cmp);
    let qq = sorted
        .into_iter()
        .enumerate()
        .map(|(i, s)| (normal.inverse_cdf((i as f64 + 0.5) / n as f64), s))
        .collect();

    let squared: Vec<f64> = residuals.iter().map(|r| r * r).collect();
    let breusch_pagan_r2 = squared_correlation(&squared, fitted);
    Ok(DiagnosticBundle {
        fitted: fitted.to_vec(),
        residuals: residuals.to_vec(),
        standardized,
        qq,
        breusch_pagan_r2,
        heteroscedastic: breusch_pagan_r2 > cfg.hetero_threshold,
    })
}

/// Component-plus-residual series `(xᵢⱼ, eᵢ + βⱼ xᵢⱼ)` for one predictor,
/// sorted by x.
pub fn partial_residuals(m: &LinearModel, t: &Table, predictor: &str) -> Result<Vec<(f64, f64)>> {
    let j = m
        .encoder
        .numeric_names()
        .iter()
        .position(|n| n == predictor)
        .ok_or_else(|| Error::UnknownColumn {
            name: predictor.to_string(),
            available: m.encoder.numeric_names().join(", "),
        })?;
    let x = m.encoder.transform(t)?;
    let beta = m.coefficients[j];
    let mut out = Vec::with_capacity(t.n_rows());
    for (i, y) in t.response().into_iter().enumerate() {
        let e = m.transform.forward(y)? - m.linear_predictor(x.row(i));
        let xij = x[(i, j)];
        out.push((xij, e + beta * xij));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(out)
}

fn write_pairs(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::io(path, e))?);
    let go = || -> std::io::Result<()> {
        writeln!(f, "{header}")?;
        for r in rows {
            writeln!(f, "{r}")?;
        }
        f.flush()
    };
    go().map_err(|e| Error::io(path, e))
}

impl DiagnosticBundle {
    pub fn write_residuals_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_pairs(
            path.as_ref(),
            "fitted,residual,standardized",
            (0..self.fitted.len()).map(|i| {
                format!("{},{},{}", self.fitted[i], self.residuals[i], self.standardized[i])
            }),
        )
    }

    pub fn write_qq_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        write_pairs(
            path.as_ref(),
            "theoretical,sample",
            self.qq.iter().map(|(t, s)| format!("{t},{s}")),
        )
    }
}

pub fn write_partial_csv(series: &[(f64, f64)], path: impl AsRef<Path>) -> Result<()> {
    write_pairs(
        path.as_ref(),
        "x,partial_residual",
        series.iter().map(|(x, p)| format!("{x},{p}")),
    )
}
