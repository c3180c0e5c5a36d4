//! Principal-component factor analysis of the predictor correlation matrix:
//! eigenvalues, scree series, Horn's parallel analysis and loadings.

use std::io::Write;
use std::path::Path;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Table;
use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen, Matrix};
use crate::par;
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FactorConfig {
    pub n_sims: usize,
    pub quantile: f64,
    pub drop_threshold: f64,
    pub suppress_threshold: f64,
}

impl Default for FactorConfig {
    fn default() -> Self {
        FactorConfig {
            n_sims: 100,
            quantile: 0.95,
            drop_threshold: 0.4,
            suppress_threshold: 0.1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CorrelationEigen {
    pub variable_names: Vec<String>,
    pub correlation: Matrix,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub eigenvectors: Matrix,
}

/// Pearson correlation matrix of the columns of `x` (n × m, row-major).
fn correlation_of(x: &Matrix, names: &[String]) -> Result<Matrix> {
    let (n, m) = (x.rows(), x.cols());
    let mut z = vec![0.0; n * m];
    for j in 0..m {
        let col = x.column(j);
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        if !(ss > 0.0) {
            return Err(Error::ZeroVariance(names[j].clone()));
        }
        let s = ss.sqrt();
        for i in 0..n {
            z[i * m + j] = (col[i] - mean) / s;
        }
    }
    let mut c = Matrix::identity(m);
    for a in 0..m {
        for b in a + 1..m {
            let r: f64 = (0..n).map(|i| z[i * m + a] * z[i * m + b]).sum();
            let r = r.clamp(-1.0, 1.0);
            c[(a, b)] = r;
            c[(b, a)] = r;
        }
    }
    Ok(c)
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::TooFewRows { needed: 3, got: n });
    }
    if m < 2 {
        return Err(Error::Precondition(format!(
            "factor analysis needs at least 2 predictor columns, got {m}"
        )));
    }
    Ok(())
}

/// Eigendecomposition of the correlation matrix of the table's predictors
/// (response and class columns excluded).
pub fn correlation_eigen(t: &Table) -> Result<CorrelationEigen> {
    let names = t.predictor_names();
    let x = t.predictor_matrix();
    check_shape(x.rows(), x.cols())?;
    let correlation = correlation_of(&x, &names)?;
    let eig = jacobi_eigen(&correlation)?;
    Ok(CorrelationEigen {
        variable_names: names,
        correlation,
        eigenvalues: eig.eigenvalues,
        eigenvectors: eig.eigenvectors,
    })
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelAnalysis {
    pub retained: usize,
    pub observed: Vec<f64>,
    /// Per-index simulated quantile.
    pub thresholds: Vec<f64>,
    pub n_sims: usize,
    pub quantile: f64,
}

/// Eigenvalues of the correlation matrices of `n_sims` independent
/// standard-normal n × m datasets, one vector per simulation.
pub fn simulate_null_eigenvalues(n: usize, m: usize, n_sims: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    check_shape(n, m)?;
    let names: Vec<String> = (0..m).map(|j| format!("sim{j}")).collect();
    par::try_map_indexed(n_sims, |s| {
        let mut rng = substream(seed, "factor.parallel", s as u64);
        let data: Vec<f64> = (0..n * m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let x = Matrix::from_row_major(n, m, data)?;
        Ok(jacobi_eigen(&correlation_of(&x, &names)?)?.eigenvalues)
    })
}

/// Horn's parallel analysis. Factor i is retained while the observed i-th
/// eigenvalue exceeds the `quantile` of the simulated i-th eigenvalues; the
/// count stops at the first index that fails.
pub fn parallel_analysis(t: &Table, n_sims: usize, quantile: f64, seed: u64) -> Result<ParallelAnalysis> {
    let eig = correlation_eigen(t)?;
    parallel_analysis_from(&eig.eigenvalues, t.n_rows(), n_sims, quantile, seed)
}

pub fn parallel_analysis_from(
    observed: &[f64],
    n_rows: usize,
    n_sims: usize,
    quantile: f64,
    seed: u64,
) -> Result<ParallelAnalysis> {
    if n_sims < 20 {
        return Err(Error::InvalidConfig(format!("n_sims must be >= 20, got {n_sims}")));
    }
    if !(0.0..=1.0).contains(&quantile) {
        return Err(Error::InvalidConfig(format!("quantile must be in [0, 1], got {quantile}")));
    }
    let m = observed.len();
    let sims = simulate_null_eigenvalues(n_rows, m, n_sims, seed)?;
    let thresholds: Vec<f64> = (0..m)
        .map(|i| {
            let mut col: Vec<f64> = sims.iter().map(|s| s[i]).collect();
            col.sort_by(f64::total_cmp);
            quantile_sorted(&col, quantile)
        })
        .collect();
    let retained = observed
        .iter()
        .zip(&thresholds)
        .take_while(|(o, q)| o > q)
        .count();
    Ok(ParallelAnalysis {
        retained,
        observed: observed.to_vec(),
        thresholds,
        n_sims,
        quantile,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScreeData {
    /// 1-based index and eigenvalue.
    pub points: Vec<(usize, f64)>,
    /// Index of the last drop λ_i − λ_{i+1} above `drop_threshold`; 0 if none.
    pub suggested: usize,
    pub drop_threshold: f64,
}

pub fn scree_data(eigenvalues: &[f64], drop_threshold: f64) -> ScreeData {
    let suggested = eigenvalues
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] - w[1] > drop_threshold)
        .map(|(i, _)| i + 1)
        .last()
        .unwrap_or(0);
    ScreeData {
        points: eigenvalues.iter().enumerate().map(|(i, &v)| (i + 1, v)).collect(),
        suggested,
        drop_threshold,
    }
}

impl ScreeData {
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["index", "eigenvalue"])?;
        for (i, v) in &self.points {
            w.write_record([i.to_string(), v.to_string()])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorModel {
    pub variable_names: Vec<String>,
    pub eigenvalues: Vec<f64>,
    /// m variables × k factors.
    pub loadings: Matrix,
    pub n_factors: usize,
    pub suppress_threshold: f64,
}

/// Unrotated principal-component loadings: the first `k` eigenvectors scaled
/// by the square roots of their eigenvalues, each column sign-flipped so its
/// largest-magnitude entry is positive.
pub fn extract_loadings(eig: &CorrelationEigen, k: usize, suppress_threshold: f64) -> Result<FactorModel> {
    let m = eig.eigenvalues.len();
    if k == 0 || k > m {
        return Err(Error::InvalidConfig(format!("factor count must be in 1..={m}, got {k}")));
    }
    let mut loadings = Matrix::zeros(m, k);
    for j in 0..k {
        let scale = eig.eigenvalues[j].max(0.0).sqrt();
        let col = eig.eigenvectors.column(j);
        let pivot = col
            .iter()
            .copied()
            .fold(0.0_f64, |best, v| if v.abs() > best.abs() { v } else { best });
        let flip = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..m {
            loadings[(i, j)] = flip * col[i] * scale;
        }
    }
    Ok(FactorModel {
        variable_names: eig.variable_names.clone(),
        eigenvalues: eig.eigenvalues.clone(),
        loadings,
        n_factors: k,
        suppress_threshold,
    })
}

impl FactorModel {
    /// Row sums of squared loadings.
    pub fn communalities(&self) -> Vec<f64> {
        (0..self.loadings.rows())
            .map(|i| self.loadings.row(i).iter().map(|v| v * v).sum())
            .collect()
    }

    /// The loading, or `None` when it falls under the suppress threshold.
    pub fn display_loading(&self, i: usize, j: usize) -> Option<f64> {
        let v = self.loadings[(i, j)];
        (v.abs() >= self.suppress_threshold).then_some(v)
    }

    /// Variable × factor table; suppressed cells are left empty.
    pub fn write_csv_to<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["variable".to_string()];
        header.extend((1..=self.n_factors).map(|j| format!("factor{j}")));
        w.write_record(&header)?;
        for (i, name) in self.variable_names.iter().enumerate() {
            let mut rec = vec![name.clone()];
            rec.extend((0..self.n_factors).map(|j| match self.display_loading(i, j) {
                Some(v) => v.to_string(),
                None => String::new(),
            }));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<writer>", e))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv_to(std::io::BufWriter::new(f))
    }
}
