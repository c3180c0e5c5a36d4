//! Small dense linear algebra: a row-major matrix, Householder QR least
//! squares and a cyclic Jacobi eigensolver for symmetric matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                for (o, &b) in out.row_mut(i).iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Selects the given columns in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(self.rows * cols.len());
        for i in 0..self.rows {
            let r = self.row(i);
            data.extend(cols.iter().map(|&j| r[j]));
        }
        Matrix {
            rows: self.rows,
            cols: cols.len(),
            data,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: rows.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Relative threshold on |R_jj| below which a column counts as dependent.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Least-squares solution of `a x ≈ b` by Householder QR without pivoting.
///
/// A column whose R diagonal falls below `RANK_TOLERANCE · max|R_ii|` is
/// reported by index as `Err(j)`.
pub fn lstsq_householder(a: &Matrix, b: &[f64]) -> std::result::Result<Vec<f64>, usize> {
    let (n, p) = (a.rows(), a.cols());
    assert_eq!(b.len(), n, "right-hand side length");
    assert!(n >= p, "least squares needs at least as many rows as columns");
    // column-major working copy so reflections touch contiguous memory
    let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
    let mut rhs = b.to_vec();
    let mut diag = vec![0.0; p];

    for k in 0..p {
        let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            diag[k] = 0.0;
            continue;
        }
        let alpha = if cols[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let apply = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(&v) {
                *c -= s * vi;
            }
        };
        for col in cols.iter_mut().skip(k + 1) {
            apply(&mut col[k..]);
        }
        apply(&mut rhs[k..]);
        cols[k][k] = alpha;
        for x in cols[k][k + 1..].iter_mut() {
            *x = 0.0;
        }
    }

    let max_diag = diag.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if let Some(j) = (0..p).find(|&j| diag[j].abs() <= RANK_TOLERANCE * max_diag || max_diag == 0.0) {
        return Err(j);
    }

    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut s = rhs[i];
        for j in i + 1..p {
            s -= cols[j][i] * x[j];
        }
        x[i] = s / cols[i][i];
    }
    Ok(x)
}

/// Eigendecomposition of a symmetric matrix, eigenvalues descending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub eigenvalues: Vec<f64>,
    /// Eigenvectors stored as columns, in the order of `eigenvalues`.
    pub eigenvectors: Matrix,
    pub sweeps: usize,
}

pub const JACOBI_TOLERANCE: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops
/// below [`JACOBI_TOLERANCE`].
pub fn jacobi_eigen(sym: &Matrix) -> Result<SymmetricEigen> {
    let n = sym.rows();
    if n != sym.cols() {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: sym.cols(),
        });
    }
    if sym.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entry".into()));
    }
    let mut a = sym.clone();
    let mut v = Matrix::identity(n);
    let mut sweeps = 0;

    while off_diagonal_norm(&a) >= JACOBI_TOLERANCE && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = v.select_columns(&order);
    Ok(SymmetricEigen {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lstsq_exact_line() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let x = lstsq_householder(&a, &[1.0, 3.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lstsq_flags_dependent_column() {
        let a = Matrix::from_rows(&[
            vec![1.0, 0.3, 0.6],
            vec![1.0, 1.1, 2.2],
            vec![1.0, 2.5, 5.0],
            vec![1.0, 0.7, 1.4],
        ])
        .unwrap();
        assert_eq!(lstsq_householder(&a, &[1.0, 2.0, 3.0, 4.0]), Err(2));
    }

    #[test]
    fn jacobi_two_by_two() {
        let a = Matrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let e = jacobi_eigen(&a).unwrap();
        assert!((e.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-12);
        let v0 = e.eigenvectors.column(0);
        assert!((v0[0].abs() - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn jacobi_residual_is_tiny() {
        let a = Matrix::from_rows(&[
            vec![4.0, 1.0, -2.0, 2.0],
            vec![1.0, 2.0, 0.0, 1.0],
            vec![-2.0, 0.0, 3.0, -2.0],
            vec![2.0, 1.0, -2.0, -1.0],
        ])
        .unwrap();
        let e = jacobi_eigen(&a).unwrap();
        let av = a.matmul(&e.eigenvectors).unwrap();
        for j in 0..4 {
            for i in 0..4 {
                let r = av[(i, j)] - e.eigenvectors[(i, j)] * e.eigenvalues[j];
                assert!(r.abs() < 1e-10, "residual {r}");
            }
        }
        assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
    }
}
