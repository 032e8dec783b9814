//! Self-contained dense symmetric linear algebra: matrix types, Frobenius
//! inner products, eigendecomposition, Cholesky, thin spectral factorization,
//! Householder QR, and 2x2 solves. Everything is plain `f64` row-major
//! storage sized for verification work (n up to a few thousand).

mod eigen;
mod factor;

pub use eigen::{sym_eig, EigenDecomposition};
pub use factor::{
    cholesky, qr_least_squares, qr_orthonormal_columns, thin_spectral_factor, LowerTriangular,
    ThinFactor,
};

use crate::error::{Result, UgaError};

/// Relative tolerance for the symmetry check on [`SymMatrix`] construction.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(UgaError::InvalidInput("matrix needs at least one row".into()));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(UgaError::InvalidInput("ragged rows".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend_from_slice(r);
        }
        Ok(Mat { rows: rows.len(), cols, data })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{} entries", rows * cols),
                found: format!("{}", data.len()),
            });
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn transpose(&self) -> Mat {
        let mut t = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        if self.cols != other.rows {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{} rows", self.cols),
                found: format!("{}", other.rows),
            });
        }
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(i);
                for j in 0..other.cols {
                    out_row[j] += a * orow[j];
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.cols),
                found: format!("{}", x.len()),
            });
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// A^T x for an m-by-n matrix and an m-vector.
    pub fn transpose_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.rows {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.rows),
                found: format!("{}", x.len()),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += xi * a;
            }
        }
        Ok(out)
    }

    /// Gram matrix A^T A, exploiting symmetry of the result.
    pub fn gram(&self) -> SymMatrix {
        let n = self.cols;
        let mut g = vec![0.0; n * n];
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g[i * n + j] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[i * n + j] = g[j * n + i];
            }
        }
        SymMatrix { n, data: g }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Dense symmetric matrix. Construction validates symmetry within
/// `SYMMETRY_TOL * max(1, max|A|)` and finiteness, then stores the
/// symmetrized average so downstream kernels see exact symmetry.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{} entries", n * n),
                found: format!("{}", data.len()),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(UgaError::NonFinite("symmetric matrix".into()));
        }
        let max_abs = data.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = SYMMETRY_TOL * max_abs.max(1.0);
        let mut max_asym = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if max_asym > tol {
            return Err(UgaError::NotSymmetric { max_asymmetry: max_asym });
        }
        let mut sym = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (sym[i * n + j] + sym[j * n + i]);
                sym[i * n + j] = avg;
                sym[j * n + i] = avg;
            }
        }
        Ok(SymMatrix { n, data: sym })
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Build from an untrusted closure, symmetrizing by averaging.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = f(i, j);
            }
        }
        SymMatrix::new(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets entry (i, j) and its mirror.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn to_mat(&self) -> Mat {
        Mat { rows: self.n, cols: self.n, data: self.data.clone() }
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.n),
                found: format!("{}", x.len()),
            });
        }
        Ok((0..self.n).map(|i| dot(self.row(i), x)).collect())
    }

    /// x^T A x.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += x[i] * dot(self.row(i), x);
        }
        acc
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn add_scaled(&self, other: &SymMatrix, factor: f64) -> Result<SymMatrix> {
        if self.n != other.n {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.n),
                found: format!("{}", other.n),
            });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + factor * b)
            .collect();
        Ok(SymMatrix { n: self.n, data })
    }

    pub fn scale(&self, factor: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| x * factor).collect() }
    }
}

/// Frobenius inner product of two symmetric matrices: sum of entrywise
/// products, equal to the trace of the product.
pub fn frobenius_inner(a: &SymMatrix, b: &SymMatrix) -> Result<f64> {
    if a.n != b.n {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{}x{}", a.n, a.n),
            found: format!("{}x{}", b.n, b.n),
        });
    }
    Ok(dot(&a.data, &b.data))
}

/// Outcome of a 2x2 linear solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Solve2x2 {
    Solution([f64; 2]),
    /// Determinant too small relative to the matrix scale; callers fall
    /// back to a rank-1-only update.
    Degenerate,
}

/// Relative determinant floor for [`solve_2x2`].
pub const SOLVE_2X2_TOL: f64 = 1e-12;

/// Cramer solve of a 2x2 system. Returns `Degenerate` when
/// |det| <= SOLVE_2X2_TOL * ||M||_F^2.
pub fn solve_2x2(m: [[f64; 2]; 2], rhs: [f64; 2]) -> Solve2x2 {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let frob_sq =
        m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
    if det.abs() <= SOLVE_2X2_TOL * frob_sq {
        return Solve2x2::Degenerate;
    }
    let x = (rhs[0] * m[1][1] - m[0][1] * rhs[1]) / det;
    let y = (m[0][0] * rhs[1] - rhs[0] * m[1][0]) / det;
    Solve2x2::Solution([x, y])
}
