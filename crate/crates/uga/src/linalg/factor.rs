//! Factorizations: Cholesky, thin spectral factor (Gram-based thin SVD),
//! and Householder QR.

use super::{sym_eig, Mat, SymMatrix};
use crate::error::{Result, UgaError};

/// Relative pivot floor for the Cholesky factorization.
const CHOLESKY_PIVOT_TOL: f64 = 1e-12;

/// Relative column-norm floor for QR rank detection.
const QR_RANK_TOL: f64 = 1e-13;

/// Lower-triangular factor with positive diagonal.
#[derive(Debug, Clone)]
pub struct LowerTriangular {
    n: usize,
    data: Vec<f64>, // row-major, upper part zero
}

impl LowerTriangular {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn to_mat(&self) -> Mat {
        Mat::from_vec(self.n, self.n, self.data.clone()).expect("consistent size")
    }

    /// Solves L x = b by forward substitution.
    pub fn solve_forward(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.n),
                found: format!("{}", b.len()),
            });
        }
        let mut x = vec![0.0; self.n];
        for i in 0..self.n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.get(i, j) * x[j];
            }
            x[i] = acc / self.get(i, i);
        }
        Ok(x)
    }

    /// Solves L^T x = b by back substitution.
    pub fn solve_transposed(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{}", self.n),
                found: format!("{}", b.len()),
            });
        }
        let mut x = vec![0.0; self.n];
        for i in (0..self.n).rev() {
            let mut acc = b[i];
            for j in (i + 1)..self.n {
                acc -= self.get(j, i) * x[j];
            }
            x[i] = acc / self.get(i, i);
        }
        Ok(x)
    }

    /// Solves (L L^T) x = b.
    pub fn solve_spd(&self, b: &[f64]) -> Result<Vec<f64>> {
        let y = self.solve_forward(b)?;
        self.solve_transposed(&y)
    }
}

/// Cholesky factorization B = L L^T. Fails with `NotPositiveDefinite` when a
/// pivot drops below `CHOLESKY_PIVOT_TOL * max(1, max diagonal)`, which
/// callers treat as the signal to switch to the thin spectral path.
pub fn cholesky(b: &SymMatrix) -> Result<LowerTriangular> {
    let n = b.n();
    let max_diag = (0..n).fold(0.0f64, |m, i| m.max(b.get(i, i).abs()));
    let floor = CHOLESKY_PIVOT_TOL * max_diag.max(1.0);
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut acc = b.get(i, j);
            for k in 0..j {
                acc -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if acc <= floor {
                    return Err(UgaError::NotPositiveDefinite { pivot_index: i, pivot: acc });
                }
                l[i * n + i] = acc.sqrt();
            } else {
                l[i * n + j] = acc / l[j * n + j];
            }
        }
    }
    Ok(LowerTriangular { n, data: l })
}

/// Thin spectral factor of an m-by-n matrix `a`: orthonormal columns `v`
/// (n-by-r) and positive singular values `s` (descending) with
/// a^T a ~= v diag(s^2) v^T. Computed from the eigendecomposition of the
/// Gram matrix; singular values below `max(s) * n * 1e-12` are dropped.
#[derive(Debug, Clone)]
pub struct ThinFactor {
    pub v: Mat,
    pub singular_values: Vec<f64>,
}

impl ThinFactor {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }
}

pub fn thin_spectral_factor(a: &Mat) -> Result<ThinFactor> {
    if !a.is_finite() {
        return Err(UgaError::NonFinite("thin factorization input".into()));
    }
    let n = a.cols();
    let gram = a.gram();
    let eig = sym_eig(&gram)?;
    let sigma_max = eig.values.iter().fold(0.0f64, |m, &l| m.max(l.max(0.0).sqrt()));
    let cutoff = sigma_max * n as f64 * 1e-12;

    // Eigenvalues come back ascending; keep descending sigma order.
    let mut v_cols: Vec<usize> = Vec::new();
    let mut sv = Vec::new();
    for idx in (0..eig.values.len()).rev() {
        let sigma = eig.values[idx].max(0.0).sqrt();
        if sigma > cutoff {
            v_cols.push(idx);
            sv.push(sigma);
        }
    }
    let r = sv.len();
    let mut v = Mat::zeros(n, r);
    for (new_col, &old_col) in v_cols.iter().enumerate() {
        for row in 0..n {
            v[(row, new_col)] = eig.vectors[(row, old_col)];
        }
    }
    Ok(ThinFactor { v, singular_values: sv })
}

/// Householder QR of a tall matrix, kept in compact form.
struct HouseholderQr {
    /// m-by-n; below-diagonal part stores the Householder vectors.
    qr: Mat,
    /// Diagonal of R (sign-adjusted so R has positive diagonal at extraction).
    r_diag: Vec<f64>,
}

fn householder_qr(a: &Mat) -> Result<HouseholderQr> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(UgaError::DimensionMismatch {
            expected: format!("at least {n} rows"),
            found: format!("{m}"),
        });
    }
    if !a.is_finite() {
        return Err(UgaError::NonFinite("qr input".into()));
    }
    let scale = a.frobenius_norm();
    let mut qr = a.clone();
    let mut r_diag = vec![0.0; n];
    for k in 0..n {
        let mut nrm = 0.0f64;
        for i in k..m {
            nrm = nrm.hypot(qr[(i, k)]);
        }
        if nrm <= QR_RANK_TOL * scale.max(1.0) {
            return Err(UgaError::RankDeficient { column: k });
        }
        if qr[(k, k)] < 0.0 {
            nrm = -nrm;
        }
        for i in k..m {
            qr[(i, k)] /= nrm;
        }
        qr[(k, k)] += 1.0;
        for j in (k + 1)..n {
            let mut s = 0.0;
            for i in k..m {
                s += qr[(i, k)] * qr[(i, j)];
            }
            s = -s / qr[(k, k)];
            for i in k..m {
                let add = s * qr[(i, k)];
                qr[(i, j)] += add;
            }
        }
        r_diag[k] = -nrm;
    }
    Ok(HouseholderQr { qr, r_diag })
}

impl HouseholderQr {
    /// Materializes the thin Q (m-by-n, orthonormal columns).
    fn thin_q(&self) -> Mat {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        let mut q = Mat::zeros(m, n);
        for k in (0..n).rev() {
            q[(k, k)] = 1.0;
            for j in k..n {
                if self.qr[(k, k)] != 0.0 {
                    let mut s = 0.0;
                    for i in k..m {
                        s += self.qr[(i, k)] * q[(i, j)];
                    }
                    s = -s / self.qr[(k, k)];
                    for i in k..m {
                        let add = s * self.qr[(i, k)];
                        q[(i, j)] += add;
                    }
                }
            }
        }
        q
    }

    /// Applies Q^T to a copy of `b` and back-substitutes R x = (Q^T b)[..n].
    fn solve_least_squares(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.qr.rows(), self.qr.cols());
        if b.len() != m {
            return Err(UgaError::DimensionMismatch {
                expected: format!("{m}"),
                found: format!("{}", b.len()),
            });
        }
        let mut y = b.to_vec();
        for k in 0..n {
            let mut s = 0.0;
            for i in k..m {
                s += self.qr[(i, k)] * y[i];
            }
            s = -s / self.qr[(k, k)];
            for i in k..m {
                y[i] += s * self.qr[(i, k)];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut acc = y[k];
            for j in (k + 1)..n {
                acc -= self.qr[(k, j)] * x[j];
            }
            x[k] = acc / self.r_diag[k];
        }
        Ok(x)
    }
}

/// Orthonormal columns spanning the column space of `g` (m >= n, full column
/// rank). Columns are sign-fixed so the implied R has positive diagonal.
pub fn qr_orthonormal_columns(g: &Mat) -> Result<Mat> {
    let f = householder_qr(g)?;
    let mut q = f.thin_q();
    for (k, &rd) in f.r_diag.iter().enumerate() {
        if rd < 0.0 {
            for i in 0..q.rows() {
                q[(i, k)] = -q[(i, k)];
            }
        }
    }
    Ok(q)
}

/// Least-squares solve min ||a x - b||_2 through Householder QR.
pub fn qr_least_squares(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    householder_qr(a)?.solve_least_squares(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&SymMatrix::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((l.get(i, j) - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cholesky_hand_example() {
        let b = SymMatrix::new(2, vec![4.0, 2.0, 2.0, 2.0]).unwrap();
        let l = cholesky(&b).unwrap();
        assert!((l.get(0, 0) - 2.0).abs() < 1e-12);
        assert!((l.get(1, 0) - 1.0).abs() < 1e-12);
        assert!((l.get(1, 1) - 1.0).abs() < 1e-12);
        assert_eq!(l.get(0, 1), 0.0);
    }

    #[test]
    fn cholesky_indefinite_rejected() {
        // Eigenvalues -1 and 3.
        let b = SymMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(cholesky(&b), Err(UgaError::NotPositiveDefinite { .. })));
    }

    #[test]
    fn cholesky_solve_roundtrip() {
        let b = SymMatrix::new(2, vec![4.0, 2.0, 2.0, 2.0]).unwrap();
        let l = cholesky(&b).unwrap();
        let x = l.solve_spd(&[10.0, 6.0]).unwrap();
        let back = b.matvec(&x).unwrap();
        assert!((back[0] - 10.0).abs() < 1e-12);
        assert!((back[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn thin_factor_identity() {
        let f = thin_spectral_factor(&Mat::identity(2)).unwrap();
        assert_eq!(f.rank(), 2);
        assert!((f.singular_values[0] - 1.0).abs() < 1e-12);
        assert!((f.singular_values[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thin_factor_rank_one() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = thin_spectral_factor(&a).unwrap();
        assert_eq!(f.rank(), 1);
        assert!((f.singular_values[0] - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((f.v[(0, 0)].abs() - 1.0).abs() < 1e-12);
        assert!(f.v[(1, 0)].abs() < 1e-12);
    }

    #[test]
    fn thin_factor_zero_matrix() {
        let f = thin_spectral_factor(&Mat::zeros(3, 2)).unwrap();
        assert_eq!(f.rank(), 0);
    }

    #[test]
    fn thin_factor_gaussian_full_rank() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut a = Mat::zeros(10, 3);
        for i in 0..10 {
            for j in 0..3 {
                a[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let f = thin_spectral_factor(&a).unwrap();
        assert_eq!(f.rank(), 3);
        // Reconstruction of the Gram matrix.
        let g = a.gram();
        let mut err = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for (k, s) in f.singular_values.iter().enumerate() {
                    acc += s * s * f.v[(i, k)] * f.v[(j, k)];
                }
                err += (acc - g.get(i, j)).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-8 * g.frobenius_norm());
    }

    #[test]
    fn qr_identity() {
        let q = qr_orthonormal_columns(&Mat::identity(3)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((q[(i, j)] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qr_single_column() {
        let g = Mat::from_rows(&[vec![3.0], vec![4.0]]).unwrap();
        let q = qr_orthonormal_columns(&g).unwrap();
        assert!((q[(0, 0)] - 0.6).abs() < 1e-12);
        assert!((q[(1, 0)] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn qr_gaussian_orthonormal() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut g = Mat::zeros(4, 2);
        for i in 0..4 {
            for j in 0..2 {
                g[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let q = qr_orthonormal_columns(&g).unwrap();
        let gram = q.transpose().matmul(&q).unwrap();
        let mut err = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.0 } else { 0.0 };
                err += (gram[(i, j)] - expect).powi(2);
            }
        }
        assert!(err.sqrt() <= 1e-9 * 2.0);
    }

    #[test]
    fn qr_rank_deficient_detected() {
        let g = Mat::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(
            qr_orthonormal_columns(&g),
            Err(UgaError::RankDeficient { .. })
        ));
    }

    #[test]
    fn least_squares_consistent_system() {
        let a = Mat::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![1.0, 1.0]]).unwrap();
        let x_true = [2.0, -1.0];
        let b = a.matvec(&x_true).unwrap();
        let x = qr_least_squares(&a, &b).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-12);
        assert!((x[1] + 1.0).abs() < 1e-12);
    }
}
