//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit-shift QL iteration, with eigenvector
//! accumulation. This is the standard EISPACK tred2/tql2 pair.

use super::{Mat, SymMatrix};
use crate::error::{Result, UgaError};

/// Iteration cap per eigenvalue in the QL stage. Exceeding it aborts with
/// diagnostics instead of silently truncating.
const MAX_QL_ITER: usize = 30;

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
/// eigenvectors as the corresponding orthonormal columns of `vectors`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// V diag(values) V^T, for verification.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n();
        let mut out = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for (k, lambda) in self.values.iter().enumerate() {
                    acc += lambda * self.vectors[(i, k)] * self.vectors[(j, k)];
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

/// Computes all eigenvalues and eigenvectors of a symmetric matrix.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenDecomposition> {
    let n = a.n();
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: Mat::zeros(0, 0) });
    }
    let mut v = a.to_mat();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(&mut v, &mut d, &mut e);
    tql2(&mut v, &mut d, &mut e)?;
    sort_ascending(&mut v, &mut d);
    normalize_signs(&mut v);
    Ok(EigenDecomposition { values: d, vectors: v })
}

/// Householder reduction of `v` (initially the input matrix) to tridiagonal
/// form, accumulating the orthogonal transform back into `v`.
fn tred2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for (j, dj) in d.iter_mut().enumerate() {
        *dj = v[(n - 1, j)];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for dk in d.iter().take(i) {
            scale += dk.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
                v[(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[(j, i)] = f;
                g = e[j] + v[(j, j)] * f;
                for k in (j + 1)..i {
                    g += v[(k, j)] * d[k];
                    e[k] += v[(k, j)] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[(k, j)] -= f * e[k] + g * d[k];
                }
                d[j] = v[(i - 1, j)];
                v[(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..n.saturating_sub(1) {
        v[(n - 1, i)] = v[(i, i)];
        v[(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[(k, i + 1)] * v[(k, j)];
                }
                for k in 0..=i {
                    v[(k, j)] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[(n - 1, j)];
        v[(n - 1, j)] = 0.0;
    }
    v[(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal (d, e), accumulating
/// eigenvectors into `v`.
fn tql2(v: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITER {
                    return Err(UgaError::EigenNoConvergence { dim: n, iterations: iter * n });
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0f64;
                let mut s2 = 0.0f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v[(k, i + 1)];
                        v[(k, i + 1)] = s * v[(k, i)] + c * h;
                        v[(k, i)] = c * v[(k, i)] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

fn sort_ascending(v: &mut Mat, d: &mut [f64]) {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].partial_cmp(&d[b]).expect("finite eigenvalues"));
    let old_d = d.to_vec();
    let old_v = v.clone();
    for (new_col, &old_col) in order.iter().enumerate() {
        d[new_col] = old_d[old_col];
        for row in 0..n {
            v[(row, new_col)] = old_v[(row, old_col)];
        }
    }
}

/// Flips each eigenvector so its largest-magnitude component is positive,
/// giving deterministic output across runs.
fn normalize_signs(v: &mut Mat) {
    let n = v.rows();
    for col in 0..n {
        let mut best = 0usize;
        let mut best_abs = -1.0f64;
        for row in 0..n {
            let a = v[(row, col)].abs();
            if a > best_abs {
                best_abs = a;
                best = row;
            }
        }
        if v[(best, col)] < 0.0 {
            for row in 0..n {
                v[(row, col)] = -v[(row, col)];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_inner;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn diagonal_matrix() {
        let a = SymMatrix::new(3, vec![3.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 2.0]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert_close(eig.values[0], 1.0, 1e-12);
        assert_close(eig.values[1], 2.0, 1e-12);
        assert_close(eig.values[2], 3.0, 1e-12);
    }

    #[test]
    fn off_diagonal_2x2() {
        let a = SymMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert_close(eig.values[0], -1.0, 1e-12);
        assert_close(eig.values[1], 1.0, 1e-12);
    }

    #[test]
    fn path_graph_laplacian() {
        // P3 Laplacian; characteristic polynomial factors as l(l-1)(l-3).
        let a = SymMatrix::new(
            3,
            vec![1.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 1.0],
        )
        .unwrap();
        let eig = sym_eig(&a).unwrap();
        assert_close(eig.values[0], 0.0, 1e-12);
        assert_close(eig.values[1], 1.0, 1e-12);
        assert_close(eig.values[2], 3.0, 1e-12);
    }

    #[test]
    fn reconstruction_and_orthonormality() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..25 {
            let n = rng.gen_range(1..=20);
            let mut data = vec![0.0; n * n];
            for i in 0..n {
                for j in i..n {
                    let x: f64 = rng.gen_range(-2.0..2.0);
                    data[i * n + j] = x;
                    data[j * n + i] = x;
                }
            }
            let a = SymMatrix::new(n, data).unwrap();
            let eig = sym_eig(&a).unwrap();
            let rec = eig.reconstruct();
            let mut diff = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    diff += (a.get(i, j) - rec.get(i, j)).powi(2);
                }
            }
            let norm = frobenius_inner(&a, &a).unwrap().sqrt();
            assert!(diff.sqrt() <= 1e-9 * norm.max(1.0), "reconstruction drift");

            // V^T V = I
            let vt = eig.vectors.transpose();
            let gram = vt.matmul(&eig.vectors).unwrap();
            let mut ortho = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    ortho += (gram[(i, j)] - target).powi(2);
                }
            }
            assert!(ortho.sqrt() <= 1e-9 * n as f64);
        }
    }
}
