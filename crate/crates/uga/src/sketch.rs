//! Least-squares sketching through subset selection: pick a small weighted
//! row subset whose Gram matrix spectrally approximates A^T A, then solve
//! either the sketched system directly or the mixed system
//! (A~^T A~) z = A^T b, which keeps the right-hand side exact.

use crate::certify::{certify_identity_targets, Certificate};
use crate::error::{Result, UgaError};
use crate::linalg::{cholesky, norm2, qr_least_squares, sym_eig, Mat, SymMatrix};
use crate::subset::{reduce_general_b, run};

/// Weighted row subset standing in for (A, b).
#[derive(Debug, Clone)]
pub struct Sketch {
    /// Selected row ids of the original matrix.
    pub indices: Vec<usize>,
    /// Positive scale weights per selected row.
    pub d: Vec<f64>,
    /// Rows sqrt(d_k) * a_{j_k}.
    pub a_tilde: Mat,
    /// Selected entries of b (unscaled).
    pub b_tilde: Vec<f64>,
    /// Spectral certificate of (1-eps) B <= A~^T A~ <= (1+eps) B.
    pub certificate: Certificate,
}

impl Sketch {
    pub fn rows(&self) -> usize {
        self.indices.len()
    }

    pub fn certified(&self) -> bool {
        self.certificate.passed
    }
}

/// Builds the row sketch of (a, b) at accuracy eps: reduces B = A^T A to an
/// isotropic problem, runs the greedy selection, and certifies the linear
/// sandwich on the reduced set. A failed certificate is reported in the
/// sketch, not an error; downstream error bounds remain evaluable.
pub fn build_sketch(a: &Mat, b: &[f64], eps: f64) -> Result<Sketch> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(UgaError::InvalidInput(format!("need m >= n, got m={m}, n={n}")));
    }
    if b.len() != m {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{m}"),
            found: format!("{}", b.len()),
        });
    }
    let reduction = reduce_general_b(a)?;
    let result = run(&reduction.set, eps)?;

    let mut a_tilde = Mat::zeros(result.lambda.len(), n);
    let mut b_tilde = Vec::with_capacity(result.lambda.len());
    for (row, (&j, &dj)) in result.lambda.iter().zip(&result.coefficients).enumerate() {
        let scale = dj.sqrt();
        for (col, &v) in a.row(j).iter().enumerate() {
            a_tilde[(row, col)] = scale * v;
        }
        b_tilde.push(b[j]);
    }

    let approx = result.approximation_dense(reduction.set.vectors());
    let certificate = certify_identity_targets(&approx, 1.0 - eps, 1.0 + eps)?;
    Ok(Sketch {
        indices: result.lambda,
        d: result.coefficients,
        a_tilde,
        b_tilde,
        certificate,
    })
}

/// Sketched least squares: y minimizing ||A~ y - b~||_2 via QR.
pub fn solve_sketch_ls(sk: &Sketch) -> Result<Vec<f64>> {
    qr_least_squares(&sk.a_tilde, &sk.b_tilde)
}

/// Mixed solve: z with (A~^T A~) z = A^T b, keeping the exact right-hand
/// side so only the matrix is perturbed.
pub fn solve_new(sk: &Sketch, a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    let gram = sk.a_tilde.gram();
    let factor = cholesky(&gram)?;
    let atb = a.transpose_matvec(b)?;
    factor.solve_spd(&atb)
}

/// Reference solution of the full system by orthogonal factorization.
pub fn full_least_squares(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    qr_least_squares(a, b)
}

/// Perturbation bound on the relative solution error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Value(f64),
    /// The hypothesis 1 - kappa(B) ||dB||/||B|| > 0 fails; no bound holds.
    Inapplicable,
}

/// Evaluates the conditioning bound
/// kappa/(1 - kappa d_B) * (d_B + d_c) with d_B = ||B - G~||_2 / ||B||_2 and
/// d_c = ||A^T b - A~^T b~||_2 / ||A^T b||_2, where G~ is the sketch Gram
/// matrix. Returns `Inapplicable` when the hypothesis gate fails.
pub fn error_bound(
    b_mat: &SymMatrix,
    sketch_gram: &SymMatrix,
    atb: &[f64],
    atb_tilde: &[f64],
) -> Result<Bound> {
    if b_mat.n() != sketch_gram.n() || atb.len() != b_mat.n() || atb_tilde.len() != b_mat.n() {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{}", b_mat.n()),
            found: format!(
                "gram {}, atb {}, atb_tilde {}",
                sketch_gram.n(),
                atb.len(),
                atb_tilde.len()
            ),
        });
    }
    let eig_b = sym_eig(b_mat)?;
    let lambda_min = eig_b.min_eigenvalue();
    let lambda_max = eig_b.max_eigenvalue();
    if lambda_min <= 0.0 {
        return Ok(Bound::Inapplicable);
    }
    let kappa = lambda_max / lambda_min;

    let n = b_mat.n();
    let diff = SymMatrix::from_fn(n, |i, j| b_mat.get(i, j) - sketch_gram.get(i, j))?;
    let eig_d = sym_eig(&diff)?;
    let delta_spec = eig_d.values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let delta_b = delta_spec / lambda_max;

    let gate = 1.0 - kappa * delta_b;
    if gate <= 0.0 {
        return Ok(Bound::Inapplicable);
    }

    let atb_norm = norm2(atb);
    if atb_norm == 0.0 {
        return Ok(Bound::Inapplicable);
    }
    let delta_c = atb
        .iter()
        .zip(atb_tilde)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
        / atb_norm;

    Ok(Bound::Value(kappa / gate * (delta_b + delta_c)))
}

/// ||x - x_ref||_2 / ||x_ref||_2.
pub fn relative_error(x_ref: &[f64], x: &[f64]) -> Result<f64> {
    if x_ref.len() != x.len() {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{}", x_ref.len()),
            found: format!("{}", x.len()),
        });
    }
    let ref_norm = norm2(x_ref);
    if ref_norm == 0.0 {
        return Err(UgaError::InvalidInput("zero reference vector".into()));
    }
    let diff = x_ref
        .iter()
        .zip(x)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok(diff / ref_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gen_lsq_instance, Seed};

    #[test]
    fn stacked_identity_sketch() {
        // A = [I_3; I_3]: the sketch keeps one copy of each direction with
        // the duplicate weight folded in, so A~^T A~ = B exactly.
        let n = 3;
        let mut a = Mat::zeros(2 * n, n);
        for i in 0..n {
            a[(i, i)] = 1.0;
            a[(n + i, i)] = 1.0;
        }
        let b = vec![1.0; 2 * n];
        let sk = build_sketch(&a, &b, 0.3).unwrap();
        assert_eq!(sk.rows(), n);
        assert!(sk.certified());
        let gram = sk.a_tilde.gram();
        let b_mat = a.gram();
        for i in 0..n {
            for j in 0..n {
                assert!((gram.get(i, j) - b_mat.get(i, j)).abs() < 1e-10);
            }
        }
        for &d in &sk.d {
            assert!((d - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn square_instance_recovered_exactly() {
        // m = n: the reduced vectors are an orthonormal basis, so the
        // selection recovers the whole Gram matrix.
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        use rand_distr::StandardNormal;
        let n = 8;
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut a = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] = rng.sample(StandardNormal);
            }
        }
        let b: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let sk = build_sketch(&a, &b, 0.5).unwrap();
        let gram = sk.a_tilde.gram();
        let b_mat = a.gram();
        let mut diff = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                diff += (gram.get(i, j) - b_mat.get(i, j)).powi(2);
                scale += b_mat.get(i, j).powi(2);
            }
        }
        assert!(diff.sqrt() <= 1e-9 * scale.sqrt());
    }

    #[test]
    fn sketch_sparsity_respects_budget() {
        let (a, b) = gen_lsq_instance(200, 10, 0.1, Seed(8)).unwrap();
        let eps = 0.5;
        let sk = build_sketch(&a, &b, eps).unwrap();
        assert!(sk.rows() <= crate::iteration_budget(10, eps));
        assert!(sk.d.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn sketch_solve_consistent_system() {
        let (a, _) = gen_lsq_instance(50, 6, 0.0, Seed(3)).unwrap();
        let sk = build_sketch(&a, &vec![0.0; 50], 0.4).unwrap();
        let y_true: Vec<f64> = (0..6).map(|i| i as f64 - 2.5).collect();
        let b_tilde = sk.a_tilde.matvec(&y_true).unwrap();
        let mut sk2 = sk.clone();
        sk2.b_tilde = b_tilde;
        let y = solve_sketch_ls(&sk2).unwrap();
        for (yi, ti) in y.iter().zip(&y_true) {
            assert!((yi - ti).abs() < 1e-10);
        }
    }

    #[test]
    fn sketch_solve_residual_orthogonality() {
        let (a, b) = gen_lsq_instance(80, 7, 0.1, Seed(21)).unwrap();
        let sk = build_sketch(&a, &b, 0.4).unwrap();
        let y = solve_sketch_ls(&sk).unwrap();
        let fitted = sk.a_tilde.matvec(&y).unwrap();
        let resid: Vec<f64> = fitted.iter().zip(&sk.b_tilde).map(|(f, b)| f - b).collect();
        let at_r = sk.a_tilde.transpose_matvec(&resid).unwrap();
        let bound = 1e-8 * sk.a_tilde.frobenius_norm() * norm2(&sk.b_tilde);
        assert!(norm2(&at_r) <= bound.max(1e-12));
    }

    #[test]
    fn solve_new_with_full_rows_is_exact() {
        let (a, b) = gen_lsq_instance(30, 5, 0.1, Seed(13)).unwrap();
        // Sketch containing all rows with unit weights reproduces B.
        let sk = Sketch {
            indices: (0..30).collect(),
            d: vec![1.0; 30],
            a_tilde: a.clone(),
            b_tilde: b.clone(),
            certificate: certify_identity_targets(&SymMatrix::identity(5), 0.5, 1.5).unwrap(),
        };
        let z = solve_new(&sk, &a, &b).unwrap();
        let x_opt = full_least_squares(&a, &b).unwrap();
        assert!(relative_error(&x_opt, &z).unwrap() <= 1e-9);
    }

    #[test]
    fn error_bound_zero_perturbation() {
        let b_mat = SymMatrix::identity(3);
        let atb = vec![1.0, 2.0, 3.0];
        let bound = error_bound(&b_mat, &b_mat, &atb, &atb).unwrap();
        assert_eq!(bound, Bound::Value(0.0));
    }

    #[test]
    fn error_bound_scaled_identity() {
        let delta = 0.25;
        let b_mat = SymMatrix::identity(4);
        let gram = b_mat.scale(1.0 - delta);
        let atb = vec![1.0, 0.0, 0.0, 0.0];
        match error_bound(&b_mat, &gram, &atb, &atb).unwrap() {
            Bound::Value(v) => assert!((v - delta / (1.0 - delta)).abs() < 1e-12),
            Bound::Inapplicable => panic!("hypothesis holds"),
        }
    }

    #[test]
    fn error_bound_hypothesis_gate() {
        let b_mat = SymMatrix::identity(2);
        let gram = b_mat.scale(-0.5); // ||dB|| = 1.5 > 1 = 1/kappa
        let atb = vec![1.0, 1.0];
        assert_eq!(error_bound(&b_mat, &gram, &atb, &atb).unwrap(), Bound::Inapplicable);
    }

    #[test]
    fn relative_error_cases() {
        assert_eq!(relative_error(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(relative_error(&[1.0, 0.0], &[2.0, 0.0]).unwrap(), 1.0);
        assert!((relative_error(&[3.0, 4.0], &[3.0, 0.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(relative_error(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    }
}
