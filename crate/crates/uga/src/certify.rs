//! Eigenvalue certification of sparsifier outputs.
//!
//! A run succeeds when the output satisfies the two-sided spectral sandwich
//! (1-eps)^2 A <= L <= (1+eps)^2 A against its target (the identity for
//! subset selection, L_G for graph sparsification). For graphs the check is
//! performed on the range of L_G after verifying that the sparsifier
//! annihilates the target's nullspace.

use crate::error::{Result, UgaError};
use crate::graph::{edge_atom_inner, EdgeAtom, WeightedGraph};
use crate::linalg::{sym_eig, Mat, SymMatrix};

/// Absolute slack applied to the certification thresholds.
pub const CERT_SLACK: f64 = 1e-9;

/// Brute-force atom Gram checks refuse above this many vertices.
pub const GRAMMIAN_VERTEX_CAP: usize = 60;

/// Verdict of a spectral sandwich check.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub passed: bool,
    /// Smallest relevant (range-restricted) relative eigenvalue.
    pub lo: f64,
    /// Largest relevant relative eigenvalue.
    pub hi: f64,
    pub target_lo: f64,
    pub target_hi: f64,
    pub nullspace_dim_g: usize,
    pub nullspace_dim_h: usize,
    /// Whether the candidate annihilates the target nullspace.
    pub nullspace_contained: bool,
    /// hi / lo when lo is positive.
    pub kappa: Option<f64>,
}

impl Certificate {
    fn from_extremes(
        lo: f64,
        hi: f64,
        target_lo: f64,
        target_hi: f64,
        nullspace_dim_g: usize,
        nullspace_dim_h: usize,
        nullspace_contained: bool,
    ) -> Self {
        let passed =
            nullspace_contained && lo >= target_lo - CERT_SLACK && hi <= target_hi + CERT_SLACK;
        let kappa = (lo > 0.0).then(|| hi / lo);
        Certificate {
            passed,
            lo,
            hi,
            target_lo,
            target_hi,
            nullspace_dim_g,
            nullspace_dim_h,
            nullspace_contained,
            kappa,
        }
    }

    pub fn csv_header() -> &'static str {
        "passed,lo,hi,target_lo,target_hi,kappa"
    }

    pub fn to_csv_row(&self) -> String {
        let kappa = self.kappa.map(|k| format!("{k}")).unwrap_or_default();
        format!(
            "{},{},{},{},{},{kappa}",
            self.passed, self.lo, self.hi, self.target_lo, self.target_hi
        )
    }
}

/// Certifies l against the identity with explicit eigenvalue targets.
pub fn certify_identity_targets(l: &SymMatrix, target_lo: f64, target_hi: f64) -> Result<Certificate> {
    let eig = sym_eig(l)?;
    let (lo, hi) = if eig.values.is_empty() {
        (1.0, 1.0)
    } else {
        (eig.min_eigenvalue(), eig.max_eigenvalue())
    };
    Ok(Certificate::from_extremes(lo, hi, target_lo, target_hi, 0, 0, true))
}

/// Certifies (1-eps)^2 I <= L <= (1+eps)^2 I by extreme eigenvalues.
pub fn certify_identity(l: &SymMatrix, eps: f64) -> Result<Certificate> {
    certify_identity_targets(l, (1.0 - eps) * (1.0 - eps), (1.0 + eps) * (1.0 + eps))
}

/// Certifies (1-eps)^2 L_G <= L_H <= (1+eps)^2 L_G on the range of L_G.
///
/// The nullspace of L_G (eigenvalues below n * 1e-12 * lambda_max) must be
/// annihilated by L_H: ||L_H z|| <= 1e-8 ||L_H||_F for each basis vector z.
/// On the orthogonal complement the relative eigenvalues are those of
/// M = D^{-1/2} U^T L_H U D^{-1/2}, with (U, D) the positive eigenpairs.
pub fn certify_graph(l_g: &SymMatrix, l_h: &SymMatrix, eps: f64) -> Result<Certificate> {
    if l_g.n() != l_h.n() {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{}", l_g.n()),
            found: format!("{}", l_h.n()),
        });
    }
    let n = l_g.n();
    let target_lo = (1.0 - eps) * (1.0 - eps);
    let target_hi = (1.0 + eps) * (1.0 + eps);

    let eig_g = sym_eig(l_g)?;
    let lambda_max = eig_g.max_eigenvalue().max(0.0);
    let null_cut = n as f64 * 1e-12 * lambda_max;
    let null_dim_g = eig_g.values.iter().filter(|&&l| l <= null_cut).count();

    let lh_frob = l_h.frobenius_norm();
    let mut contained = true;
    for col in 0..null_dim_g {
        let z: Vec<f64> = (0..n).map(|row| eig_g.vectors[(row, col)]).collect();
        let image = l_h.matvec(&z)?;
        let image_norm = image.iter().map(|x| x * x).sum::<f64>().sqrt();
        if image_norm > 1e-8 * lh_frob.max(1e-300) {
            contained = false;
            break;
        }
    }

    // Nullspace dimension of the candidate, reported for diagnostics.
    let eig_h = sym_eig(l_h)?;
    let h_max_abs = eig_h.values.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    let null_dim_h = eig_h
        .values
        .iter()
        .filter(|&&l| l.abs() <= n as f64 * 1e-12 * h_max_abs)
        .count();

    let r = n - null_dim_g;
    if r == 0 {
        // Degenerate target: the sandwich is vacuous on a zero matrix.
        return Ok(Certificate::from_extremes(
            1.0, 1.0, target_lo, target_hi, null_dim_g, null_dim_h, contained,
        ));
    }
    if !contained {
        return Ok(Certificate::from_extremes(
            f64::NEG_INFINITY,
            f64::INFINITY,
            target_lo,
            target_hi,
            null_dim_g,
            null_dim_h,
            false,
        ));
    }

    // M = D^{-1/2} U^T L_H U D^{-1/2} over the positive eigenpairs.
    let mut u_scaled = Mat::zeros(n, r);
    for (j, col) in (null_dim_g..n).enumerate() {
        let inv_sqrt = 1.0 / eig_g.values[col].sqrt();
        for row in 0..n {
            u_scaled[(row, j)] = eig_g.vectors[(row, col)] * inv_sqrt;
        }
    }
    let lh_u = l_h.to_mat().matmul(&u_scaled)?;
    let m_mat = u_scaled.transpose().matmul(&lh_u)?;
    let m_sym = SymMatrix::from_fn(r, |i, j| 0.5 * (m_mat[(i, j)] + m_mat[(j, i)]))?;
    let eig_m = sym_eig(&m_sym)?;
    Ok(Certificate::from_extremes(
        eig_m.min_eigenvalue(),
        eig_m.max_eigenvalue(),
        target_lo,
        target_hi,
        null_dim_g,
        null_dim_h,
        true,
    ))
}

/// Smallest eigenvalue of the m-by-m Gram matrix of the graph's edge atoms.
/// Brute force; refuses above [`GRAMMIAN_VERTEX_CAP`] vertices.
pub fn grammian_min_eig(g: &WeightedGraph) -> Result<f64> {
    if g.n() > GRAMMIAN_VERTEX_CAP {
        return Err(UgaError::SizeCapExceeded { n: g.n(), cap: GRAMMIAN_VERTEX_CAP });
    }
    let m = g.m();
    let atoms: Vec<EdgeAtom> = g.edges().iter().map(|e| EdgeAtom::new(e.u, e.v)).collect();
    let gram = SymMatrix::from_fn(m, |i, j| edge_atom_inner(atoms[i], atoms[j]))?;
    Ok(sym_eig(&gram)?.min_eigenvalue())
}

/// Per-iteration verdicts of the residual decay guarantees over a run
/// history of squared residual norms (index 0 holding ||L_G||_F^2).
#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// history[i] <= history[i-1] within slack, for i >= 1.
    pub monotone_ok: Vec<bool>,
    /// Trace-decay bound ||R_{i+1}||^2 <= ||L_G||^2 / (1 + i ||L_G||^2/Tr^2),
    /// checked for history indices >= 2.
    pub trace_bound_ok: Vec<bool>,
    /// ||R||_2^2 / ||R||_F^2 at the final iterate, when a dense residual
    /// was supplied.
    pub spectral_ratio: Option<f64>,
}

impl ResidualReport {
    pub fn all_ok(&self) -> bool {
        self.monotone_ok.iter().all(|&b| b) && self.trace_bound_ok.iter().all(|&b| b)
    }
}

/// Checks the residual history of a sparsification run against the decay
/// guarantees. `final_residual_dense` optionally supplies the dense final
/// residual so the spectral-to-Frobenius ratio can be probed.
pub fn residual_diagnostics(
    trace_lg: f64,
    frob_lg_sq: f64,
    history_sq: &[f64],
    final_residual_dense: Option<&SymMatrix>,
) -> Result<ResidualReport> {
    let mut monotone_ok = Vec::new();
    for w in history_sq.windows(2) {
        monotone_ok.push(w[1] <= w[0] + 1e-10 * frob_lg_sq.max(1.0));
    }
    let mut trace_bound_ok = Vec::new();
    let tr_sq = trace_lg * trace_lg;
    for (idx, &r_sq) in history_sq.iter().enumerate().skip(2) {
        // history index idx = i + 1 with i >= 1 completed iterations.
        let i = (idx - 1) as f64;
        let bound = frob_lg_sq / (1.0 + i * frob_lg_sq / tr_sq) + 1e-8 * frob_lg_sq;
        trace_bound_ok.push(r_sq <= bound);
    }
    let spectral_ratio = match final_residual_dense {
        Some(r) => {
            let frob_sq = r.frobenius_norm().powi(2);
            if frob_sq == 0.0 {
                None
            } else {
                let eig = sym_eig(r)?;
                let spec = eig
                    .values
                    .iter()
                    .fold(0.0f64, |m, &l| m.max(l.abs()));
                Some(spec * spec / frob_sq)
            }
        }
        None => None,
    };
    Ok(ResidualReport { monotone_ok, trace_bound_ok, spectral_ratio })
}
