//! Nonnegative greedy subset selection over isotropic vector sets.
//!
//! Given vectors v_1..v_m whose outer products sum to the identity, the
//! driver repeatedly picks the vector with the largest residual energy
//! v^T R v, refits the two weights (scale of the running approximation,
//! weight of the new atom) by least squares, and folds the update into O(m)
//! cached inner products instead of any dense matrix work. The weights stay
//! nonnegative, so the output is a positive sparse decomposition.
//!
//! [`reduce_general_b`] lifts the same machinery to an arbitrary PSD target
//! B = sum v v^T through a Cholesky or thin-spectral change of basis.

use crate::error::{Result, UgaError};
use crate::iteration_budget;
use crate::linalg::{
    cholesky, dot, solve_2x2, thin_spectral_factor, LowerTriangular, Mat, Solve2x2, SymMatrix,
    ThinFactor,
};
use log::warn;

/// Coefficients may dip this far (relative to the coefficient scale) below
/// zero before the run is declared broken; smaller dips are clamped to 0.
pub const NONNEG_TOL: f64 = 1e-12;

/// Early exit once ||R||_F <= 1e-12 * sqrt(n); later refits would hit
/// numerically degenerate systems with nothing left to gain.
pub const EARLY_EXIT_REL: f64 = 1e-12;

/// m vectors in R^n whose outer-product sum approximates the identity.
#[derive(Debug, Clone)]
pub struct IsotropicSet {
    vectors: Mat, // m rows of dimension n
    norms_sq: Vec<f64>,
}

impl IsotropicSet {
    /// Wraps an m-by-n row matrix of vectors. With `check_isotropy` the sum
    /// of outer products must match the identity within 1e-8 * sqrt(n).
    pub fn new(vectors: Mat, check_isotropy: bool) -> Result<Self> {
        let (m, n) = (vectors.rows(), vectors.cols());
        if n < 1 || m < n {
            return Err(UgaError::InvalidInput(format!(
                "need m >= n >= 1 vectors, got m={m}, n={n}"
            )));
        }
        if !vectors.is_finite() {
            return Err(UgaError::NonFinite("vector set".into()));
        }
        let norms_sq = (0..m).map(|k| dot(vectors.row(k), vectors.row(k))).collect();
        let set = IsotropicSet { vectors, norms_sq };
        if check_isotropy {
            let res = set.isotropy_residual();
            let tol = 1e-8 * (n as f64).sqrt();
            if res > tol {
                return Err(UgaError::InvalidInput(format!(
                    "set is not isotropic: ||sum vv^T - I||_F = {res:e} > {tol:e}"
                )));
            }
        }
        Ok(set)
    }

    pub fn n(&self) -> usize {
        self.vectors.cols()
    }

    pub fn m(&self) -> usize {
        self.vectors.rows()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        self.vectors.row(k)
    }

    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn norm_sq(&self, k: usize) -> f64 {
        self.norms_sq[k]
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    /// ||sum_k v_k v_k^T - I||_F, computed densely.
    pub fn isotropy_residual(&self) -> f64 {
        let g = self.outer_product_sum();
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                acc += (g.get(i, j) - target).powi(2);
            }
        }
        acc.sqrt()
    }

    /// Dense sum of outer products (the Gram matrix of the row matrix).
    pub fn outer_product_sum(&self) -> SymMatrix {
        self.vectors.gram()
    }
}

/// Ratio of the smallest to the largest squared vector norm, in (0, 1].
/// The unsquared variant used in some bounds is its square root; both are
/// reported in diagnostics.
pub fn gamma_of(set: &IsotropicSet) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut max = 0.0f64;
    for (k, &ns) in set.norms_sq.iter().enumerate() {
        if ns <= 0.0 {
            return Err(UgaError::InvalidInput(format!("vector {k} has zero norm")));
        }
        min = min.min(ns);
        max = max.max(ns);
    }
    Ok(min / max)
}

/// Mutable iteration state of the greedy selection.
///
/// `t[k]` caches v_k^T L v_k for the running approximation L, so the score
/// of vector k is `norm_sq(k) - t[k]`. `l_frob_sq` and `l_trace` carry
/// ||L||_F^2 and <I, L>; both update in O(1) per iteration.
#[derive(Debug, Clone)]
pub struct SubsetState {
    iteration: usize,
    lambda: Vec<usize>,
    c: Vec<f64>,
    t: Vec<f64>,
    l_frob_sq: f64,
    l_trace: f64,
    last_alpha: (f64, f64),
    degenerate_fallbacks: usize,
}

/// What one greedy step did: which atom, with what refit weights and score.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub index: usize,
    pub alpha: (f64, f64),
    pub score: f64,
    pub used_fallback: bool,
}

impl SubsetState {
    pub fn new(set: &IsotropicSet) -> Self {
        SubsetState {
            iteration: 0,
            lambda: Vec::new(),
            c: vec![0.0; set.m()],
            t: vec![0.0; set.m()],
            l_frob_sq: 0.0,
            l_trace: 0.0,
            last_alpha: (0.0, 0.0),
            degenerate_fallbacks: 0,
        }
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn lambda(&self) -> &[usize] {
        &self.lambda
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn cached_quadratic(&self, k: usize) -> f64 {
        self.t[k]
    }

    pub fn l_frob_sq(&self) -> f64 {
        self.l_frob_sq
    }

    pub fn l_trace(&self) -> f64 {
        self.l_trace
    }

    pub fn last_alpha(&self) -> (f64, f64) {
        self.last_alpha
    }

    pub fn degenerate_fallbacks(&self) -> usize {
        self.degenerate_fallbacks
    }

    /// Score of vector k against the current residual: v_k^T R v_k.
    pub fn score(&self, set: &IsotropicSet, k: usize) -> f64 {
        set.norm_sq(k) - self.t[k]
    }

    /// ||R||_F^2 = n - ||L||_F^2, using <R, L> = 0 from the refit.
    pub fn residual_sq(&self, set: &IsotropicSet) -> f64 {
        (set.n() as f64 - self.l_frob_sq).max(0.0)
    }

    pub fn residual_frob(&self, set: &IsotropicSet) -> f64 {
        self.residual_sq(set).sqrt()
    }

    /// Index with the maximal score, smallest index on ties. O(m) scan.
    pub fn select_index(&self, set: &IsotropicSet) -> usize {
        let mut best = 0usize;
        let mut best_score = self.score(set, 0);
        for k in 1..set.m() {
            let s = self.score(set, k);
            if s > best_score {
                best = k;
                best_score = s;
            }
        }
        best
    }

    /// Least-squares weights (a1, a2) minimizing ||I - a1 L - a2 v_j v_j^T||_F.
    ///
    /// The normal equations form a 2x2 system whose entries are all cached:
    /// [[||L||_F^2, t(j)], [t(j), ||v_j||^4]] a = [<I,L>, ||v_j||^2].
    /// On the first iteration (L = 0) the closed form is (0, 1/||v_j||^2).
    /// A degenerate system falls back to the pure rank-1 update
    /// a1 = 1, a2 = score / ||v_j||^4, which is logged.
    pub fn optimal_weights(&self, set: &IsotropicSet, j: usize) -> (f64, f64, bool) {
        let nj = set.norm_sq(j);
        if self.l_frob_sq == 0.0 {
            return (0.0, 1.0 / nj, false);
        }
        let tj = self.t[j];
        let sys = [[self.l_frob_sq, tj], [tj, nj * nj]];
        let rhs = [self.l_trace, nj];
        match solve_2x2(sys, rhs) {
            Solve2x2::Solution([a1, a2]) => (a1, a2, false),
            Solve2x2::Degenerate => {
                let score = nj - tj;
                warn!(
                    "degenerate 2x2 refit at iteration {}; rank-1 fallback (score {score:e})",
                    self.iteration + 1
                );
                (1.0, score / (nj * nj), true)
            }
        }
    }

    /// One greedy iteration: select, refit, fold the update into the caches.
    pub fn step(&mut self, set: &IsotropicSet) -> Result<StepInfo> {
        let j = self.select_index(set);
        let score = self.score(set, j);
        let (a1, a2, used_fallback) = self.optimal_weights(set, j);
        if used_fallback {
            self.degenerate_fallbacks += 1;
        }
        let nj = set.norm_sq(j);
        let t_old_j = self.t[j];

        // Scalar caches first; they need the pre-update t(j).
        self.l_frob_sq = a1 * a1 * self.l_frob_sq + 2.0 * a1 * a2 * t_old_j + a2 * a2 * nj * nj;
        self.l_trace = a1 * self.l_trace + a2 * nj;

        // t(k) <- a1 t(k) + a2 (v_j . v_k)^2, the O(mn) part.
        let vj = set.vector(j).to_vec();
        for k in 0..set.m() {
            let ip = dot(&vj, set.vector(k));
            self.t[k] = a1 * self.t[k] + a2 * ip * ip;
        }

        // Coefficients: scale everything, then add the new weight.
        for ck in self.c.iter_mut() {
            *ck *= a1;
        }
        self.c[j] += a2;

        let scale = self.c.iter().fold(1.0f64, |m, &x| m.max(x));
        let floor = -NONNEG_TOL * scale;
        for (k, ck) in self.c.iter_mut().enumerate() {
            if *ck < 0.0 {
                if *ck < floor {
                    return Err(UgaError::NonnegativityViolation { index: k, value: *ck });
                }
                *ck = 0.0;
            }
        }

        self.lambda.push(j);
        self.iteration += 1;
        self.last_alpha = (a1, a2);
        Ok(StepInfo { index: j, alpha: (a1, a2), score, used_fallback })
    }
}

/// Output of a completed selection run, pruned to the indices that kept a
/// strictly positive coefficient.
#[derive(Debug, Clone)]
pub struct SubsetResult {
    pub lambda: Vec<usize>,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub residual_frob: f64,
}

impl SubsetResult {
    pub fn sparsity(&self) -> usize {
        self.lambda.len()
    }

    /// Dense sum of selected weighted outer products, for verification.
    pub fn approximation_dense(&self, vectors: &Mat) -> SymMatrix {
        let n = vectors.cols();
        let mut l = SymMatrix::zeros(n);
        for (&k, &ck) in self.lambda.iter().zip(&self.coefficients) {
            let v = vectors.row(k);
            for i in 0..n {
                for j in i..n {
                    l.set(i, j, l.get(i, j) + ck * v[i] * v[j]);
                }
            }
        }
        l
    }
}

/// Runs the greedy selection for ceil(n / eps^2) iterations, stopping early
/// on exact recovery.
pub fn run(set: &IsotropicSet, eps: f64) -> Result<SubsetResult> {
    if eps <= 0.0 || eps >= 1.0 {
        return Err(UgaError::InvalidInput(format!("epsilon must be in (0,1), got {eps}")));
    }
    let budget = iteration_budget(set.n(), eps);
    let exit_norm = EARLY_EXIT_REL * (set.n() as f64).sqrt();
    let mut state = SubsetState::new(set);
    for _ in 0..budget {
        if state.residual_frob(set) <= exit_norm {
            break;
        }
        state.step(set)?;
    }
    Ok(finish(state, set))
}

fn finish(state: SubsetState, set: &IsotropicSet) -> SubsetResult {
    let mut lambda = Vec::new();
    let mut coefficients = Vec::new();
    let mut taken = vec![false; set.m()];
    for &k in &state.lambda {
        if !taken[k] && state.c[k] != 0.0 {
            taken[k] = true;
            lambda.push(k);
            coefficients.push(state.c[k]);
        }
    }
    SubsetResult {
        lambda,
        coefficients,
        iterations: state.iteration,
        residual_frob: state.residual_frob(set),
    }
}

/// How a general PSD target was reduced to an isotropic problem.
#[derive(Debug, Clone)]
pub enum BackMap {
    /// B was positive definite; vectors were mapped through L^{-1}.
    Cholesky { factor: LowerTriangular },
    /// B was rank deficient; vectors were mapped through S^{-1} V^T.
    ThinSvd { factor: ThinFactor },
}

impl BackMap {
    pub fn label(&self) -> &'static str {
        match self {
            BackMap::Cholesky { .. } => "cholesky",
            BackMap::ThinSvd { .. } => "thin_svd",
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            BackMap::Cholesky { factor } => factor.n(),
            BackMap::ThinSvd { factor } => factor.rank(),
        }
    }
}

/// Reduction of B = sum v v^T to an isotropic set. Selected indices and
/// coefficients from a run on `set` apply unchanged to the original vectors:
/// sum_k c_k v_k v_k^T then approximates B with the same spectral bounds.
#[derive(Debug, Clone)]
pub struct GeneralReduction {
    pub set: IsotropicSet,
    pub back_map: BackMap,
}

/// Builds the isotropic reduction of a general PSD target given by vector
/// rows. Tries the Cholesky route first and falls back to the thin spectral
/// factorization when B is numerically rank deficient.
pub fn reduce_general_b(vectors: &Mat) -> Result<GeneralReduction> {
    if !vectors.is_finite() {
        return Err(UgaError::NonFinite("general-B vectors".into()));
    }
    if vectors.frobenius_norm() == 0.0 {
        return Err(UgaError::InvalidInput("all-zero vector set".into()));
    }
    let b = vectors.gram();
    match cholesky(&b) {
        Ok(factor) => {
            let m = vectors.rows();
            let n = vectors.cols();
            let mut reduced = Mat::zeros(m, n);
            for k in 0..m {
                let u = factor.solve_forward(vectors.row(k))?;
                reduced.row_mut(k).copy_from_slice(&u);
            }
            let set = IsotropicSet::new(reduced, false)?;
            let tol = 1e-6 * (n as f64).sqrt();
            if set.isotropy_residual() <= tol {
                return Ok(GeneralReduction { set, back_map: BackMap::Cholesky { factor } });
            }
            warn!("cholesky reduction lost isotropy; retrying with the thin spectral path");
            reduce_thin(vectors)
        }
        Err(UgaError::NotPositiveDefinite { .. }) => reduce_thin(vectors),
        Err(e) => Err(e),
    }
}

fn reduce_thin(vectors: &Mat) -> Result<GeneralReduction> {
    let factor = thin_spectral_factor(vectors)?;
    let r = factor.rank();
    if r == 0 {
        return Err(UgaError::InvalidInput("all-zero vector set".into()));
    }
    let m = vectors.rows();
    if m < r {
        return Err(UgaError::InvalidInput(format!(
            "rank {r} exceeds vector count {m}; cannot form an isotropic set"
        )));
    }
    // u_k = S^{-1} V^T v_k, i.e. rows of (A V) scaled by 1/s per column.
    let av = vectors.matmul(&factor.v)?;
    let mut reduced = Mat::zeros(m, r);
    for k in 0..m {
        for j in 0..r {
            reduced[(k, j)] = av[(k, j)] / factor.singular_values[j];
        }
    }
    let set = IsotropicSet::new(reduced, false)?;
    let res = set.isotropy_residual();
    let tol = 1e-6 * (r as f64).sqrt();
    if res > tol {
        return Err(UgaError::InvalidInput(format!(
            "thin reduction failed isotropy check: {res:e} > {tol:e}"
        )));
    }
    Ok(GeneralReduction { set, back_map: BackMap::ThinSvd { factor } })
}
