//! Seeded random instance generators: weighted Erdos-Renyi graphs,
//! stochastic block models, isotropic vector sets, and least-squares
//! problems. Everything is deterministic given (parameters, seed); the
//! generator is ChaCha8 and trial seeds derive from a splitmix64 mix of
//! the base seed with the trial index.

use crate::error::{Result, UgaError};
use crate::graph::WeightedGraph;
use crate::linalg::{qr_orthonormal_columns, Mat};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp, Poisson, StandardNormal};

/// 64-bit reproducibility seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Derived seed for a trial: splitmix64(seed XOR (index * golden ratio)).
    pub fn for_trial(self, trial: u64) -> Seed {
        Seed(splitmix64(self.0 ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Edge weight distribution. `lambda` is the expectation in both cases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    Poisson(f64),
    Exponential(f64),
}

impl WeightDist {
    /// Strictly positive sample; zero draws (possible for Poisson) resample.
    fn sample_positive(self, rng: &mut ChaCha8Rng) -> Result<f64> {
        match self {
            WeightDist::Poisson(lambda) => {
                let dist = Poisson::new(lambda)
                    .map_err(|_| UgaError::InvalidInput(format!("bad poisson lambda {lambda}")))?;
                loop {
                    let w: f64 = dist.sample(rng);
                    if w > 0.0 {
                        return Ok(w);
                    }
                }
            }
            WeightDist::Exponential(mean) => {
                if mean <= 0.0 {
                    return Err(UgaError::InvalidInput(format!("bad exponential mean {mean}")));
                }
                let dist = Exp::new(1.0 / mean).expect("positive rate");
                loop {
                    let w: f64 = dist.sample(rng);
                    if w > 0.0 {
                        return Ok(w);
                    }
                }
            }
        }
    }

    /// Mean of the zero-truncated distribution actually sampled.
    pub fn truncated_mean(self) -> f64 {
        match self {
            WeightDist::Poisson(lambda) => lambda / (1.0 - (-lambda).exp()),
            WeightDist::Exponential(mean) => mean,
        }
    }
}

/// Erdos-Renyi graph on n vertices with edge probability p and i.i.d.
/// positive weights. Pairs are visited in lexicographic order, so equal
/// seeds give byte-identical edge lists.
pub fn gen_er_weighted(n: usize, p: f64, dist: WeightDist, seed: Seed) -> Result<WeightedGraph> {
    if n < 2 {
        return Err(UgaError::InvalidInput(format!("need n >= 2 vertices, got {n}")));
    }
    if !(0.0..=1.0).contains(&p) || p <= 0.0 {
        return Err(UgaError::InvalidInput(format!("edge probability must be in (0,1], got {p}")));
    }
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v, dist.sample_positive(&mut rng)?));
            }
        }
    }
    if edges.is_empty() {
        return Err(UgaError::InvalidInput(
            "generated graph has no edges; raise p or n".into(),
        ));
    }
    WeightedGraph::new(n, edges)
}

/// Stochastic block model parameters: k planted clusters with intra-cluster
/// edge probability p and inter-cluster probability q < p.
#[derive(Debug, Clone)]
pub struct SbmSpec {
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub q: f64,
    pub sizes: Vec<usize>,
}

impl SbmSpec {
    /// Balanced cluster sizes n/k, remainder spread over the first clusters.
    pub fn balanced(n: usize, k: usize, p: f64, q: f64) -> Result<Self> {
        if k == 0 || n == 0 {
            return Err(UgaError::InvalidInput("need n > 0 and k > 0".into()));
        }
        let base = n / k;
        let rem = n % k;
        let sizes: Vec<usize> = (0..k).map(|i| base + usize::from(i < rem)).collect();
        let spec = SbmSpec { n, k, p, q, sizes };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.len() != self.k {
            return Err(UgaError::InvalidInput("sizes length must equal k".into()));
        }
        if self.sizes.iter().sum::<usize>() != self.n {
            return Err(UgaError::InvalidInput("cluster sizes must sum to n".into()));
        }
        if self.sizes.iter().any(|&s| s == 0) {
            return Err(UgaError::InvalidInput("empty cluster".into()));
        }
        if !(self.q >= 0.0 && self.q < self.p && self.p <= 1.0) {
            return Err(UgaError::InvalidInput(format!(
                "need 0 <= q < p <= 1, got p={}, q={}",
                self.p, self.q
            )));
        }
        Ok(())
    }

    /// Planted label of each vertex (clusters are consecutive id ranges).
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = Vec::with_capacity(self.n);
        for (cluster, &size) in self.sizes.iter().enumerate() {
            labels.extend(std::iter::repeat(cluster).take(size));
        }
        labels
    }
}

/// Unit-weight SBM graph plus the planted labels.
pub fn gen_sbm(spec: &SbmSpec, seed: Seed) -> Result<(WeightedGraph, Vec<usize>)> {
    spec.validate()?;
    let labels = spec.labels();
    let mut rng = seed.rng();
    let mut edges = Vec::new();
    for u in 0..spec.n {
        for v in (u + 1)..spec.n {
            let prob = if labels[u] == labels[v] { spec.p } else { spec.q };
            if prob > 0.0 && rng.gen::<f64>() < prob {
                edges.push((u, v, 1.0));
            }
        }
    }
    if edges.is_empty() {
        return Err(UgaError::InvalidInput("generated SBM has no edges".into()));
    }
    Ok((WeightedGraph::new(spec.n, edges)?, labels))
}

/// Isotropic set from the QR factorization of an m-by-n Gaussian matrix:
/// the rows of the orthonormal factor sum to the identity in outer product.
pub fn gen_isotropic(n: usize, m: usize, seed: Seed) -> Result<crate::subset::IsotropicSet> {
    if m < n || n == 0 {
        return Err(UgaError::InvalidInput(format!("need m >= n >= 1, got n={n}, m={m}")));
    }
    let mut rng = seed.rng();
    let mut g = Mat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            g[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let q = qr_orthonormal_columns(&g)?;
    crate::subset::IsotropicSet::new(q, true)
}

/// Random least-squares instance: Gaussian A, planted Gaussian solution,
/// additive noise with standard deviation `noise_std` (0.1 by default in
/// the CLI).
pub fn gen_lsq_instance(m: usize, n: usize, noise_std: f64, seed: Seed) -> Result<(Mat, Vec<f64>)> {
    if m <= n || n == 0 {
        return Err(UgaError::InvalidInput(format!("need m > n >= 1, got m={m}, n={n}")));
    }
    let mut rng = seed.rng();
    let mut a = Mat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            a[(i, j)] = rng.sample(StandardNormal);
        }
    }
    let x_star: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut b = a.matvec(&x_star)?;
    for bi in b.iter_mut() {
        let noise: f64 = rng.sample(StandardNormal);
        *bi += noise_std * noise;
    }
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trial_seeds_differ() {
        let s = Seed(42);
        assert_ne!(s.for_trial(0), s.for_trial(1));
        assert_eq!(s.for_trial(7), s.for_trial(7));
    }

    #[test]
    fn er_p_one_is_complete() {
        let g = gen_er_weighted(3, 1.0, WeightDist::Poisson(5.0), Seed(1)).unwrap();
        assert_eq!(g.m(), 3);
        assert!(g.edges().iter().all(|e| e.w > 0.0));
    }

    #[test]
    fn er_deterministic() {
        let a = gen_er_weighted(20, 0.4, WeightDist::Exponential(2.0), Seed(9)).unwrap();
        let b = gen_er_weighted(20, 0.4, WeightDist::Exponential(2.0), Seed(9)).unwrap();
        assert_eq!(a.edges(), b.edges());
        let c = gen_er_weighted(20, 0.4, WeightDist::Exponential(2.0), Seed(10)).unwrap();
        assert_ne!(a.edges(), c.edges());
    }

    #[test]
    fn truncated_poisson_mean() {
        // Empirical mean within 3 standard errors of lambda / (1 - e^-lambda).
        let lambda = 10.0;
        let dist = WeightDist::Poisson(lambda);
        let mut rng = Seed(123).rng();
        let n = 10_000usize;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..n {
            let w = dist.sample_positive(&mut rng).unwrap();
            sum += w;
            sum_sq += w * w;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        let expected = dist.truncated_mean();
        let se = (var / n as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 3.0 * se,
            "mean {mean} vs expected {expected} (se {se})"
        );
    }

    #[test]
    fn sbm_disconnected_cliques() {
        let spec = SbmSpec::balanced(6, 2, 1.0, 0.0).unwrap();
        let (g, labels) = gen_sbm(&spec, Seed(3)).unwrap();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 1]);
        // Two disjoint triangles.
        assert_eq!(g.m(), 6);
        assert!(g.edges().iter().all(|e| labels[e.u] == labels[e.v]));
        // Laplacian nullspace dimension equals the component count.
        let l = g.laplacian_dense(10).unwrap();
        let eig = crate::linalg::sym_eig(&l).unwrap();
        let nulls = eig.values.iter().filter(|&&x| x.abs() < 1e-9).count();
        assert_eq!(nulls, 2);
    }

    #[test]
    fn sbm_edge_counts_near_expectation() {
        let spec = SbmSpec::balanced(500, 2, 0.1, 0.01).unwrap();
        let (g, labels) = gen_sbm(&spec, Seed(1)).unwrap();
        let mut intra = 0usize;
        let mut inter = 0usize;
        for e in g.edges() {
            if labels[e.u] == labels[e.v] {
                intra += 1;
            } else {
                inter += 1;
            }
        }
        let intra_pairs: f64 = 2.0 * (250.0 * 249.0 / 2.0);
        let inter_pairs: f64 = 250.0 * 250.0;
        let intra_mean = intra_pairs * 0.1;
        let intra_sd = (intra_pairs * 0.1 * 0.9).sqrt();
        assert!((intra as f64 - intra_mean).abs() <= 4.0 * intra_sd);
        let inter_mean = inter_pairs * 0.01;
        let inter_sd = (inter_pairs * 0.01 * 0.99).sqrt();
        assert!((inter as f64 - inter_mean).abs() <= 4.0 * inter_sd);
    }

    #[test]
    fn sbm_rejects_empty_cluster() {
        assert!(SbmSpec::balanced(3, 5, 0.5, 0.1).is_err());
    }

    #[test]
    fn isotropic_set_properties() {
        let set = gen_isotropic(10, 100, Seed(5)).unwrap();
        assert!(set.isotropy_residual() <= 1e-8 * 10f64.sqrt());
        // Trace identity: the squared norms sum to n.
        let total: f64 = set.norms_sq().iter().sum();
        assert!((total - 10.0).abs() < 1e-10);
    }

    #[test]
    fn isotropic_basis_case() {
        let set = gen_isotropic(4, 4, Seed(2)).unwrap();
        for k in 0..4 {
            assert!((set.norm_sq(k) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn lsq_instance_shapes_and_determinism() {
        let (a, b) = gen_lsq_instance(4, 2, 0.1, Seed(0)).unwrap();
        assert_eq!((a.rows(), a.cols()), (4, 2));
        assert_eq!(b.len(), 4);
        let (a2, b2) = gen_lsq_instance(4, 2, 0.1, Seed(0)).unwrap();
        assert_eq!(a.data(), a2.data());
        assert_eq!(b, b2);
    }

    #[test]
    fn lsq_gram_is_positive_definite() {
        let (a, _) = gen_lsq_instance(40, 8, 0.1, Seed(11)).unwrap();
        assert!(crate::linalg::cholesky(&a.gram()).is_ok());
    }
}
