//! Spectral clustering and planted-label accuracy scoring.
//!
//! Clustering follows the usual normalized-Laplacian recipe: embed vertices
//! with the eigenvectors of the k smallest eigenvalues of
//! D^{-1/2} L D^{-1/2}, normalize the rows, and run seeded k-means.

use crate::error::{Result, UgaError};
use crate::linalg::{sym_eig, Mat, SymMatrix};
use crate::sparsify::Sparsifier;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

const KMEANS_RESTARTS: usize = 100;
const KMEANS_MAX_ITERS: usize = 300;

/// Cluster ids per vertex, each in 0..k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
}

impl ClusterAssignment {
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(UgaError::InvalidInput("need k >= 1".into()));
        }
        if labels.iter().any(|&l| l >= k) {
            return Err(UgaError::InvalidInput("label out of range".into()));
        }
        Ok(ClusterAssignment { labels, k })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }
}

/// Spectral clustering of a PSD Laplacian into k groups, deterministic
/// given the seed. Isolated vertices (zero degree) keep identity
/// normalization.
pub fn spectral_cluster(l: &SymMatrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = l.n();
    if k == 0 || k > n {
        return Err(UgaError::InvalidInput(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    if k == 1 {
        return ClusterAssignment::new(vec![0; n], 1);
    }

    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let d = l.get(i, i);
            if d > 0.0 {
                1.0 / d.sqrt()
            } else {
                1.0
            }
        })
        .collect();
    let normalized = SymMatrix::from_fn(n, |i, j| l.get(i, j) * scale[i] * scale[j])?;
    let eig = sym_eig(&normalized)?;

    // Embedding: rows over the k lowest eigenvectors, row-normalized.
    let mut points = Mat::zeros(n, k);
    for row in 0..n {
        let mut norm_sq = 0.0;
        for col in 0..k {
            let v = eig.vectors[(row, col)];
            points[(row, col)] = v;
            norm_sq += v * v;
        }
        if norm_sq > 0.0 {
            let inv = 1.0 / norm_sq.sqrt();
            for col in 0..k {
                points[(row, col)] *= inv;
            }
        }
    }

    let labels = kmeans(&points, k, seed);
    ClusterAssignment::new(labels, k)
}

/// Seeded k-means with squared-distance-weighted seeding, restarts, and an
/// iteration cap; the lowest-inertia restart wins.
fn kmeans(points: &Mat, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_labels = vec![0usize; points.rows()];
    let mut best_inertia = f64::INFINITY;
    for _ in 0..KMEANS_RESTARTS {
        let (labels, inertia) = kmeans_once(points, k, &mut rng);
        if inertia < best_inertia {
            best_inertia = inertia;
            best_labels = labels;
        }
    }
    best_labels
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kmeans_once(points: &Mat, k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64) {
    let n = points.rows();
    let dim = points.cols();

    // Distance-weighted seeding.
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points.row(rng.gen_range(0..n)).to_vec());
    let mut d2: Vec<f64> = (0..n).map(|i| dist_sq(points.row(i), &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(points.row(next).to_vec());
        for i in 0..n {
            d2[i] = d2[i].min(dist_sq(points.row(i), centroids.last().unwrap()));
        }
    }

    let mut labels = vec![0usize; n];
    let mut inertia = f64::INFINITY;
    for _ in 0..KMEANS_MAX_ITERS {
        // Assignment.
        let mut changed = false;
        let mut new_inertia = 0.0;
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = dist_sq(points.row(i), &centroids[0]);
            for (c, centroid) in centroids.iter().enumerate().skip(1) {
                let d = dist_sq(points.row(i), centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            if labels[i] != best {
                changed = true;
                labels[i] = best;
            }
            new_inertia += best_d;
        }
        inertia = new_inertia;
        if !changed {
            break;
        }

        // Update; an emptied cluster reseeds at the worst-fit point.
        let mut counts = vec![0usize; k];
        let mut sums = vec![vec![0.0; dim]; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, &p) in sums[labels[i]].iter_mut().zip(points.row(i)) {
                *s += p;
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        dist_sq(points.row(a), &centroids[labels[a]])
                            .partial_cmp(&dist_sq(points.row(b), &centroids[labels[b]]))
                            .unwrap()
                    })
                    .unwrap();
                centroids[c] = points.row(far).to_vec();
            } else {
                for (cc, s) in centroids[c].iter_mut().zip(&sums[c]) {
                    *cc = s / counts[c] as f64;
                }
            }
        }
    }
    (labels, inertia)
}

/// Mean per-cluster overlap |C_i n C_sigma(i)| / n_i, maximized over label
/// permutations sigma (exhaustive for k <= 8, greedy matching above).
pub fn cluster_accuracy(planted: &ClusterAssignment, found: &ClusterAssignment) -> Result<f64> {
    if planted.n() != found.n() {
        return Err(UgaError::DimensionMismatch {
            expected: format!("{}", planted.n()),
            found: format!("{}", found.n()),
        });
    }
    if planted.k != found.k {
        return Err(UgaError::InvalidInput(format!(
            "cluster counts differ: {} vs {}",
            planted.k, found.k
        )));
    }
    let k = planted.k;
    let mut counts = vec![vec![0usize; k]; k];
    let mut sizes = vec![0usize; k];
    for (&p, &f) in planted.labels.iter().zip(&found.labels) {
        counts[p][f] += 1;
        sizes[p] += 1;
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(UgaError::InvalidInput("planted assignment has an empty cluster".into()));
    }

    let score_of = |assignment: &[usize]| -> f64 {
        assignment
            .iter()
            .enumerate()
            .map(|(i, &j)| counts[i][j] as f64 / sizes[i] as f64)
            .sum::<f64>()
            / k as f64
    };

    if k <= 8 {
        let mut perm: Vec<usize> = (0..k).collect();
        let mut best = score_of(&perm);
        while next_permutation(&mut perm) {
            best = best.max(score_of(&perm));
        }
        Ok(best)
    } else {
        // Greedy matching on the largest per-cluster ratios.
        let mut pairs: Vec<(usize, usize)> = (0..k)
            .flat_map(|i| (0..k).map(move |j| (i, j)))
            .collect();
        pairs.sort_by(|&(i1, j1), &(i2, j2)| {
            let r1 = counts[i1][j1] as f64 / sizes[i1] as f64;
            let r2 = counts[i2][j2] as f64 / sizes[i2] as f64;
            r2.partial_cmp(&r1).unwrap().then(i1.cmp(&i2)).then(j1.cmp(&j2))
        });
        let mut row_used = vec![false; k];
        let mut col_used = vec![false; k];
        let mut total = 0.0;
        for (i, j) in pairs {
            if !row_used[i] && !col_used[j] {
                row_used[i] = true;
                col_used[j] = true;
                total += counts[i][j] as f64 / sizes[i] as f64;
            }
        }
        Ok(total / k as f64)
    }
}

/// Lexicographic next permutation; false once the sequence wraps.
fn next_permutation(perm: &mut [usize]) -> bool {
    let n = perm.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// Laplacian of a sparsifier with negative edge weights clamped to zero,
/// which degree normalization needs. Returns the clamp count alongside.
pub fn clamped_laplacian(s: &Sparsifier, cap: usize) -> Result<(SymMatrix, usize)> {
    if s.n > cap {
        return Err(UgaError::SizeCapExceeded { n: s.n, cap });
    }
    let mut l = SymMatrix::zeros(s.n);
    let mut clamped = 0usize;
    for e in &s.edges {
        if e.weight <= 0.0 {
            clamped += 1;
            continue;
        }
        l.set(e.u, e.u, l.get(e.u, e.u) + e.weight);
        l.set(e.v, e.v, l.get(e.v, e.v) + e.weight);
        l.set(e.u, e.v, l.get(e.u, e.v) - e.weight);
    }
    Ok((l, clamped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::WeightedGraph;

    #[test]
    fn two_cliques_split_perfectly() {
        let mut edges = Vec::new();
        for u in 0..4usize {
            for v in (u + 1)..4 {
                edges.push((u, v, 1.0));
            }
        }
        for u in 4..8usize {
            for v in (u + 1)..8 {
                edges.push((u, v, 1.0));
            }
        }
        let g = WeightedGraph::new(8, edges).unwrap();
        let l = g.laplacian_dense(100).unwrap();
        let found = spectral_cluster(&l, 2, 7).unwrap();
        let planted =
            ClusterAssignment::new(vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
        assert_eq!(cluster_accuracy(&planted, &found).unwrap(), 1.0);
    }

    #[test]
    fn k_equal_one() {
        let g = WeightedGraph::new(3, vec![(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let l = g.laplacian_dense(10).unwrap();
        let found = spectral_cluster(&l, 1, 0).unwrap();
        assert_eq!(found.labels, vec![0, 0, 0]);
    }

    #[test]
    fn k_above_n_rejected() {
        let g = WeightedGraph::new(2, vec![(0, 1, 1.0)]).unwrap();
        let l = g.laplacian_dense(10).unwrap();
        assert!(spectral_cluster(&l, 3, 0).is_err());
    }

    #[test]
    fn clustering_deterministic() {
        let g = WeightedGraph::new(
            6,
            vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 0.1)],
        )
        .unwrap();
        let l = g.laplacian_dense(10).unwrap();
        let a = spectral_cluster(&l, 2, 42).unwrap();
        let b = spectral_cluster(&l, 2, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn accuracy_identical_and_swapped() {
        let planted = ClusterAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        assert_eq!(cluster_accuracy(&planted, &planted).unwrap(), 1.0);
        let swapped = ClusterAssignment::new(vec![1, 1, 0, 0], 2).unwrap();
        assert_eq!(cluster_accuracy(&planted, &swapped).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_partial_overlap() {
        let planted = ClusterAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let found = ClusterAssignment::new(vec![0, 1, 1, 1], 2).unwrap();
        assert!((cluster_accuracy(&planted, &found).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn accuracy_permutation_invariant() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let k = 4;
        let planted_labels: Vec<usize> = (0..40).map(|i| i % k).collect();
        let found_labels: Vec<usize> = (0..40).map(|_| rng.gen_range(0..k)).collect();
        let planted = ClusterAssignment::new(planted_labels, k).unwrap();
        let found = ClusterAssignment::new(found_labels.clone(), k).unwrap();
        let base = cluster_accuracy(&planted, &found).unwrap();
        // Relabel `found` through a fixed permutation; accuracy is unchanged.
        let perm = [2usize, 0, 3, 1];
        let relabeled: Vec<usize> = found_labels.iter().map(|&l| perm[l]).collect();
        let relabeled = ClusterAssignment::new(relabeled, k).unwrap();
        assert!((cluster_accuracy(&planted, &relabeled).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn accuracy_size_mismatch_rejected() {
        let a = ClusterAssignment::new(vec![0, 1], 2).unwrap();
        let b = ClusterAssignment::new(vec![0, 1, 1], 2).unwrap();
        assert!(cluster_accuracy(&a, &b).is_err());
    }

    #[test]
    fn well_separated_sbm_clusters_accurately() {
        use crate::generators::{gen_sbm, SbmSpec, Seed};
        let spec = SbmSpec::balanced(200, 2, 0.1, 0.005).unwrap();
        let (g, labels) = gen_sbm(&spec, Seed(1)).unwrap();
        let l = g.laplacian_dense(500).unwrap();
        let found = spectral_cluster(&l, 2, 1).unwrap();
        let planted = ClusterAssignment::new(labels, 2).unwrap();
        let acc = cluster_accuracy(&planted, &found).unwrap();
        assert!(acc > 0.9, "accuracy {acc}");
    }

    #[test]
    fn clamped_laplacian_counts_negatives() {
        use crate::sparsify::{SparseEdge, Sparsifier};
        let s = Sparsifier {
            n: 3,
            edges: vec![
                SparseEdge { u: 0, v: 1, weight: 2.0 },
                SparseEdge { u: 1, v: 2, weight: -0.5 },
            ],
            iterations: 2,
            residual_frob: 0.0,
            negative_weight_count: 1,
            residual_history_sq: vec![],
        };
        let (l, clamped) = clamped_laplacian(&s, 10).unwrap();
        assert_eq!(clamped, 1);
        assert_eq!(l.get(2, 2), 0.0);
        assert_eq!(l.get(0, 0), 2.0);
    }
}
