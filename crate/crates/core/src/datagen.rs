//! Synthetic data: Pitman-Yor seating partitions, stochastic block model
//! graphs, power-law Gaussian blobs, and vector→graph conversion.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::VectorDataset;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::partition::{MoveTarget, Partition};

/// Stochastic block model driven by a sampled block probability matrix.
/// `diag` and `offdiag` are (mean, variance) of the Gaussians the block
/// probabilities are drawn from; draws are clamped to [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct SbmSpec {
    pub n: usize,
    pub alpha: f64,
    pub theta: f64,
    pub diag: (f64, f64),
    pub offdiag: (f64, f64),
    pub seed: u64,
}

/// Sequential Pitman-Yor seating: the first customer opens a table; customer
/// i joins table c with probability ∝ (n_c − θ) and opens a new table with
/// probability ∝ (kθ + α).
pub fn sample_pycrp(n: usize, alpha: f64, theta: f64, seed: u64) -> Result<Partition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_pycrp_with(n, alpha, theta, &mut rng)
}

pub fn sample_pycrp_with(
    n: usize,
    alpha: f64,
    theta: f64,
    rng: &mut impl Rng,
) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidInput("need at least one point".into()));
    }
    if !(0.0..1.0).contains(&theta) || alpha + theta <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "invalid seating parameters alpha={alpha}, theta={theta}"
        )));
    }
    let mut assign = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = vec![1];
    assign.push(0usize);
    for i in 1..n {
        let k = sizes.len() as f64;
        // normalizer: Σ_c (n_c − θ) + (kθ + α) = i + α
        let total = (i as f64 - k * theta) + (k * theta + alpha);
        let mut u = rng.random_range(0.0..total);
        let mut choice = sizes.len();
        for (c, &s) in sizes.iter().enumerate() {
            let w = s as f64 - theta;
            if u < w {
                choice = c;
                break;
            }
            u -= w;
        }
        if choice == sizes.len() {
            sizes.push(1);
        } else {
            sizes[choice] += 1;
        }
        assign.push(choice);
    }
    Partition::from_assignments(&assign)
}

/// Samples a block matrix then an unweighted graph: each unordered pair
/// (i, j), i ≠ j, gets an edge with probability B[z_i][z_j]. No self-loops.
pub fn sample_sbm(spec: &SbmSpec, labels: &Partition) -> Result<WeightedGraph> {
    if labels.n() != spec.n {
        return Err(Error::InvalidInput(format!(
            "labels cover {} points but spec.n = {}",
            labels.n(),
            spec.n
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k = labels.k();
    let block = sample_block_matrix(k, spec.diag, spec.offdiag, &mut rng)?;
    let assign = labels.assign();
    let mut edges = Vec::new();
    for i in 0..spec.n {
        for j in (i + 1)..spec.n {
            let p = block[assign[i] * k + assign[j]];
            if rng.random_range(0.0..1.0) < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    WeightedGraph::from_edges(spec.n, &edges)
}

/// The sampled block matrix itself (symmetric, clamped to [0,1]).
pub fn sample_block_matrix(
    k: usize,
    diag: (f64, f64),
    offdiag: (f64, f64),
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let draw = |params: (f64, f64), rng: &mut dyn rand::RngCore| -> Result<f64> {
        let (mean, var) = params;
        if var < 0.0 {
            return Err(Error::InvalidInput("variance must be ≥ 0".into()));
        }
        let value = if var == 0.0 {
            mean
        } else {
            Normal::new(mean, var.sqrt())
                .map_err(|e| Error::InvalidInput(e.to_string()))?
                .sample(rng)
        };
        Ok(value.clamp(0.0, 1.0))
    };
    let mut block = vec![0.0; k * k];
    for c in 0..k {
        for d in c..k {
            let p = if c == d { draw(diag, rng)? } else { draw(offdiag, rng)? };
            block[c * k + d] = p;
            block[d * k + c] = p;
        }
    }
    Ok(block)
}

/// Convenience wrapper: seating partition + block model graph.
pub fn sample_pycrp_sbm(spec: &SbmSpec) -> Result<(WeightedGraph, Partition)> {
    // separate streams so the graph draw does not perturb the seating
    let labels = sample_pycrp(spec.n, spec.alpha, spec.theta, spec.seed)?;
    let graph = sample_sbm(spec, &labels)?;
    Ok((graph, labels))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sparsify {
    None,
    /// Keep each node's k strongest similarities, then take the union.
    Knn(usize),
    /// Keep similarities ≥ the threshold.
    Eps(f64),
}

/// Dense Gaussian similarity graph: A_ij = exp(−‖x_i−x_j‖²/(2σ²)) for i ≠ j,
/// no self-loops, optional sparsification (the union is kept, so the result
/// stays symmetric).
pub fn gaussian_similarity_graph(
    data: &VectorDataset,
    sigma: f64,
    sparsify: Sparsify,
) -> Result<WeightedGraph> {
    if sigma <= 0.0 || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("sigma must be positive, got {sigma}")));
    }
    let n = data.n();
    let denom = 2.0 * sigma * sigma;
    let sim = |i: usize, j: usize| (-data.squared_distance(i, j) / denom).exp();

    let mut edges = Vec::new();
    match sparsify {
        Sparsify::None => {
            for i in 0..n {
                for j in (i + 1)..n {
                    edges.push((i, j, sim(i, j)));
                }
            }
        }
        Sparsify::Eps(t) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let w = sim(i, j);
                    if w >= t {
                        edges.push((i, j, w));
                    }
                }
            }
        }
        Sparsify::Knn(k) => {
            for i in 0..n {
                let mut row: Vec<(usize, f64)> =
                    (0..n).filter(|&j| j != i).map(|j| (j, sim(i, j))).collect();
                row.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                for &(j, w) in row.iter().take(k) {
                    edges.push((i, j, w));
                }
            }
        }
    }
    WeightedGraph::from_edges(n, &edges)
}

/// Median pairwise Euclidean distance; the usual default bandwidth.
pub fn median_pairwise_distance(data: &VectorDataset) -> f64 {
    let n = data.n();
    if n < 2 {
        return 1.0;
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(data.squared_distance(i, j).sqrt());
        }
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = dists.len() / 2;
    if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    }
}

/// Seating partition + isotropic Gaussian blobs around uniform centers.
pub fn sample_power_law_blobs(
    n: usize,
    d: usize,
    alpha: f64,
    theta: f64,
    blob_std: f64,
    bounds: (f64, f64),
    seed: u64,
) -> Result<(VectorDataset, Partition)> {
    if blob_std <= 0.0 {
        return Err(Error::InvalidInput("blob_std must be positive".into()));
    }
    if bounds.1 <= bounds.0 {
        return Err(Error::InvalidInput("box upper bound must exceed lower bound".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels = sample_pycrp_with(n, alpha, theta, &mut rng)?;
    let centers: Vec<f64> =
        (0..labels.k() * d).map(|_| rng.random_range(bounds.0..bounds.1)).collect();
    let noise = Normal::new(0.0, blob_std).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut points = Vec::with_capacity(n * d);
    for i in 0..n {
        let c = labels.cluster_of(i);
        for r in 0..d {
            points.push(centers[c * d + r] + noise.sample(&mut rng));
        }
    }
    Ok((VectorDataset::new(points, n, d)?, labels))
}

// keeps the import used only through the solver side out of the public path
#[allow(unused)]
fn _target_hint() -> MoveTarget {
    MoveTarget::New
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    #[test]
    fn single_customer_single_table() {
        for seed in 0..20 {
            let p = sample_pycrp(1, 1.0, 0.5, seed).unwrap();
            assert_eq!(p.k(), 1);
        }
    }

    #[test]
    fn crp_second_customer_probability() {
        // theta = 0, alpha = 1: P(join first table) = 1/2
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let draws = 100_000;
        let mut joined = 0;
        for _ in 0..draws {
            let p = sample_pycrp_with(2, 1.0, 0.0, &mut rng).unwrap();
            if p.k() == 1 {
                joined += 1;
            }
        }
        let freq = joined as f64 / draws as f64;
        assert!((freq - 0.5).abs() < 0.01, "join frequency {freq}");
    }

    #[test]
    fn generators_are_deterministic() {
        let a = sample_pycrp(50, 1.0, 0.4, 7).unwrap();
        let b = sample_pycrp(50, 1.0, 0.4, 7).unwrap();
        assert_eq!(a, b);

        let spec = SbmSpec {
            n: 40,
            alpha: 1.0,
            theta: 0.2,
            diag: (0.4, 0.001),
            offdiag: (0.05, 0.001),
            seed: 3,
        };
        let (g1, l1) = sample_pycrp_sbm(&spec).unwrap();
        let (g2, l2) = sample_pycrp_sbm(&spec).unwrap();
        assert_eq!(l1, l2);
        assert_eq!(g1.undirected_edges(), g2.undirected_edges());
    }

    #[test]
    fn zero_variance_blocks_give_disjoint_cliques() {
        let labels = Partition::from_assignments(&[0, 0, 0, 1, 1, 2]).unwrap();
        let spec = SbmSpec {
            n: 6,
            alpha: 1.0,
            theta: 0.2,
            diag: (1.0, 0.0),
            offdiag: (0.0, 0.0),
            seed: 11,
        };
        let g = sample_sbm(&spec, &labels).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i != j && labels.cluster_of(i) == labels.cluster_of(j) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(g.weight(i, j), expected, "edge ({i},{j})");
            }
        }
    }

    #[test]
    fn within_block_density_matches_block_probability() {
        // fixed block matrix via zero variance, then count edges
        let n = 400;
        let labels =
            Partition::from_assignments(&(0..n).map(|i| i / 200).collect::<Vec<_>>()).unwrap();
        let spec = SbmSpec {
            n,
            alpha: 1.0,
            theta: 0.2,
            diag: (0.3, 0.0),
            offdiag: (0.05, 0.0),
            seed: 5,
        };
        let g = sample_sbm(&spec, &labels).unwrap();
        let mut within = 0usize;
        let pairs_per_block = 200 * 199 / 2;
        for (u, v, _) in g.undirected_edges() {
            if labels.cluster_of(u) == labels.cluster_of(v) {
                within += 1;
            }
        }
        let p = 0.3;
        let trials = (2 * pairs_per_block) as f64;
        let sigma = (trials * p * (1.0 - p)).sqrt();
        assert!(
            (within as f64 - trials * p).abs() < 3.0 * sigma,
            "within-block edges {within} vs expected {}",
            trials * p
        );
    }

    #[test]
    fn similarity_analytic_values() {
        let data = VectorDataset::new(vec![0.0, 0.0, 2.0_f64.sqrt()], 3, 1).unwrap();
        let g = gaussian_similarity_graph(&data, 1.0, Sparsify::None).unwrap();
        // coincident points: similarity 1
        assert_abs_diff_eq!(g.weight(0, 1), 1.0, epsilon = 1e-12);
        // distance σ√2: similarity e^{-1}
        assert_abs_diff_eq!(g.weight(0, 2), (-1.0_f64).exp(), epsilon = 1e-12);
        // no self-loops
        assert_eq!(g.weight(0, 0), 0.0);
    }

    #[test]
    fn knn_with_large_k_equals_dense() {
        let data = VectorDataset::new(vec![0.0, 1.0, 2.0], 3, 1).unwrap();
        let dense = gaussian_similarity_graph(&data, 0.7, Sparsify::None).unwrap();
        let knn = gaussian_similarity_graph(&data, 0.7, Sparsify::Knn(5)).unwrap();
        assert_eq!(dense.undirected_edges(), knn.undirected_edges());
    }

    #[test]
    fn blob_sizes_follow_the_seating_partition() {
        let (data, labels) =
            sample_power_law_blobs(120, 2, 1.0, 0.4, 0.05, (0.0, 10.0), 21).unwrap();
        assert_eq!(data.n(), 120);
        let check = sample_pycrp(120, 1.0, 0.4, 21);
        // same seed stream prefix: the seating comes out identical
        assert_eq!(check.unwrap().sizes(), labels.sizes());
    }

    #[test]
    fn nearest_center_recovers_well_separated_blobs() {
        use crate::metrics::nmi;
        for seed in [1u64, 2, 3] {
            let (data, labels) =
                sample_power_law_blobs(200, 2, 1.0, 0.3, 0.02, (0.0, 10.0), seed).unwrap();
            // centroid of each true cluster stands in for the sampled center
            let k = labels.k();
            let mut centers = vec![0.0; k * 2];
            let mut counts = vec![0.0; k];
            for i in 0..200 {
                let c = labels.cluster_of(i);
                counts[c] += 1.0;
                for r in 0..2 {
                    centers[c * 2 + r] += data.point(i)[r];
                }
            }
            for c in 0..k {
                for r in 0..2 {
                    centers[c * 2 + r] /= counts[c];
                }
            }
            let recovered: Vec<usize> = (0..200)
                .map(|i| {
                    (0..k)
                        .min_by(|&a, &b| {
                            let da: f64 = (0..2)
                                .map(|r| (data.point(i)[r] - centers[a * 2 + r]).powi(2))
                                .sum();
                            let db: f64 = (0..2)
                                .map(|r| (data.point(i)[r] - centers[b * 2 + r]).powi(2))
                                .sum();
                            da.partial_cmp(&db).unwrap()
                        })
                        .unwrap()
                })
                .collect();
            let rec = Partition::from_assignments(&recovered).unwrap();
            let score = nmi(&rec, &labels).unwrap();
            assert!(score >= 0.9, "seed {seed}: nmi {score}");
        }
    }
}
