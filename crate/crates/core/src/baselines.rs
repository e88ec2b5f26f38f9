//! Fixed-k baselines and the pyp-means comparison algorithm.
//!
//! The fixed-k baselines reuse the regularized solver with λ = 0 and cluster
//! creation disabled, so they share tie-breaking, snapshot semantics, and
//! descent guarantees with the main algorithm. Clusters emptied during a
//! sweep are reseeded with the point farthest from its mean; reseed steps
//! are counted on the result.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::VectorDataset;
use crate::eppf::PYParams;
use crate::error::{Error, Result};
use crate::geometry::VectorGeometry;
use crate::kernel::{KernelGeometry, KernelProblem};
use crate::partition::Partition;
use crate::solver::{run_single, DriverOptions, PointOrder, RunResult};

/// Initialization for the fixed-k algorithms.
#[derive(Debug, Clone)]
pub enum Init {
    /// Seeded random initialization.
    Seed(u64),
    /// Explicit starting assignment; must already have k nonempty clusters.
    Assignment(Vec<usize>),
}

fn lambda_zero() -> PYParams {
    PYParams::new(1.0, 0.0, 0.0).expect("static parameters")
}

fn initial_partition(init: &Init, n: usize, k: usize) -> Result<Partition> {
    if k < 1 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} out of range for n = {n}")));
    }
    match init {
        Init::Assignment(assign) => {
            if assign.len() != n {
                return Err(Error::InvalidInput("initial assignment length != n".into()));
            }
            let p = Partition::from_assignments(assign)?;
            if p.k() != k {
                return Err(Error::InvalidInput(format!(
                    "initial assignment has {} nonempty clusters, expected {k}",
                    p.k()
                )));
            }
            Ok(p)
        }
        Init::Seed(seed) => {
            // one point pinned to each cluster, the rest uniform
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut ids: Vec<usize> = (0..n).collect();
            ids.shuffle(&mut rng);
            let mut assign = vec![0usize; n];
            for (c, &i) in ids.iter().take(k).enumerate() {
                assign[i] = c;
            }
            for &i in ids.iter().skip(k) {
                assign[i] = rng.random_range(0..k);
            }
            Partition::from_assignments(&assign)
        }
    }
}

/// Weighted kernel k-means at fixed k: assignment/update sweeps with the
/// kernel-expanded distances, λ = 0, and no new clusters.
pub fn weighted_kernel_kmeans(
    kp: &KernelProblem,
    k: usize,
    init: Init,
    max_sweeps: usize,
) -> Result<RunResult> {
    let p0 = initial_partition(&init, kp.n(), k)?;
    let opts = DriverOptions { allow_new: false, fixed_k: Some(k), aux: None };
    let mut geom = KernelGeometry::new(kp);
    let mut result = run_single(
        &mut geom,
        p0,
        &lambda_zero(),
        max_sweeps,
        PointOrder::Fixed,
        0,
        true,
        &opts,
    );
    result.rho = Some(kp.rho());
    Ok(result)
}

/// Plain weighted k-means (Lloyd iterations) at fixed k.
pub fn kmeans(
    data: &VectorDataset,
    k: usize,
    init: Init,
    max_iters: usize,
) -> Result<RunResult> {
    let p0 = match &init {
        Init::Assignment(_) => initial_partition(&init, data.n(), k)?,
        Init::Seed(seed) => {
            // Forgy-style: k distinct points become centers; everyone joins
            // the nearest center
            if k < 1 || k > data.n() {
                return Err(Error::InvalidInput(format!(
                    "k = {k} out of range for n = {}",
                    data.n()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut ids: Vec<usize> = (0..data.n()).collect();
            ids.shuffle(&mut rng);
            let centers = &ids[..k];
            let assign: Vec<usize> = (0..data.n())
                .map(|i| {
                    (0..k)
                        .min_by(|&a, &b| {
                            data.squared_distance(i, centers[a])
                                .partial_cmp(&data.squared_distance(i, centers[b]))
                                .unwrap()
                        })
                        .unwrap()
                })
                .collect();
            Partition::from_assignments(&assign)?
        }
    };
    // the nearest-center init can leave clusters empty on duplicate points;
    // the reseed pass restores them
    let k_eff = p0.k().max(k).min(data.n());
    let opts = DriverOptions { allow_new: false, fixed_k: Some(k_eff), aux: None };
    let mut geom = VectorGeometry::new(data);
    Ok(run_single(
        &mut geom,
        p0,
        &lambda_zero(),
        max_iters,
        PointOrder::Fixed,
        0,
        true,
        &opts,
    ))
}

/// Norm used in the pyp-means objective; the printed objective uses the
/// unsquared norm, a squared variant is kept for comparison with dp-means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PypNorm {
    Unsquared,
    Squared,
}

/// The pyp-means objective Σ_c Σ_{i∈c} ‖x_i − μ_c‖ + (λ − θ·ln k)·k with
/// cluster means of the given partition.
pub fn pyp_objective(data: &VectorDataset, p: &Partition, lambda: f64, theta: f64, norm: PypNorm) -> f64 {
    let d = data.dim();
    let mut means = vec![0.0; p.k() * d];
    let mut counts = vec![0.0; p.k()];
    for i in 0..data.n() {
        let c = p.cluster_of(i);
        counts[c] += 1.0;
        for r in 0..d {
            means[c * d + r] += data.point(i)[r];
        }
    }
    for c in 0..p.k() {
        for r in 0..d {
            means[c * d + r] /= counts[c];
        }
    }
    let mut fit = 0.0;
    for i in 0..data.n() {
        let c = p.cluster_of(i);
        let sq: f64 =
            (0..d).map(|r| (data.point(i)[r] - means[c * d + r]).powi(2)).sum();
        fit += match norm {
            PypNorm::Unsquared => sq.sqrt(),
            PypNorm::Squared => sq,
        };
    }
    let k = p.k() as f64;
    fit + (lambda - k.ln() * theta) * k
}

/// The (λ − θ·ln k)·k penalty on its own.
fn pyp_penalty(k: usize, lambda: f64, theta: f64) -> f64 {
    let k = k as f64;
    (lambda - k.ln() * theta) * k
}

/// dp-means-style descent of the pyp-means objective: points move (or open a
/// new cluster) whenever that lowers the objective with means held fixed;
/// means then update to cluster averages. The mean update is not the exact
/// minimizer of the unsquared norm, so only the assignment phase is
/// guaranteed non-increasing; this matches the algorithm being compared.
pub fn pyp_means(
    data: &VectorDataset,
    lambda: f64,
    theta: f64,
    seed: u64,
    max_iters: usize,
    norm: PypNorm,
) -> Result<RunResult> {
    if lambda <= 0.0 {
        return Err(Error::InvalidInput("lambda must be positive".into()));
    }
    if theta < 0.0 {
        return Err(Error::InvalidInput("theta must be ≥ 0".into()));
    }
    let n = data.n();
    let d = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut p = Partition::single_cluster(n)?;
    let mut means: Vec<Vec<f64>> = vec![global_mean(data)];
    let dist = |x: &[f64], m: &[f64]| -> f64 {
        let sq: f64 = x.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
        match norm {
            PypNorm::Unsquared => sq.sqrt(),
            PypNorm::Squared => sq,
        }
    };

    let mut trace = vec![pyp_objective(data, &p, lambda, theta, norm)];
    let mut k_trace = vec![p.k()];
    let mut converged = false;
    let mut sweeps_used = 0;
    for _ in 0..max_iters {
        let mut moved = 0;
        for &i in &order {
            let current = p.cluster_of(i);
            let d_cur = dist(data.point(i), &means[current]);
            // objective delta for each candidate with means fixed; removing
            // a singleton source shrinks k and changes the penalty
            let k = p.k();
            let src_singleton = p.size_of(current) == 1;
            let removal_gain = if src_singleton {
                pyp_penalty(k - 1, lambda, theta) - pyp_penalty(k, lambda, theta)
            } else {
                0.0
            };
            let mut best_delta = 0.0;
            let mut best: Option<crate::partition::MoveTarget> = None;
            for c in 0..k {
                if c == current {
                    continue;
                }
                let delta = dist(data.point(i), &means[c]) - d_cur + removal_gain;
                if delta < best_delta {
                    best_delta = delta;
                    best = Some(crate::partition::MoveTarget::Existing(c));
                }
            }
            if !src_singleton {
                let delta =
                    (pyp_penalty(k + 1, lambda, theta) - pyp_penalty(k, lambda, theta)) - d_cur;
                if delta < best_delta {
                    best = Some(crate::partition::MoveTarget::New);
                }
            }
            if let Some(target) = best {
                let outcome = p.move_point(i, target);
                if let crate::partition::MoveOutcome::Moved { removed, created, .. } = outcome {
                    if created {
                        means.push(data.point(i).to_vec());
                    }
                    if let Some(c) = removed {
                        means.remove(c);
                    }
                }
                moved += 1;
            }
        }
        // mean update
        let mut sums = vec![vec![0.0; d]; p.k()];
        let mut counts = vec![0usize; p.k()];
        for i in 0..n {
            let c = p.cluster_of(i);
            counts[c] += 1;
            for r in 0..d {
                sums[c][r] += data.point(i)[r];
            }
        }
        for c in 0..p.k() {
            for r in 0..d {
                sums[c][r] /= counts[c] as f64;
            }
        }
        means = sums;
        sweeps_used += 1;
        trace.push(pyp_objective(data, &p, lambda, theta, norm));
        k_trace.push(p.k());
        if moved == 0 {
            converged = true;
            break;
        }
    }
    let final_objective = *trace.last().unwrap();
    Ok(RunResult {
        partition: p,
        objective_trace: trace,
        aux_trace: None,
        k_trace,
        sweeps_used,
        converged,
        seed,
        restart_used: 0,
        rho: None,
        reseeds: 0,
        audit: None,
        final_objective,
    })
}

fn global_mean(data: &VectorDataset) -> Vec<f64> {
    let d = data.dim();
    let mut mean = vec![0.0; d];
    for i in 0..data.n() {
        for r in 0..d {
            mean[r] += data.point(i)[r];
        }
    }
    for m in &mut mean {
        *m /= data.n() as f64;
    }
    mean
}
