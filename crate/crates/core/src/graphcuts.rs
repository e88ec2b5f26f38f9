//! Graph-cut objectives, graph→kernel constructions, and the kernel-space
//! clustering driver.
//!
//! Minimizing weighted kernel k-means on the right kernel is equivalent (up
//! to a partition-independent constant at fixed k) to the corresponding
//! graph-cut objective:
//!
//! - normalized cut:      K = ρD⁻¹ + D⁻¹AD⁻¹, weights = degrees
//! - ratio association:   K = ρI + A,          weights = 1
//! - ratio cut:           K = ρI − (D − A),    weights = 1
//!
//! ρ shifts the kernel to positive semi-definite so kernel distances are
//! valid squared distances.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eppf::PYParams;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::kernel::{KernelGeometry, KernelProblem};
use crate::partition::Partition;
use crate::solver::{run_with_options, DriverOptions, RunResult, SolverConfig};

/// Dense kernels above this node count get the implicit representation.
const DENSE_LIMIT: usize = 5000;
/// Dense eigensolves above this node count fall back to safe spectral bounds.
const EIGEN_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutObjective {
    /// Σ_c cut(V_c, V∖V_c) / deg(V_c), minimized.
    Ncut,
    /// Σ_c cut(V_c, V∖V_c) / |V_c|, minimized.
    Rcut,
    /// Σ_c cut(V_c, V_c) / |V_c|, maximized (callers negate to minimize).
    Rassoc,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoMode {
    /// Smallest shift making the weighted kernel PSD (see [`psd_shift`]).
    Auto,
    Fixed(f64),
}

/// Σ_{i∈S, j∈T} A_ij. Sets may overlap; entries are counted once per
/// ordered pair, so cut(V, V) double-counts undirected edges and counts
/// self-loops once.
pub fn cut(g: &WeightedGraph, s: &[usize], t: &[usize]) -> f64 {
    let mut in_t = vec![false; g.n()];
    for &j in t {
        in_t[j] = true;
    }
    let mut total = 0.0;
    for &i in s {
        for (j, w) in g.neighbors(i) {
            if in_t[j] {
                total += w;
            }
        }
    }
    total
}

/// deg(S) = cut(S, V) = Σ_{i∈S} deg(i).
pub fn degree(g: &WeightedGraph, s: &[usize]) -> f64 {
    s.iter().map(|&i| g.degree(i)).sum()
}

/// Evaluates the chosen cut objective on a partition.
pub fn cut_objective(g: &WeightedGraph, p: &Partition, kind: CutObjective) -> Result<f64> {
    if p.n() != g.n() {
        return Err(Error::InvalidInput(format!(
            "partition over {} points but graph has {} nodes",
            p.n(),
            g.n()
        )));
    }
    // within-cluster association and degree per cluster in one edge pass
    let assign = p.assign();
    let mut assoc = vec![0.0; p.k()];
    let mut deg = vec![0.0; p.k()];
    for i in 0..g.n() {
        deg[assign[i]] += g.degree(i);
        for (j, w) in g.neighbors(i) {
            if assign[j] == assign[i] {
                assoc[assign[i]] += w;
            }
        }
    }
    let mut total = 0.0;
    for c in 0..p.k() {
        match kind {
            CutObjective::Ncut => {
                if deg[c] <= 0.0 {
                    return Err(Error::DegenerateCluster(format!(
                        "cluster {c} has zero degree; normalized cut undefined"
                    )));
                }
                total += (deg[c] - assoc[c]) / deg[c];
            }
            CutObjective::Rcut => total += (deg[c] - assoc[c]) / p.size_of(c) as f64,
            CutObjective::Rassoc => total += assoc[c] / p.size_of(c) as f64,
        }
    }
    Ok(total)
}

fn min_symmetric_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

fn max_symmetric_eigenvalue(m: DMatrix<f64>) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Minimal ρ (up to eigensolver accuracy) making the weighted kernel PSD,
/// found by a dense symmetric eigensolve.
pub fn psd_shift_dense(g: &WeightedGraph, kind: CutObjective) -> Result<f64> {
    let n = g.n();
    let shift = match kind {
        CutObjective::Ncut => {
            // weighted kernel D^{1/2} K D^{1/2} = ρI + D^{-1/2} A D^{-1/2}
            for i in 0..n {
                if g.degree(i) <= 0.0 {
                    return Err(Error::ZeroDegreeNode(i));
                }
            }
            let m = DMatrix::from_fn(n, n, |i, j| {
                g.weight(i, j) / (g.degree(i) * g.degree(j)).sqrt()
            });
            -min_symmetric_eigenvalue(m)
        }
        CutObjective::Rassoc => {
            let m = DMatrix::from_fn(n, n, |i, j| g.weight(i, j));
            -min_symmetric_eigenvalue(m)
        }
        CutObjective::Rcut => {
            // K = ρI − L is PSD iff ρ ≥ λ_max(L)
            let m = DMatrix::from_fn(n, n, |i, j| {
                let l = if i == j { g.degree(i) } else { 0.0 };
                l - g.weight(i, j)
            });
            max_symmetric_eigenvalue(m)
        }
    };
    Ok(shift.max(0.0))
}

/// ρ policy: exact dense eigensolve at desk scale, cheap safe bounds above.
/// For normalized cut the normalized adjacency spectrum lies in [−1, 1], so
/// 1.0 is always sufficient; the ratio objectives use Gershgorin bounds.
pub fn psd_shift(g: &WeightedGraph, kind: CutObjective) -> Result<f64> {
    if g.n() <= EIGEN_LIMIT {
        return psd_shift_dense(g, kind);
    }
    Ok(match kind {
        CutObjective::Ncut => 1.0,
        CutObjective::Rassoc => {
            let mut bound: f64 = 0.0;
            for i in 0..g.n() {
                let off: f64 = g.neighbors(i).filter(|&(j, _)| j != i).map(|(_, w)| w).sum();
                bound = bound.max(off - g.weight(i, i));
            }
            bound
        }
        CutObjective::Rcut => {
            let mut bound: f64 = 0.0;
            for i in 0..g.n() {
                bound = bound.max(2.0 * (g.degree(i) - g.weight(i, i)));
            }
            bound
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStorageMode {
    Auto,
    Dense,
    Implicit,
}

/// Builds the kernel problem for a cut objective. `rho` defaults to the
/// minimal PSD shift; the value actually used is recorded on the problem
/// (and surfaces in run results).
pub fn build_kernel(g: &WeightedGraph, kind: CutObjective, rho: RhoMode) -> Result<KernelProblem> {
    build_kernel_with_storage(g, kind, rho, KernelStorageMode::Auto)
}

pub fn build_kernel_with_storage(
    g: &WeightedGraph,
    kind: CutObjective,
    rho: RhoMode,
    storage: KernelStorageMode,
) -> Result<KernelProblem> {
    let n = g.n();
    if kind == CutObjective::Ncut {
        for i in 0..n {
            if g.degree(i) <= 0.0 {
                return Err(Error::ZeroDegreeNode(i));
            }
        }
    }
    let rho = match rho {
        RhoMode::Fixed(r) => r,
        RhoMode::Auto => psd_shift(g, kind)?,
    };
    let (scale, diag, weights): (Vec<f64>, Vec<f64>, Vec<f64>) = match kind {
        CutObjective::Ncut => (
            (0..n).map(|i| 1.0 / g.degree(i)).collect(),
            (0..n).map(|i| rho / g.degree(i)).collect(),
            g.degrees().to_vec(),
        ),
        CutObjective::Rassoc => (vec![1.0; n], vec![rho; n], vec![1.0; n]),
        CutObjective::Rcut => {
            (vec![1.0; n], (0..n).map(|i| rho - g.degree(i)).collect(), vec![1.0; n])
        }
    };
    let dense = match storage {
        KernelStorageMode::Dense => true,
        KernelStorageMode::Implicit => false,
        KernelStorageMode::Auto => n <= DENSE_LIMIT,
    };
    if dense {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = diag[i];
            for (j, a) in g.neighbors(i) {
                data[i * n + j] += scale[i] * scale[j] * a;
            }
        }
        KernelProblem::dense(n, data, weights, rho)
    } else {
        Ok(KernelProblem::implicit(g.clone(), scale, diag, weights, rho))
    }
}

/// Regularized graph clustering: builds the kernel, then runs the solver in
/// kernel space. The result's `aux_trace` carries the pure graph-cut
/// objective per sweep and `rho` records the shift used.
pub fn power_law_cut(
    g: &WeightedGraph,
    kind: CutObjective,
    params: PYParams,
    config: &SolverConfig,
) -> Result<RunResult> {
    let kp = build_kernel(g, kind, RhoMode::Auto)?;
    power_law_cut_on(&kp, g, kind, params, config)
}

/// Same as [`power_law_cut`] but with a prebuilt kernel (callers controlling
/// ρ or storage).
pub fn power_law_cut_on(
    kp: &KernelProblem,
    g: &WeightedGraph,
    kind: CutObjective,
    params: PYParams,
    config: &SolverConfig,
) -> Result<RunResult> {
    let config = SolverConfig { params, ..*config };
    let aux = |p: &Partition| {
        cut_objective(g, p, kind).expect("positive degrees ensured at kernel construction")
    };
    let opts = DriverOptions { aux: Some(&aux), ..DriverOptions::default() };
    let mut result = run_with_options(|| KernelGeometry::new(kp), g.n(), &config, &opts)?;
    result.rho = Some(kp.rho());
    Ok(result)
}
