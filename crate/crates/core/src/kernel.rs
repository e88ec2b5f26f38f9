//! Kernel matrices and the kernel-space geometry oracle.
//!
//! A [`KernelProblem`] is the solver's whole view of a graph clustering
//! instance: a symmetric kernel accessor plus per-point weights. Desk-scale
//! problems materialize the kernel densely; larger ones keep it implicit as
//! diagonal-plus-scaled-adjacency and stream rows out of the sparse graph.

use crate::error::{Error, Result};
use crate::geometry::GeometryOracle;
use crate::graph::WeightedGraph;
use crate::partition::{MoveOutcome, Partition};

const NO_BUCKET: usize = usize::MAX;

enum Storage {
    Dense { n: usize, data: Vec<f64> },
    /// K_ij = diag_i·[i=j] + scale_i·scale_j·A_ij
    Implicit { graph: WeightedGraph, scale: Vec<f64>, diag: Vec<f64> },
}

pub struct KernelProblem {
    storage: Storage,
    weights: Vec<f64>,
    rho: f64,
}

impl KernelProblem {
    /// Wraps an explicit symmetric matrix (row-major, n×n).
    pub fn dense(n: usize, data: Vec<f64>, weights: Vec<f64>, rho: f64) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidInput("kernel matrix has wrong size".into()));
        }
        if weights.len() != n || weights.iter().any(|w| *w <= 0.0 || !w.is_finite()) {
            return Err(Error::InvalidInput("kernel weights must be positive".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if (a - b).abs() > 1e-9 * (1.0 + a.abs().max(b.abs())) {
                    return Err(Error::InvalidInput(format!(
                        "kernel not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        Ok(Self { storage: Storage::Dense { n, data }, weights, rho })
    }

    pub(crate) fn implicit(
        graph: WeightedGraph,
        scale: Vec<f64>,
        diag: Vec<f64>,
        weights: Vec<f64>,
        rho: f64,
    ) -> Self {
        Self { storage: Storage::Implicit { graph, scale, diag }, weights, rho }
    }

    pub fn n(&self) -> usize {
        match &self.storage {
            Storage::Dense { n, .. } => *n,
            Storage::Implicit { graph, .. } => graph.n(),
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    /// The PSD shift baked into this kernel.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            Storage::Dense { n, data } => data[i * n + j],
            Storage::Implicit { graph, scale, diag } => {
                let off = scale[i] * scale[j] * graph.weight(i, j);
                if i == j {
                    diag[i] + off
                } else {
                    off
                }
            }
        }
    }

    /// Visits every structurally nonzero entry of row `i` exactly once
    /// (dense rows visit all columns).
    pub fn for_each_row_entry(&self, i: usize, mut f: impl FnMut(usize, f64)) {
        match &self.storage {
            Storage::Dense { n, data } => {
                for (j, &v) in data[i * n..(i + 1) * n].iter().enumerate() {
                    f(j, v);
                }
            }
            Storage::Implicit { graph, scale, diag } => {
                let mut saw_diag = false;
                for (j, a) in graph.neighbors(i) {
                    let mut v = scale[i] * scale[j] * a;
                    if j == i {
                        v += diag[i];
                        saw_diag = true;
                    }
                    f(j, v);
                }
                if !saw_diag {
                    f(i, diag[i]);
                }
            }
        }
    }
}

/// w_i·‖φ(x_i) − μ_c‖² for cluster `c` of `p`, expanded through the kernel:
///
/// ```text
/// w_i (K_ii − 2 Σ_{j∈c} w_j K_ij / s_c + Σ_{j,l∈c} w_j w_l K_jl / s_c²)
/// ```
///
/// with s_c the cluster weight total. Standalone evaluation; the solver path
/// caches the quadratic term per cluster (see [`KernelGeometry`]).
pub fn kernel_point_to_mean_sq(kp: &KernelProblem, p: &Partition, i: usize, c: usize) -> f64 {
    assert!(p.size_of(c) >= 1, "cluster {c} is empty");
    let assign = p.assign();
    let mut t = 0.0;
    kp.for_each_row_entry(i, |j, k| {
        if assign[j] == c {
            t += kp.weight(j) * k;
        }
    });
    let mut s = 0.0;
    let mut q = 0.0;
    for j in 0..p.n() {
        if assign[j] != c {
            continue;
        }
        s += kp.weight(j);
        let mut row = 0.0;
        kp.for_each_row_entry(j, |l, k| {
            if assign[l] == c {
                row += kp.weight(l) * k;
            }
        });
        q += kp.weight(j) * row;
    }
    kp.weight(i) * (kp.entry(i, i) - 2.0 * t / s + q / (s * s))
}

/// Σ_i w_i‖φ(x_i) − μ_{z_i}‖² with means implied by the current membership.
pub fn kernel_fit_objective(kp: &KernelProblem, p: &Partition) -> f64 {
    let assign = p.assign();
    let mut s = vec![0.0; p.k()];
    let mut q = vec![0.0; p.k()];
    let mut trace = 0.0;
    for i in 0..p.n() {
        let c = assign[i];
        let w = kp.weight(i);
        s[c] += w;
        trace += w * kp.entry(i, i);
        let mut row = 0.0;
        kp.for_each_row_entry(i, |j, k| {
            if assign[j] == c {
                row += kp.weight(j) * k;
            }
        });
        q[c] += w * row;
    }
    trace - (0..p.k()).map(|c| q[c] / s[c]).sum::<f64>()
}

/// Kernel-space [`GeometryOracle`]. "Means" are membership snapshots frozen
/// at the last refresh: per-cluster weight totals `s`, quadratic aggregates
/// `q`, and the per-point bucket used when streaming a kernel row. Clusters
/// founded mid-sweep get a singleton snapshot holding the founding point
/// (which also keeps contributing to its old snapshot, exactly like a stale
/// explicit mean would).
pub struct KernelGeometry<'a> {
    kp: &'a KernelProblem,
    snap_assign: Vec<usize>,
    founders: Vec<(usize, usize)>,
    s: Vec<f64>,
    q: Vec<f64>,
    t_buf: Vec<f64>,
    cached_point: Option<usize>,
}

impl<'a> KernelGeometry<'a> {
    pub fn new(kp: &'a KernelProblem) -> Self {
        Self {
            kp,
            snap_assign: vec![NO_BUCKET; kp.n()],
            founders: Vec::new(),
            s: Vec::new(),
            q: Vec::new(),
            t_buf: Vec::new(),
            cached_point: None,
        }
    }

    fn fill_t(&mut self, i: usize) {
        if self.cached_point == Some(i) {
            return;
        }
        self.t_buf.clear();
        self.t_buf.resize(self.s.len(), 0.0);
        let kp = self.kp;
        let snap = &self.snap_assign;
        let t = &mut self.t_buf;
        kp.for_each_row_entry(i, |j, k| {
            let b = snap[j];
            if b != NO_BUCKET {
                t[b] += kp.weight(j) * k;
            }
        });
        for &(f, cf) in &self.founders {
            t[cf] += kp.weight(f) * kp.entry(i, f);
        }
        self.cached_point = Some(i);
    }
}

impl GeometryOracle for KernelGeometry<'_> {
    fn len(&self) -> usize {
        self.kp.n()
    }

    fn weight(&self, i: usize) -> f64 {
        self.kp.weight(i)
    }

    fn point_to_mean_sq(&mut self, i: usize, c: usize) -> f64 {
        self.fill_t(i);
        let s = self.s[c];
        let w = self.kp.weight(i);
        w * (self.kp.entry(i, i) - 2.0 * self.t_buf[c] / s + self.q[c] / (s * s))
    }

    fn note_move(&mut self, i: usize, outcome: &MoveOutcome) {
        let MoveOutcome::Moved { removed, created, .. } = outcome else {
            return;
        };
        if let Some(c) = *removed {
            self.s.remove(c);
            self.q.remove(c);
            for b in &mut self.snap_assign {
                if *b == c {
                    *b = NO_BUCKET;
                } else if *b != NO_BUCKET && *b > c {
                    *b -= 1;
                }
            }
            self.founders.retain(|&(_, cf)| cf != c);
            for (_, cf) in &mut self.founders {
                if *cf > c {
                    *cf -= 1;
                }
            }
        }
        if *created {
            let w = self.kp.weight(i);
            self.founders.push((i, self.s.len()));
            self.s.push(w);
            self.q.push(w * w * self.kp.entry(i, i));
        }
        self.cached_point = None;
    }

    fn refresh(&mut self, p: &Partition) {
        self.snap_assign.clear();
        self.snap_assign.extend_from_slice(p.assign());
        self.founders.clear();
        self.s.clear();
        self.s.resize(p.k(), 0.0);
        self.q.clear();
        self.q.resize(p.k(), 0.0);
        let kp = self.kp;
        for i in 0..p.n() {
            let c = p.cluster_of(i);
            let w = kp.weight(i);
            self.s[c] += w;
            let mut row = 0.0;
            let assign = p.assign();
            kp.for_each_row_entry(i, |j, k| {
                if assign[j] == c {
                    row += kp.weight(j) * k;
                }
            });
            self.q[c] += w * row;
        }
        self.cached_point = None;
    }

    fn fit_snapshot(&mut self, p: &Partition) -> f64 {
        (0..p.n()).map(|i| self.point_to_mean_sq(i, p.cluster_of(i))).sum()
    }
}
