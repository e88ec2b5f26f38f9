//! Clustering evaluation: normalized mutual information, size histograms,
//! and objective-trace audits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::solver::RunResult;

/// Normalized mutual information I(a;b) / √(H(a)·H(b)), natural logs.
///
/// Two single-cluster partitions agree perfectly (defined as 1); if exactly
/// one side is a single cluster the mutual information is 0 and so is the
/// score. Always in [0, 1].
pub fn nmi(a: &Partition, b: &Partition) -> Result<f64> {
    if a.n() != b.n() {
        return Err(Error::InvalidInput(format!(
            "partition sizes differ: {} vs {}",
            a.n(),
            b.n()
        )));
    }
    // canonical argument order makes the float summation identical for
    // nmi(a, b) and nmi(b, a), so symmetry is exact
    let (a, b) = if b.assign() < a.assign() { (b, a) } else { (a, b) };
    let n = a.n() as f64;
    let (ka, kb) = (a.k(), b.k());
    let mut joint = vec![0usize; ka * kb];
    for i in 0..a.n() {
        joint[a.cluster_of(i) * kb + b.cluster_of(i)] += 1;
    }
    let entropy = |sizes: &[usize]| -> f64 {
        sizes
            .iter()
            .map(|&s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let ha = entropy(a.sizes());
    let hb = entropy(b.sizes());
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for ca in 0..ka {
        for cb in 0..kb {
            let c = joint[ca * kb + cb];
            if c == 0 {
                continue;
            }
            let p = c as f64 / n;
            mi += p * ((n * c as f64).ln() - ((a.size_of(ca) * b.size_of(cb)) as f64).ln());
        }
    }
    Ok((mi / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Cluster sizes in descending order with 1-based (rank, size) pairs for
/// log-log rank-size plots.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SizeHistogram {
    pub sizes_desc: Vec<usize>,
    pub rank_size: Vec<(usize, usize)>,
}

pub fn size_histogram(p: &Partition) -> SizeHistogram {
    let mut sizes_desc = p.sizes().to_vec();
    sizes_desc.sort_unstable_by(|a, b| b.cmp(a));
    let rank_size = sizes_desc.iter().enumerate().map(|(i, &s)| (i + 1, s)).collect();
    SizeHistogram { sizes_desc, rank_size }
}

/// Relative slack when checking that a trace never increases; floating-point
/// noise at this scale is not a violation.
pub const MONOTONICITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub monotone: bool,
    /// First (index, increase) where the trace rose beyond tolerance.
    pub first_violation: Option<(usize, f64)>,
    /// Last trace entry (the solver's incremental final objective).
    pub traced_objective: f64,
    /// The same objective recomputed from scratch for the final partition.
    pub recomputed_objective: f64,
    pub discrepancy: f64,
}

/// Checks a run's objective trace for monotone descent and recomputes the
/// final objective from scratch through the supplied evaluator.
pub fn audit_objective(
    result: &RunResult,
    recompute: impl FnOnce(&Partition) -> f64,
) -> Result<AuditReport> {
    let trace = &result.objective_trace;
    if trace.is_empty() {
        return Err(Error::InvalidInput("objective trace is empty".into()));
    }
    let mut first_violation = None;
    for (i, w) in trace.windows(2).enumerate() {
        let slack = MONOTONICITY_TOLERANCE * (1.0 + w[0].abs());
        if w[1] > w[0] + slack {
            first_violation = Some((i + 1, w[1] - w[0]));
            break;
        }
    }
    let traced = *trace.last().unwrap();
    let recomputed = recompute(&result.partition);
    Ok(AuditReport {
        monotone: first_violation.is_none(),
        first_violation,
        traced_objective: traced,
        recomputed_objective: recomputed,
        discrepancy: (traced - recomputed).abs(),
    })
}
