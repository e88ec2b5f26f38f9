//! The result JSON document written by every clustering subcommand.
//!
//! Schema (version 1): command name, full echo of the effective
//! configuration (defaults included), run outcome, traces, metrics, size
//! histogram, convention tags, and a timestamp. Everything except the
//! timestamp is deterministic for a fixed config and seed.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use plcut_core::metrics::{size_histogram, SizeHistogram};
use plcut_core::{metrics, Partition, RunResult};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::io::{atomic_write, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct MetricsDoc {
    pub nmi: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Conventions {
    /// NMI is normalized by the geometric mean of the two entropies.
    pub nmi_normalization: String,
    /// Ratio association is a maximization objective; traces report it raw.
    pub rassoc_sign: String,
    /// How sweep cells are ranked against ground truth.
    pub validation_rule: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            nmi_normalization: "I(a;b)/sqrt(H(a)*H(b)), natural log".into(),
            rassoc_sign: "maximized; negate for minimization".into(),
            validation_rule: "min |k - k_true|, ties by higher validation NMI, then cell index"
                .into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ResultDoc {
    pub schema_version: u32,
    pub command: String,
    /// Effective options, defaults included.
    pub config: Value,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub rho: Option<f64>,
    pub converged: bool,
    pub sweeps_used: usize,
    pub restart_used: usize,
    pub reseeds: usize,
    pub objective_final: f64,
    pub objective_trace: Vec<f64>,
    /// Pure graph-cut objective per sweep (kernel runs only).
    pub cut_trace: Option<Vec<f64>>,
    pub k_trace: Vec<usize>,
    /// Largest incremental-vs-recomputed discrepancy seen by the solver.
    pub max_drift: Option<f64>,
    pub assignments: Vec<usize>,
    pub sizes: Vec<usize>,
    pub metrics: MetricsDoc,
    pub size_histogram: SizeHistogram,
    pub conventions: Conventions,
    /// Unix seconds; the only nondeterministic field.
    pub timestamp: u64,
}

impl ResultDoc {
    pub fn new(command: &str, config: Value, result: &RunResult, truth: Option<&Partition>) -> Self {
        let nmi = truth.map(|t| metrics::nmi(&result.partition, t).expect("matching lengths"));
        Self {
            schema_version: SCHEMA_VERSION,
            command: command.to_string(),
            config,
            n: result.partition.n(),
            k: result.partition.k(),
            seed: result.seed,
            rho: result.rho,
            converged: result.converged,
            sweeps_used: result.sweeps_used,
            restart_used: result.restart_used,
            reseeds: result.reseeds,
            objective_final: result.final_objective,
            objective_trace: result.objective_trace.clone(),
            cut_trace: result.aux_trace.clone(),
            k_trace: result.k_trace.clone(),
            max_drift: result.audit.as_ref().map(|a| a.max_drift),
            assignments: result.partition.assign().to_vec(),
            sizes: result.partition.sizes().to_vec(),
            metrics: MetricsDoc { nmi },
            size_histogram: size_histogram(&result.partition),
            conventions: Conventions::default(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        // traces must stay JSON-clean: forbidden moves never reach them
        debug_assert!(self.objective_trace.iter().all(|v| v.is_finite()));
        let mut text = serde_json::to_string_pretty(self).expect("serializable document");
        text.push('\n');
        atomic_write(path, text.as_bytes())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        serde_json::from_str(&text)
            .map_err(|e| crate::io::IoError::Invalid(format!("bad result JSON: {e}")))
    }

    pub fn partition(&self) -> Result<Partition> {
        Ok(Partition::from_assignments(&self.assignments)?)
    }
}
