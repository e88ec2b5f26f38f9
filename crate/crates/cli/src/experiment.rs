//! Parameter sweeps: grid runs over (λ, α, θ) with an optional
//! validation/clustering split and truth-guided cell selection.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use plcut_core::graphcuts::{self, RhoMode};
use plcut_core::{
    metrics, power_law_means, CutObjective, PYParams, Partition, PointOrder, RunResult,
    SolverConfig, VectorDataset, WeightedGraph,
};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::io;
use crate::output::ResultDoc;

fn default_max_sweeps() -> usize {
    100
}
fn default_restarts() -> usize {
    1
}
fn default_order() -> String {
    "fixed".into()
}
fn default_objective() -> String {
    "ncut".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSpec {
    pub path: PathBuf,
    /// CSV only: trailing label column is ground truth.
    #[serde(default)]
    pub has_labels: bool,
    /// CSV only: min-max normalize features to [0,1].
    #[serde(default)]
    pub normalize: bool,
    /// Graph only: ground-truth labels file.
    #[serde(default)]
    pub truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Grid {
    pub lambda: Vec<f64>,
    pub alpha: Vec<f64>,
    pub theta: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSection {
    #[serde(default = "default_max_sweeps")]
    pub max_sweeps: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_order")]
    pub order: String,
    /// Fixed PSD shift; omitted means auto.
    #[serde(default)]
    pub rho: Option<f64>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            max_sweeps: default_max_sweeps(),
            restarts: default_restarts(),
            order: default_order(),
            rho: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// "graph" or "vectors".
    pub mode: String,
    pub input: InputSpec,
    #[serde(default = "default_objective")]
    pub objective: String,
    pub grid: Grid,
    #[serde(default)]
    pub solver: SolverSection,
    /// Validation fraction (e.g. 0.3 for a 30/70 split); omitted runs on the
    /// full data.
    #[serde(default)]
    pub validation_split: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Cell {
    pub index: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub theta: f64,
}

enum Problem {
    Graph(WeightedGraph),
    Vectors(VectorDataset),
}

impl Problem {
    fn n(&self) -> usize {
        match self {
            Problem::Graph(g) => g.n(),
            Problem::Vectors(d) => d.n(),
        }
    }

    fn restrict(&self, rows: &[usize]) -> anyhow::Result<Problem> {
        Ok(match self {
            Problem::Graph(g) => Problem::Graph(g.induced_subgraph(rows)?),
            Problem::Vectors(d) => Problem::Vectors(d.subset(rows)?),
        })
    }
}

fn parse_objective(name: &str) -> anyhow::Result<CutObjective> {
    Ok(match name {
        "ncut" => CutObjective::Ncut,
        "rcut" => CutObjective::Rcut,
        "rassoc" => CutObjective::Rassoc,
        other => bail!("unknown objective {other:?}"),
    })
}

fn parse_order(name: &str) -> anyhow::Result<PointOrder> {
    Ok(match name {
        "fixed" => PointOrder::Fixed,
        "shuffled" => PointOrder::Shuffled,
        other => bail!("unknown point order {other:?}"),
    })
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())
            .with_context(|| format!("reading {}", path.as_ref().display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.grid.lambda.is_empty() || self.grid.alpha.is_empty() || self.grid.theta.is_empty()
        {
            bail!("grid axes must be nonempty");
        }
        if !self.input.path.exists() {
            bail!("input file {} does not exist", self.input.path.display());
        }
        if let Some(truth) = &self.input.truth {
            if !truth.exists() {
                bail!("truth file {} does not exist", truth.display());
            }
        }
        if let Some(frac) = self.validation_split {
            if !(0.0 < frac && frac < 1.0) {
                bail!("validation_split must be in (0, 1), got {frac}");
            }
        }
        parse_objective(&self.objective)?;
        parse_order(&self.solver.order)?;
        match self.mode.as_str() {
            "graph" | "vectors" => Ok(()),
            other => bail!("unknown mode {other:?}"),
        }
    }

    fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &lambda in &self.grid.lambda {
            for &alpha in &self.grid.alpha {
                for &theta in &self.grid.theta {
                    cells.push(Cell { index: cells.len(), lambda, alpha, theta });
                }
            }
        }
        cells
    }

    fn solver_config(&self, params: PYParams) -> anyhow::Result<SolverConfig> {
        Ok(SolverConfig {
            params,
            max_sweeps: self.solver.max_sweeps,
            point_order: parse_order(&self.solver.order)?,
            restarts: self.solver.restarts,
            seed: self.seed,
            audit: true,
        })
    }

    fn run_cell(&self, problem: &Problem, cell: &Cell) -> anyhow::Result<RunResult> {
        let params = PYParams::new(cell.alpha, cell.theta, cell.lambda)?;
        let config = self.solver_config(params)?;
        Ok(match problem {
            Problem::Vectors(data) => power_law_means(data, &config)?,
            Problem::Graph(g) => {
                let kind = parse_objective(&self.objective)?;
                let rho = self.solver.rho.map(RhoMode::Fixed).unwrap_or(RhoMode::Auto);
                let kp = graphcuts::build_kernel(g, kind, rho)?;
                graphcuts::power_law_cut_on(&kp, g, kind, params, &config)?
            }
        })
    }

    fn cell_config_echo(&self, cell: &Cell, stage: &str) -> serde_json::Value {
        json!({
            "experiment": {
                "mode": self.mode,
                "input": self.input.path.display().to_string(),
                "has_labels": self.input.has_labels,
                "normalize": self.input.normalize,
                "truth": self.input.truth.as_ref().map(|p| p.display().to_string()),
                "objective": self.objective,
                "validation_split": self.validation_split,
                "seed": self.seed,
            },
            "cell": { "index": cell.index, "lambda": cell.lambda, "alpha": cell.alpha, "theta": cell.theta },
            "stage": stage,
            "solver": {
                "max_sweeps": self.solver.max_sweeps,
                "restarts": self.solver.restarts,
                "order": self.solver.order,
                "rho": self.solver.rho,
                "lambda": cell.lambda,
                "alpha": cell.alpha,
                "theta": cell.theta,
                "seed": self.seed,
            },
        })
    }
}

struct CellOutcome {
    cell: Cell,
    k: usize,
    nmi: Option<f64>,
    objective: f64,
    result: RunResult,
}

/// Runs the sweep. With a validation split, the grid runs on the validation
/// part, the cell whose cluster count lands nearest the ground-truth k wins
/// (ties: higher validation NMI, then cell index), and the winner is re-run
/// on the clustering part. Cell results and a summary are written under
/// `out_dir`; the final run lands in `final.json`.
pub fn run_experiment(cfg: &ExperimentConfig) -> anyhow::Result<PathBuf> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;

    let (problem, truth): (Problem, Option<Partition>) = match cfg.mode.as_str() {
        "vectors" => {
            let (data, truth) = io::load_csv_vectors(&cfg.input.path, cfg.input.has_labels)?;
            let data = if cfg.input.normalize { data.normalized() } else { data };
            (Problem::Vectors(data), truth)
        }
        _ => {
            let g = io::load_edge_list(&cfg.input.path)?;
            let truth = cfg.input.truth.as_ref().map(io::load_labels).transpose()?;
            (Problem::Graph(g), truth)
        }
    };
    let cells = cfg.cells();
    let n = problem.n();

    // split indices by seed, then keep point order stable inside each part
    let (fit_problem, fit_truth, final_problem, final_truth) = match cfg.validation_split {
        Some(frac) => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            order.shuffle(&mut rng);
            let n_val = ((n as f64 * frac).round() as usize).clamp(1, n - 1);
            let mut val = order[..n_val].to_vec();
            let mut rest = order[n_val..].to_vec();
            val.sort_unstable();
            rest.sort_unstable();
            let restrict_truth = |t: &Partition, rows: &[usize]| -> anyhow::Result<Partition> {
                let labels: Vec<usize> = rows.iter().map(|&i| t.cluster_of(i)).collect();
                Ok(Partition::from_assignments(&labels)?)
            };
            let truth = truth
                .as_ref()
                .context("validation split requires ground-truth labels for cell selection")?;
            (
                problem.restrict(&val)?,
                Some(restrict_truth(truth, &val)?),
                problem.restrict(&rest)?,
                Some(restrict_truth(truth, &rest)?),
            )
        }
        None => {
            if cells.len() > 1 && truth.is_none() {
                bail!("a multi-cell sweep without a validation split still needs ground truth to select a cell");
            }
            let t = truth.clone();
            (problem, truth, Problem::Vectors(VectorDataset::new(vec![0.0], 1, 1)?), t)
        }
    };
    let split = cfg.validation_split.is_some();

    // run all cells on the fitting data
    let stage = if split { "validation" } else { "full" };
    let outcomes: anyhow::Result<Vec<CellOutcome>> = cells
        .par_iter()
        .map(|cell| {
            let result = cfg.run_cell(&fit_problem, cell)?;
            let nmi = fit_truth
                .as_ref()
                .map(|t| metrics::nmi(&result.partition, t))
                .transpose()?;
            Ok(CellOutcome {
                cell: *cell,
                k: result.partition.k(),
                nmi,
                objective: result.final_objective,
                result,
            })
        })
        .collect();
    let outcomes = outcomes?;

    for outcome in &outcomes {
        let doc = ResultDoc::new(
            "sweep cell",
            cfg.cell_config_echo(&outcome.cell, stage),
            &outcome.result,
            fit_truth.as_ref(),
        );
        doc.write(cfg.out_dir.join(format!("cell_{:04}.json", outcome.cell.index)))?;
    }

    // selection: cluster count nearest ground truth, NMI breaks ties
    let selected = if outcomes.len() == 1 {
        &outcomes[0]
    } else {
        let k_true = fit_truth.as_ref().expect("validated above").k();
        outcomes
            .iter()
            .min_by(|a, b| {
                let da = a.k.abs_diff(k_true);
                let db = b.k.abs_diff(k_true);
                da.cmp(&db)
                    .then_with(|| {
                        b.nmi
                            .unwrap_or(0.0)
                            .partial_cmp(&a.nmi.unwrap_or(0.0))
                            .unwrap()
                    })
                    .then(a.cell.index.cmp(&b.cell.index))
            })
            .expect("nonempty grid")
    };

    // final run: on the clustering part when split, otherwise reuse the
    // selected full-data run
    let final_path = cfg.out_dir.join("final.json");
    let (final_doc, final_k, final_nmi) = if split {
        let result = cfg.run_cell(&final_problem, &selected.cell)?;
        let nmi = final_truth
            .as_ref()
            .map(|t| metrics::nmi(&result.partition, t))
            .transpose()?;
        let doc = ResultDoc::new(
            "sweep final",
            cfg.cell_config_echo(&selected.cell, "clustering"),
            &result,
            final_truth.as_ref(),
        );
        (doc, result.partition.k(), nmi)
    } else {
        let doc = ResultDoc::new(
            "sweep final",
            cfg.cell_config_echo(&selected.cell, "full"),
            &selected.result,
            fit_truth.as_ref(),
        );
        (doc, selected.k, selected.nmi)
    };
    final_doc.write(&final_path)?;

    let summary = json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "command": "sweep run",
        "config": serde_json::to_value(cfg)?,
        "cells": outcomes.iter().map(|o| json!({
            "index": o.cell.index,
            "lambda": o.cell.lambda,
            "alpha": o.cell.alpha,
            "theta": o.cell.theta,
            "k": o.k,
            "nmi": o.nmi,
            "objective": o.objective,
            "file": format!("cell_{:04}.json", o.cell.index),
        })).collect::<Vec<_>>(),
        "selected_cell": selected.cell.index,
        "selection_rule": "min |k - k_true|, ties by higher validation NMI, then cell index",
        "final": { "file": "final.json", "k": final_k, "nmi": final_nmi },
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    io::atomic_write(cfg.out_dir.join("summary.json"), text.as_bytes())?;
    Ok(final_path)
}
