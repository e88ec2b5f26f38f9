//! Subcommand argument structs and their implementations.

use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use plcut_core::baselines::{self, Init, PypNorm};
use plcut_core::datagen::{self, SbmSpec, Sparsify};
use plcut_core::graphcuts::{self, RhoMode};
use plcut_core::solver::vector_objective;
use plcut_core::{
    kernel_fit_objective, log_eppf, metrics, power_law_means, CutObjective, PYParams, Partition,
    PointOrder, RunResult, SolverConfig, VectorDataset, WeightedGraph,
};
use serde_json::{json, Value};

use crate::io;
use crate::output::ResultDoc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Ncut,
    Rcut,
    Rassoc,
}

impl From<ObjectiveArg> for CutObjective {
    fn from(o: ObjectiveArg) -> Self {
        match o {
            ObjectiveArg::Ncut => CutObjective::Ncut,
            ObjectiveArg::Rcut => CutObjective::Rcut,
            ObjectiveArg::Rassoc => CutObjective::Rassoc,
        }
    }
}

impl ObjectiveArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveArg::Ncut => "ncut",
            ObjectiveArg::Rcut => "rcut",
            ObjectiveArg::Rassoc => "rassoc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Fixed,
    Shuffled,
}

impl From<OrderArg> for PointOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Fixed => PointOrder::Fixed,
            OrderArg::Shuffled => PointOrder::Shuffled,
        }
    }
}

impl OrderArg {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderArg::Fixed => "fixed",
            OrderArg::Shuffled => "shuffled",
        }
    }
}

/// `auto` or an explicit nonnegative value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOr {
    Auto,
    Value(f64),
}

impl FromStr for AutoOr {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AutoOr::Auto);
        }
        s.parse::<f64>().map(AutoOr::Value).map_err(|_| format!("expected 'auto' or a number, got {s:?}"))
    }
}

impl AutoOr {
    fn describe(&self) -> Value {
        match self {
            AutoOr::Auto => json!("auto"),
            AutoOr::Value(v) => json!(v),
        }
    }
}

/// `none`, `knn:K`, or `eps:T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsifyArg(pub Sparsify);

impl FromStr for SparsifyArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(SparsifyArg(Sparsify::None));
        }
        if let Some(k) = s.strip_prefix("knn:") {
            let k = k.parse::<usize>().map_err(|_| format!("bad knn count in {s:?}"))?;
            return Ok(SparsifyArg(Sparsify::Knn(k)));
        }
        if let Some(t) = s.strip_prefix("eps:") {
            let t = t.parse::<f64>().map_err(|_| format!("bad eps threshold in {s:?}"))?;
            return Ok(SparsifyArg(Sparsify::Eps(t)));
        }
        Err(format!("expected none, knn:K or eps:T, got {s:?}"))
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Regularizer trade-off λ.
    #[arg(long)]
    pub lambda: f64,
    /// Concentration α.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Discount θ in [0, 1).
    #[arg(long, default_value_t = 0.2)]
    pub theta: f64,
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 1)]
    pub restarts: usize,
    /// Point visit order within a sweep.
    #[arg(long, value_enum, default_value_t = OrderArg::Fixed)]
    pub order: OrderArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SolverArgs {
    fn params(&self) -> anyhow::Result<PYParams> {
        Ok(PYParams::new(self.alpha, self.theta, self.lambda)?)
    }

    fn config(&self, params: PYParams) -> SolverConfig {
        SolverConfig {
            params,
            max_sweeps: self.max_sweeps,
            point_order: self.order.into(),
            restarts: self.restarts,
            seed: self.seed,
            audit: true,
        }
    }

    fn describe(&self) -> Value {
        json!({
            "lambda": self.lambda,
            "alpha": self.alpha,
            "theta": self.theta,
            "max_sweeps": self.max_sweeps,
            "restarts": self.restarts,
            "order": self.order.as_str(),
            "seed": self.seed,
        })
    }
}

#[derive(Debug, Args)]
pub struct SynthSbmArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.2)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.3)]
    pub diag_mean: f64,
    #[arg(long, default_value_t = 0.001)]
    pub diag_var: f64,
    #[arg(long, default_value_t = 0.01)]
    pub offdiag_mean: f64,
    #[arg(long, default_value_t = 0.001)]
    pub offdiag_var: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_graph: PathBuf,
    #[arg(long)]
    pub out_labels: PathBuf,
}

pub fn synth_pycrp_sbm(args: &SynthSbmArgs) -> anyhow::Result<()> {
    let spec = SbmSpec {
        n: args.n,
        alpha: args.alpha,
        theta: args.theta,
        diag: (args.diag_mean, args.diag_var),
        offdiag: (args.offdiag_mean, args.offdiag_var),
        seed: args.seed,
    };
    let (graph, labels) = datagen::sample_pycrp_sbm(&spec)?;
    io::save_edge_list(&graph, &args.out_graph)?;
    io::save_labels(&labels, &args.out_labels)?;
    println!(
        "wrote graph ({} nodes, {} edges) to {} and {} true clusters to {}",
        graph.n(),
        graph.undirected_edges().len(),
        args.out_graph.display(),
        labels.k(),
        args.out_labels.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct SynthBlobsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.05)]
    pub blob_std: f64,
    #[arg(long, default_value_t = 0.0)]
    pub box_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub box_max: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Omit the trailing label column.
    #[arg(long)]
    pub no_labels: bool,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn synth_blobs(args: &SynthBlobsArgs) -> anyhow::Result<()> {
    let (data, labels) = datagen::sample_power_law_blobs(
        args.n,
        args.dim,
        args.alpha,
        args.theta,
        args.blob_std,
        (args.box_min, args.box_max),
        args.seed,
    )?;
    let labels_ref = (!args.no_labels).then_some(&labels);
    io::save_csv_vectors(&data, labels_ref, &args.out)?;
    println!(
        "wrote {} points in {} clusters to {}",
        data.n(),
        labels.k(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct FromVectorsArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Input CSV carries a trailing label column.
    #[arg(long)]
    pub has_labels: bool,
    /// Min-max normalize features to [0,1] first.
    #[arg(long)]
    pub normalize: bool,
    /// Gaussian bandwidth, or `auto` for the median pairwise distance.
    #[arg(long, default_value = "auto")]
    pub sigma: AutoOr,
    #[arg(long, default_value = "none")]
    pub sparsify: SparsifyArg,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the label column (if any) to this path.
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
}

pub fn graph_from_vectors(args: &FromVectorsArgs) -> anyhow::Result<()> {
    let (data, truth) = io::load_csv_vectors(&args.input, args.has_labels)?;
    let data = if args.normalize { data.normalized() } else { data };
    let sigma = match args.sigma {
        AutoOr::Value(v) => v,
        AutoOr::Auto => datagen::median_pairwise_distance(&data),
    };
    let graph = datagen::gaussian_similarity_graph(&data, sigma, args.sparsify.0)?;
    io::save_edge_list(&graph, &args.out)?;
    if let (Some(path), Some(truth)) = (&args.out_labels, &truth) {
        io::save_labels(truth, path)?;
    }
    println!(
        "wrote similarity graph ({} nodes, {} edges, sigma {sigma}) to {}",
        graph.n(),
        graph.undirected_edges().len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct ClusterGraphArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Ncut)]
    pub objective: ObjectiveArg,
    /// PSD shift, or `auto` for the minimal value.
    #[arg(long, default_value = "auto")]
    pub rho: AutoOr,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Ground-truth labels for NMI reporting.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Also write rank-size pairs as TSV.
    #[arg(long)]
    pub size_tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cluster_graph(args: &ClusterGraphArgs) -> anyhow::Result<()> {
    let graph = io::load_edge_list(&args.input)?;
    let truth = args.truth.as_ref().map(io::load_labels).transpose()?;
    let params = args.solver.params()?;
    let config = args.solver.config(params);
    let kind: CutObjective = args.objective.into();
    let rho_mode = match args.rho {
        AutoOr::Auto => RhoMode::Auto,
        AutoOr::Value(v) => RhoMode::Fixed(v),
    };
    let kp = graphcuts::build_kernel(&graph, kind, rho_mode)?;
    let result = graphcuts::power_law_cut_on(&kp, &graph, kind, params, &config)?;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "mode": "graph",
        "objective": args.objective.as_str(),
        "rho": args.rho.describe(),
        "solver": args.solver.describe(),
        "truth": args.truth.as_ref().map(|p| p.display().to_string()),
    });
    finish("cluster graph", config_echo, &result, truth.as_ref(), &args.out, &args.size_tsv)
}

#[derive(Debug, Args)]
pub struct ClusterVectorsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long)]
    pub normalize: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub size_tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn cluster_vectors(args: &ClusterVectorsArgs) -> anyhow::Result<()> {
    let (data, truth) = io::load_csv_vectors(&args.input, args.has_labels)?;
    let data = if args.normalize { data.normalized() } else { data };
    let params = args.solver.params()?;
    let config = args.solver.config(params);
    let result = power_law_means(&data, &config)?;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "mode": "vectors",
        "has_labels": args.has_labels,
        "normalize": args.normalize,
        "solver": args.solver.describe(),
    });
    finish("cluster vectors", config_echo, &result, truth.as_ref(), &args.out, &args.size_tsv)
}

#[derive(Debug, Args)]
pub struct BaselineKkmArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Ncut)]
    pub objective: ObjectiveArg,
    #[arg(long, default_value = "auto")]
    pub rho: AutoOr,
    /// Number of clusters (fixed).
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub size_tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn baseline_kkm(args: &BaselineKkmArgs) -> anyhow::Result<()> {
    let graph = io::load_edge_list(&args.input)?;
    let truth = args.truth.as_ref().map(io::load_labels).transpose()?;
    let rho_mode = match args.rho {
        AutoOr::Auto => RhoMode::Auto,
        AutoOr::Value(v) => RhoMode::Fixed(v),
    };
    let kp = graphcuts::build_kernel(&graph, args.objective.into(), rho_mode)?;
    let mut result =
        baselines::weighted_kernel_kmeans(&kp, args.k, Init::Seed(args.seed), args.max_sweeps)?;
    result.seed = args.seed;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "mode": "graph",
        "objective": args.objective.as_str(),
        "rho": args.rho.describe(),
        "k": args.k,
        "max_sweeps": args.max_sweeps,
        "seed": args.seed,
        "truth": args.truth.as_ref().map(|p| p.display().to_string()),
    });
    finish("baseline kkm", config_echo, &result, truth.as_ref(), &args.out, &args.size_tsv)
}

#[derive(Debug, Args)]
pub struct BaselineKmeansArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub size_tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn baseline_kmeans(args: &BaselineKmeansArgs) -> anyhow::Result<()> {
    let (data, truth) = io::load_csv_vectors(&args.input, args.has_labels)?;
    let data = if args.normalize { data.normalized() } else { data };
    let mut result = baselines::kmeans(&data, args.k, Init::Seed(args.seed), args.max_iters)?;
    result.seed = args.seed;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "mode": "vectors",
        "has_labels": args.has_labels,
        "normalize": args.normalize,
        "k": args.k,
        "max_iters": args.max_iters,
        "seed": args.seed,
    });
    finish("baseline kmeans", config_echo, &result, truth.as_ref(), &args.out, &args.size_tsv)
}

#[derive(Debug, Args)]
pub struct BaselinePypArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub has_labels: bool,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta: f64,
    /// Use squared distances (dp-means style) instead of the printed norm.
    #[arg(long)]
    pub squared: bool,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub size_tsv: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn baseline_pyp(args: &BaselinePypArgs) -> anyhow::Result<()> {
    let (data, truth) = io::load_csv_vectors(&args.input, args.has_labels)?;
    let data = if args.normalize { data.normalized() } else { data };
    let norm = if args.squared { PypNorm::Squared } else { PypNorm::Unsquared };
    let result =
        baselines::pyp_means(&data, args.lambda, args.theta, args.seed, args.max_iters, norm)?;
    let config_echo = json!({
        "input": args.input.display().to_string(),
        "mode": "vectors",
        "has_labels": args.has_labels,
        "normalize": args.normalize,
        "lambda": args.lambda,
        "theta": args.theta,
        "squared": args.squared,
        "max_iters": args.max_iters,
        "seed": args.seed,
    });
    finish("baseline pyp", config_echo, &result, truth.as_ref(), &args.out, &args.size_tsv)
}

fn finish(
    command: &str,
    config_echo: Value,
    result: &RunResult,
    truth: Option<&Partition>,
    out: &PathBuf,
    size_tsv: &Option<PathBuf>,
) -> anyhow::Result<()> {
    let doc = ResultDoc::new(command, config_echo, result, truth);
    doc.write(out)?;
    if let Some(tsv) = size_tsv {
        io::save_rank_size_tsv(&doc.size_histogram, tsv)?;
    }
    let nmi_note = match doc.metrics.nmi {
        Some(v) => format!(", nmi {v:.4}"),
        None => String::new(),
    };
    println!(
        "{}: k={}, objective {:.6}{}, {} sweeps, wrote {}",
        command,
        doc.k,
        doc.objective_final,
        nmi_note,
        doc.sweeps_used,
        out.display()
    );
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalNmiArgs {
    /// Labels file or result JSON.
    #[arg(long)]
    pub a: PathBuf,
    /// Labels file or result JSON.
    #[arg(long)]
    pub b: PathBuf,
}

fn load_partition_any(path: &PathBuf) -> anyhow::Result<Partition> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        let doc = ResultDoc::read(path)?;
        Ok(doc.partition()?)
    } else {
        Ok(io::load_labels(path)?)
    }
}

pub fn eval_nmi(args: &EvalNmiArgs) -> anyhow::Result<()> {
    let a = load_partition_any(&args.a)?;
    let b = load_partition_any(&args.b)?;
    let value = metrics::nmi(&a, &b)?;
    println!("{value}");
    Ok(())
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Result JSON produced by a cluster or baseline subcommand.
    #[arg(long)]
    pub result: PathBuf,
}

fn config_f64(config: &Value, key: &str) -> anyhow::Result<f64> {
    config
        .get(key)
        .and_then(Value::as_f64)
        .with_context(|| format!("result config missing numeric field {key:?}"))
}

fn config_str<'v>(config: &'v Value, key: &str) -> anyhow::Result<&'v str> {
    config
        .get(key)
        .and_then(Value::as_str)
        .with_context(|| format!("result config missing string field {key:?}"))
}

fn config_bool(config: &Value, key: &str) -> bool {
    config.get(key).and_then(Value::as_bool).unwrap_or(false)
}

fn parse_objective(name: &str) -> anyhow::Result<CutObjective> {
    Ok(match name {
        "ncut" => CutObjective::Ncut,
        "rcut" => CutObjective::Rcut,
        "rassoc" => CutObjective::Rassoc,
        other => bail!("unknown objective {other:?} in result config"),
    })
}

fn load_vectors_from_config(config: &Value) -> anyhow::Result<VectorDataset> {
    let path = config_str(config, "input")?;
    let (data, _) = io::load_csv_vectors(path, config_bool(config, "has_labels"))?;
    Ok(if config_bool(config, "normalize") { data.normalized() } else { data })
}

fn load_graph_kernel(
    config: &Value,
    rho: f64,
) -> anyhow::Result<(WeightedGraph, plcut_core::KernelProblem)> {
    let path = config_str(config, "input")?;
    let graph = io::load_edge_list(path)?;
    let kind = parse_objective(config_str(config, "objective")?)?;
    let kp = graphcuts::build_kernel(&graph, kind, RhoMode::Fixed(rho))?;
    Ok((graph, kp))
}

/// Recomputes the final objective of a stored result from its inputs and
/// checks the stored trace for monotone descent.
pub fn audit(args: &AuditArgs) -> anyhow::Result<()> {
    let doc = ResultDoc::read(&args.result)?;
    let partition = doc.partition()?;
    partition.validate()?;
    let run = RunResult {
        partition,
        objective_trace: doc.objective_trace.clone(),
        aux_trace: doc.cut_trace.clone(),
        k_trace: doc.k_trace.clone(),
        sweeps_used: doc.sweeps_used,
        converged: doc.converged,
        seed: doc.seed,
        restart_used: doc.restart_used,
        rho: doc.rho,
        reseeds: doc.reseeds,
        audit: None,
        final_objective: doc.objective_final,
    };
    let config = &doc.config;
    let report = match doc.command.as_str() {
        "cluster graph" => {
            let solver = config.get("solver").context("missing solver section")?;
            let params = PYParams::new(
                config_f64(solver, "alpha")?,
                config_f64(solver, "theta")?,
                config_f64(solver, "lambda")?,
            )?;
            let (_, kp) =
                load_graph_kernel(config, doc.rho.context("graph result missing rho")?)?;
            metrics::audit_objective(&run, |p| {
                kernel_fit_objective(&kp, p) - params.lambda() * log_eppf(p, &params)
            })?
        }
        "cluster vectors" => {
            let solver = config.get("solver").context("missing solver section")?;
            let params = PYParams::new(
                config_f64(solver, "alpha")?,
                config_f64(solver, "theta")?,
                config_f64(solver, "lambda")?,
            )?;
            let data = load_vectors_from_config(config)?;
            metrics::audit_objective(&run, |p| vector_objective(&data, p, &params))?
        }
        "baseline kkm" => {
            let (_, kp) =
                load_graph_kernel(config, doc.rho.context("graph result missing rho")?)?;
            metrics::audit_objective(&run, |p| kernel_fit_objective(&kp, p))?
        }
        "baseline kmeans" => {
            let data = load_vectors_from_config(config)?;
            let zero = PYParams::new(1.0, 0.0, 0.0)?;
            metrics::audit_objective(&run, |p| vector_objective(&data, p, &zero))?
        }
        "baseline pyp" => {
            let data = load_vectors_from_config(config)?;
            let lambda = config_f64(config, "lambda")?;
            let theta = config_f64(config, "theta")?;
            let norm =
                if config_bool(config, "squared") { PypNorm::Squared } else { PypNorm::Unsquared };
            metrics::audit_objective(&run, |p| {
                baselines::pyp_objective(&data, p, lambda, theta, norm)
            })?
        }
        other => bail!("cannot audit results from command {other:?}"),
    };
    let verdict = report.monotone && report.discrepancy < 1e-7;
    let doc = json!({
        "result": args.result.display().to_string(),
        "command": doc.command,
        "monotone": report.monotone,
        "first_violation": report.first_violation,
        "traced_objective": report.traced_objective,
        "recomputed_objective": report.recomputed_objective,
        "discrepancy": report.discrepancy,
        "ok": verdict,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    if !verdict {
        bail!("audit failed");
    }
    Ok(())
}
