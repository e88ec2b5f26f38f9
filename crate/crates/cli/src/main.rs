use clap::{Parser, Subcommand};
use plcut_cli::commands::{self, *};
use plcut_cli::experiment::{run_experiment, ExperimentConfig};

/// Power-law graph cuts: cut-objective clustering with a Pitman-Yor
/// partition regularizer that infers the number of clusters.
#[derive(Parser)]
#[command(name = "plcut", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate synthetic datasets.
    Synth {
        #[command(subcommand)]
        what: SynthCommand,
    },
    /// Graph construction utilities.
    Graph {
        #[command(subcommand)]
        what: GraphCommand,
    },
    /// Regularized clustering with inferred cluster count.
    Cluster {
        #[command(subcommand)]
        what: ClusterCommand,
    },
    /// Fixed-k and comparison algorithms.
    Baseline {
        #[command(subcommand)]
        what: BaselineCommand,
    },
    /// Evaluation metrics.
    Eval {
        #[command(subcommand)]
        what: EvalCommand,
    },
    /// Parameter sweeps over (λ, α, θ).
    Sweep {
        #[command(subcommand)]
        what: SweepCommand,
    },
    /// Re-verify a stored result against its inputs.
    Audit(AuditArgs),
}

#[derive(Subcommand)]
enum SynthCommand {
    /// Seating-partition labels plus a stochastic block model graph.
    PycrpSbm(SynthSbmArgs),
    /// Power-law sized Gaussian blobs as CSV.
    Blobs(SynthBlobsArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Gaussian similarity graph from vector data.
    FromVectors(FromVectorsArgs),
}

#[derive(Subcommand)]
enum ClusterCommand {
    /// Cluster a graph through the cut-objective kernel.
    Graph(ClusterGraphArgs),
    /// Cluster raw vectors.
    Vectors(ClusterVectorsArgs),
}

#[derive(Subcommand)]
enum BaselineCommand {
    /// Weighted kernel k-means at fixed k.
    Kkm(BaselineKkmArgs),
    /// Lloyd k-means at fixed k.
    Kmeans(BaselineKmeansArgs),
    /// pyp-means (unsquared norm by default).
    Pyp(BaselinePypArgs),
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Normalized mutual information between two clusterings.
    Nmi(EvalNmiArgs),
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Run the sweep described by a config JSON.
    Run {
        #[arg(long)]
        config: std::path::PathBuf,
    },
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Synth { what } => match what {
            SynthCommand::PycrpSbm(args) => commands::synth_pycrp_sbm(args),
            SynthCommand::Blobs(args) => commands::synth_blobs(args),
        },
        Command::Graph { what } => match what {
            GraphCommand::FromVectors(args) => commands::graph_from_vectors(args),
        },
        Command::Cluster { what } => match what {
            ClusterCommand::Graph(args) => commands::cluster_graph(args),
            ClusterCommand::Vectors(args) => commands::cluster_vectors(args),
        },
        Command::Baseline { what } => match what {
            BaselineCommand::Kkm(args) => commands::baseline_kkm(args),
            BaselineCommand::Kmeans(args) => commands::baseline_kmeans(args),
            BaselineCommand::Pyp(args) => commands::baseline_pyp(args),
        },
        Command::Eval { what } => match what {
            EvalCommand::Nmi(args) => commands::eval_nmi(args),
        },
        Command::Sweep { what } => match what {
            SweepCommand::Run { config } => {
                let cfg = ExperimentConfig::load(config)?;
                let final_path = run_experiment(&cfg)?;
                println!("sweep finished; final result at {}", final_path.display());
                Ok(())
            }
        },
        Command::Audit(args) => commands::audit(args),
    }
}
