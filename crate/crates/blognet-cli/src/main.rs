use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use blognet_cli::commands;
use blognet_cli::config::ConfigOverrides;

/// Content-based similarity networks over text corpora: index word
/// frequencies, build the similarity graph, detect spam and duplicates,
/// infer clusters and fit hierarchical structure.
///
/// Summaries go to standard output as single-line JSON; progress and
/// diagnostics go to standard error.
#[derive(Parser)]
#[command(name = "blognet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the corpus-wide word-frequency table.
    Index {
        /// Corpus: a directory of text files or a JSON-lines file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Build the similarity graph and analyze its distribution.
    Graph {
        /// Corpus: a directory of text files or a JSON-lines file.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Reuse a frequency-table artifact instead of re-indexing.
        #[arg(long)]
        frequency_table: Option<PathBuf>,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Cluster the gamma view of a stored similarity graph.
    Cluster {
        /// Edge-list artifact from the graph stage.
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Fit a dendrogram to the binarized gamma view or to one cluster.
    Hierarchy {
        /// Edge-list artifact from the graph stage.
        #[arg(long)]
        edges: PathBuf,
        /// Partition artifact from the cluster stage.
        #[arg(long, requires = "cluster_id")]
        partition: Option<PathBuf>,
        /// Cluster label to restrict to.
        #[arg(long, requires = "partition")]
        cluster_id: Option<u32>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
    /// Generate a synthetic corpus with ground truth.
    Synth {
        /// TOML spec of the topic model.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: ConfigOverrides,
    },
}

fn emit<T: Serialize>(summary: &T) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string(summary)?);
    Ok(())
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Index {
            input,
            out_dir,
            overrides,
        } => {
            let config = overrides.resolve()?;
            emit(&commands::run_index(&input, &out_dir, &config)?)
        }
        Command::Graph {
            input,
            out_dir,
            frequency_table,
            overrides,
        } => {
            let config = overrides.resolve()?;
            emit(&commands::run_graph(
                &input,
                frequency_table.as_deref(),
                &out_dir,
                &config,
            )?)
        }
        Command::Cluster {
            edges,
            out_dir,
            overrides,
        } => {
            let config = overrides.resolve()?;
            emit(&commands::run_cluster(&edges, &out_dir, &config)?)
        }
        Command::Hierarchy {
            edges,
            partition,
            cluster_id,
            out_dir,
            overrides,
        } => {
            let config = overrides.resolve()?;
            let restrict = partition.as_deref().zip(cluster_id);
            emit(&commands::run_hierarchy(
                &edges, restrict, &out_dir, &config,
            )?)
        }
        Command::Synth {
            spec,
            out_dir,
            overrides,
        } => {
            let config = overrides.resolve()?;
            emit(&commands::run_synth(&spec, &out_dir, &config)?)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
