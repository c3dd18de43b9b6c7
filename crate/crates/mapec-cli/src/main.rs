//! `mapec`: community-aware node importance from random-walk flows.
//!
//! Subcommands cover partition detection, centrality scoring, spreading
//! evaluations (linear threshold, SIR, imprecision, perplexity), the
//! rewire-and-remeasure experiment, and graph statistics. Every command with
//! a fixed `--seed` is bit-reproducible across runs and thread counts.

mod commands;
mod config;
mod fmt;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{ChbVariantKind, ConventionKind, FlowKind, FormatKind, LtDirectionKind, MethodKind};

#[derive(Parser)]
#[command(
    name = "mapec",
    version,
    about = "Community-aware node importance from random-walk flows",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Unset values fall back to the config
/// file (when `--config` is given) and then to the documented defaults.
#[derive(Args, Debug, Clone)]
pub struct CommonOpts {
    /// Edge-list input: `source target [weight]` per line, `#` comments.
    #[arg(value_name = "EDGELIST")]
    pub input: Option<PathBuf>,

    /// JSON run-configuration file; explicit flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Interpret links as directed arcs [default: undirected].
    #[arg(long)]
    pub directed: bool,

    /// Random-walk flow model [default: raw].
    #[arg(long, value_enum)]
    pub flow: Option<FlowKind>,

    /// Teleportation rate for the teleporting flow models [default: 0.15].
    #[arg(long, value_name = "RATE")]
    pub teleport_rate: Option<f64>,

    /// Codebook-usage convention for map equation centrality
    /// [default: with-exit].
    #[arg(long, value_enum)]
    pub convention: Option<ConventionKind>,

    /// Centrality method(s), comma separated [default: mec].
    #[arg(long = "method", value_enum, value_delimiter = ',')]
    pub methods: Vec<MethodKind>,

    /// Write results to this file instead of stdout.
    #[arg(long, short = 'o', value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<FormatKind>,

    /// Base seed for every randomized component [default: 42].
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Where the node partition comes from: a file, or codelength optimization
/// (the default when no file is given).
#[derive(Args, Debug, Clone)]
pub struct PartitionSource {
    /// Partition file (`label module-path` lines).
    #[arg(long, value_name = "FILE", conflicts_with = "detect")]
    pub partition: Option<PathBuf>,

    /// Detect the partition by codelength optimization (also the default).
    #[arg(long)]
    pub detect: bool,

    /// Optimizer restarts when detecting [default: 10].
    #[arg(long)]
    pub runs: Option<usize>,
}

/// SIR infection probability: a number in [0, 1], or `auto` for the
/// epidemic threshold of the input graph (clamped to 1).
#[derive(Debug, Clone)]
pub enum PChoice {
    Auto,
    Value(f64),
}

fn parse_p(text: &str) -> Result<PChoice, String> {
    if text.eq_ignore_ascii_case("auto") {
        return Ok(PChoice::Auto);
    }
    text.parse::<f64>()
        .map(PChoice::Value)
        .map_err(|_| format!("expected `auto` or a number, found {text:?}"))
}

#[derive(Subcommand)]
enum Command {
    /// Detect the shortest-codelength two-level partition; writes the
    /// partition plus a JSON summary (codelength, module counts, mixing).
    Partition {
        #[command(flatten)]
        common: CommonOpts,
        /// Optimizer restarts [default: 10].
        #[arg(long)]
        runs: Option<usize>,
    },
    /// Score every node with one centrality method; CSV `node,score`,
    /// best first, ties broken toward earlier nodes.
    Centrality {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        source: PartitionSource,
        /// Intra-community term of community hub-bridge
        /// [default: own-module].
        #[arg(long, value_enum, default_value = "own-module")]
        chb_variant: ChbVariantKind,
    },
    /// Linear threshold cascades seeded with each method's top-x nodes;
    /// `method,flow,x,value` rows where value is the final activation size.
    Lt {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        source: PartitionSource,
        /// Intra-community term of community hub-bridge
        /// [default: own-module].
        #[arg(long, value_enum, default_value = "own-module")]
        chb_variant: ChbVariantKind,
        /// Activation threshold in (0, 1] [default: 0.5].
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        /// Seed fractions: `start:stop:step` (inclusive) or a comma list
        /// [default: 0.05:0.5:0.05].
        #[arg(long, default_value = "0.05:0.5:0.05")]
        fractions: String,
        /// Which neighbors an inactive node watches [default: incoming].
        #[arg(long, value_enum, default_value = "incoming")]
        lt_direction: LtDirectionKind,
    },
    /// Monte Carlo SIR spreading power of every node; CSV `node,power`.
    Sir {
        #[command(flatten)]
        common: CommonOpts,
        /// Infection probability, or `auto` for the epidemic threshold
        /// [default: auto].
        #[arg(long, value_parser = parse_p, default_value = "auto")]
        p: PChoice,
        /// Simulation repetitions per node [default: 100].
        #[arg(long, default_value_t = 100)]
        reps: usize,
    },
    /// Ranking imprecision against SIR spreading power;
    /// `method,flow,x,value` rows.
    Imprecision {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        source: PartitionSource,
        /// Intra-community term of community hub-bridge
        /// [default: own-module].
        #[arg(long, value_enum, default_value = "own-module")]
        chb_variant: ChbVariantKind,
        /// Infection probability, or `auto` for the epidemic threshold
        /// [default: auto].
        #[arg(long, value_parser = parse_p, default_value = "auto")]
        p: PChoice,
        /// Simulation repetitions per node [default: 100].
        #[arg(long, default_value_t = 100)]
        reps: usize,
        /// Top fractions: `start:stop:step` (inclusive) or a comma list
        /// [default: 0.05:0.5:0.05].
        #[arg(long, default_value = "0.05:0.5:0.05")]
        fractions: String,
    },
    /// Selection perplexity of each method's top-x nodes over the partition
    /// modules; `method,flow,x,value` rows.
    Perplexity {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        source: PartitionSource,
        /// Intra-community term of community hub-bridge
        /// [default: own-module].
        #[arg(long, value_enum, default_value = "own-module")]
        chb_variant: ChbVariantKind,
        /// Top fractions: `start:stop:step` (inclusive) or a comma list
        /// [default: 0.05:0.5:0.05].
        #[arg(long, default_value = "0.05:0.5:0.05")]
        fractions: String,
    },
    /// Rewire a fraction r of links, re-detect, re-score; one JSON record
    /// per r value.
    RewireExp {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        source: PartitionSource,
        /// Rewiring fractions: `start:stop:step` (inclusive) or a comma
        /// list [default: 0:1:0.1].
        #[arg(long, default_value = "0:1:0.1")]
        r: String,
        /// Rewired replicas per fraction [default: 10].
        #[arg(long, default_value_t = 10)]
        repeats: usize,
    },
    /// Structural summary of the input graph (JSON).
    Stats {
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Partition { common, runs } => commands::cmd_partition(common, *runs),
        Command::Centrality { common, source, chb_variant } => {
            commands::cmd_centrality(common, source, *chb_variant)
        }
        Command::Lt { common, source, chb_variant, threshold, fractions, lt_direction } => {
            commands::cmd_lt(common, source, *chb_variant, *threshold, fractions, *lt_direction)
        }
        Command::Sir { common, p, reps } => commands::cmd_sir(common, p, *reps),
        Command::Imprecision { common, source, chb_variant, p, reps, fractions } => {
            commands::cmd_imprecision(common, source, *chb_variant, p, *reps, fractions)
        }
        Command::Perplexity { common, source, chb_variant, fractions } => {
            commands::cmd_perplexity(common, source, *chb_variant, fractions)
        }
        Command::RewireExp { common, source, r, repeats } => {
            commands::cmd_rewire_exp(common, source, r, *repeats)
        }
        Command::Stats { common } => commands::cmd_stats(common),
    }
}

/// Honors `MAPEC_THREADS` as the global worker count. Results do not depend
/// on it; it only bounds parallelism.
fn init_thread_pool() {
    let Ok(value) = std::env::var("MAPEC_THREADS") else {
        return;
    };
    match value.parse::<usize>() {
        Ok(threads) if threads >= 1 => {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
        _ => eprintln!("mapec: ignoring MAPEC_THREADS={value:?} (expected a positive integer)"),
    }
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("mapec: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}
