//! The `dowker` command-line tool. Every subcommand is a thin composition
//! of `dowker-core` and `dowker-nn` calls; [`run`] is the whole program
//! minus process exit.

pub mod commands;
pub mod error;
pub mod input;
pub mod settings;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use dowker_core::Kind;

pub use error::{CliError, Result};
pub use settings::{Settings, CONFIG_ENV};

#[derive(Parser, Debug)]
#[command(
    name = "dowker",
    version,
    about = "Dowker persistence for directed temporal graphs"
)]
pub struct Cli {
    /// Config file (flat TOML); defaults to $DOWKER_CONFIG
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Write the primary output here instead of stdout
    #[arg(long, short, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub settings: Settings,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone, Copy)]
pub struct WeightArgs {
    /// Use timestamps as filtration weights as-is (they must lie in [0, 1])
    /// instead of min-max normalizing them
    #[arg(long)]
    pub raw_weights: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Source and sink line graphs of each input graph
    Linegraph {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Exact degree-0 and degree-1 diagrams plus the per-edge point map
    Pd {
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "sink")]
        kind: Kind,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Source/sink diagram agreement; exits 3 if any graph disagrees
    Duality {
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// 2-Wasserstein distance between the diagrams of two inputs (diagram
    /// JSON, `pd` output, or edge lists)
    Wdist {
        a: PathBuf,
        b: PathBuf,
        /// Compare only this dimension
        #[arg(long)]
        dim: Option<u8>,
        #[arg(long, default_value = "sink")]
        kind: Kind,
        /// Keep zero-persistence points in the matching
        #[arg(long)]
        keep_diagonal: bool,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Persistence image of one diagram
    Pimage {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        dim: u8,
        #[arg(long, default_value = "sink")]
        kind: Kind,
        #[arg(long, value_enum, default_value = "csv")]
        format: commands::ImageFormat,
        #[command(flatten)]
        weights: WeightArgs,
    },
    /// Write a synthetic dataset
    Gen(commands::GenArgs),
    /// Train the network on a dataset directory
    Train {
        data: PathBuf,
        /// Where to save the trained model
        #[arg(long)]
        model_out: PathBuf,
        /// Per-epoch CSV log
        #[arg(long)]
        history: Option<PathBuf>,
        /// Start from this model instead of a fresh one
        #[arg(long)]
        init: Option<PathBuf>,
    },
    /// Predicted diagrams and class scores
    Predict {
        model: PathBuf,
        inputs: Vec<PathBuf>,
    },
    /// Wasserstein distance and persistence image error of predictions
    /// against exact diagrams
    Eval {
        model: PathBuf,
        inputs: Vec<PathBuf>,
    },
    /// k-fold cross-validated graph classification
    Classify { data: PathBuf },
    /// Exact engine against the naive oracle, plus a large-graph timing
    Bench(commands::BenchArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let settings = Settings::resolve(cli.settings.clone(), cli.config.as_ref())?;
    let text = commands::dispatch(cli.command, &settings)?;
    match &cli.out {
        Some(p) => std::fs::write(p, &text).map_err(CliError::file(p))?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
