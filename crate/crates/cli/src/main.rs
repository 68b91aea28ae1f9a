//! `mag`: magnitude, magnitude homology, weighted barcodes and stability
//! experiments from the command line.
//!
//! Exit status: 0 on success, 1 on a domain error (JSON on stderr), 2 on a
//! usage error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "mag", version, about = "Magnitude, magnitude homology and weighted barcodes of finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendChoice {
    /// Rational when every distance is exactly representable, else bucketed.
    Auto,
    Rational,
    Bucketed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindChoice {
    Auto,
    Points,
    Distances,
}

/// How to read a space file and which length arithmetic to use.
#[derive(Debug, Clone, Args)]
pub struct SpaceArgs {
    /// Point cloud or distance matrix, JSON or CSV.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendChoice::Auto)]
    pub backend: BackendChoice,
    /// Bucket width for float lengths.
    #[arg(long, default_value_t = maghom::length::DEFAULT_TAU)]
    pub tau: f64,
    /// How to read a CSV table.
    #[arg(long, value_enum, default_value_t = KindChoice::Auto)]
    pub kind: KindChoice,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Write the JSON here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Magnitude, weighting and (for point clouds) the radius bound.
    Magnitude {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Integer magnitude homology ranks and Euler characteristics.
    Homology {
        #[command(flatten)]
        space: SpaceArgs,
        /// Largest length grading, e.g. `2`, `5/2` or `2.5`.
        #[arg(long)]
        lmax: String,
        /// Largest degree (defaults to the degree where chains vanish).
        #[arg(long)]
        kmax: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Weighted barcode of the filtration by balls about a center.
    Barcode {
        #[command(flatten)]
        space: SpaceArgs,
        /// Center coordinates, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "center_index")]
        center: Option<Vec<f64>>,
        /// Use the point with this index as the center.
        #[arg(long)]
        center_index: Option<usize>,
        #[arg(long)]
        lmax: String,
        #[arg(long)]
        kmax: Option<usize>,
        /// Monotone reparameterization `{"breakpoints": [[x, y], …]}`.
        #[arg(long)]
        repar: Option<PathBuf>,
        /// Coefficient field: `Q` or a prime.
        #[arg(long, default_value = "Q")]
        field: String,
        /// Also write the flat plotting CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Distances between barcodes, point sets or magnitude profiles.
    Distance {
        #[command(subcommand)]
        which: DistanceCommand,
    },
    /// Magnitude profile `r ↦ Mag(N_r)` on `[0, L]`.
    Profile {
        /// Point cloud, JSON or CSV.
        input: PathBuf,
        /// Largest radius `L`.
        #[arg(long = "L", id = "L")]
        scale: f64,
        /// Center coordinates (default: barycenter).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Option<Vec<f64>>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Seeded stability experiments.
    Stability {
        /// One of radius, center, composition, difference, profile,
        /// upper-bound, monotonicity, collinear.
        suite: String,
        /// Trial configuration JSON.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured number of trials.
        #[arg(long)]
        trials: Option<usize>,
        /// Also write the per-trial CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Subcommand)]
enum DistanceCommand {
    /// Weight-preserving bottleneck distance between two barcodes (JSON or CSV).
    Bottleneck {
        left: PathBuf,
        right: PathBuf,
        /// Bucket width for float weights read from CSV.
        #[arg(long, default_value_t = maghom::length::DEFAULT_TAU)]
        tau: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// ∞-Wasserstein distance between equal-size point sets.
    Wasserstein {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// L¹ distance between two magnitude profiles on the same `[0, L]`.
    Profile {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn configure_threads() -> Result<(), commands::CliError> {
    let Ok(text) = std::env::var("MAG_THREADS") else { return Ok(()) };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::CliError::Usage(format!("MAG_THREADS must be a positive integer, got {text:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::CliError::Usage(format!("cannot configure {n} threads: {e}")))
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    configure_threads()?;
    match cli.command {
        Command::Magnitude { space, out } => commands::magnitude(&space, &out),
        Command::Homology { space, lmax, kmax, out } => commands::homology(&space, &lmax, kmax, &out),
        Command::Barcode { space, center, center_index, lmax, kmax, repar, field, csv, out } => {
            commands::barcode(commands::BarcodeRequest {
                space: &space,
                center: center.as_deref(),
                center_index,
                lmax: &lmax,
                kmax,
                repar: repar.as_deref(),
                field: &field,
                csv: csv.as_deref(),
                out: &out,
            })
        }
        Command::Distance { which } => match which {
            DistanceCommand::Bottleneck { left, right, tau, out } => {
                commands::distance_bottleneck(&left, &right, tau, &out)
            }
            DistanceCommand::Wasserstein { left, right, out } => commands::distance_wasserstein(&left, &right, &out),
            DistanceCommand::Profile { left, right, out } => commands::distance_profile(&left, &right, &out),
        },
        Command::Profile { input, scale, center, out } => commands::profile(&input, scale, center.as_deref(), &out),
        Command::Stability { suite, config, seed, trials, csv, out } => {
            commands::stability(&suite, config.as_deref(), seed, trials, csv.as_deref(), &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
