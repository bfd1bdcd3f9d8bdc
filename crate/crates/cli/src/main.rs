//! `pacman`: Bernoulli decompositions, gap scans, antichain bounds,
//! concentration experiments and lattice potential splits from the command
//! line. Output is CSV preceded by `#` manifest lines.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pacman_core::decomposition::Variant;

#[derive(Parser, Debug)]
#[command(
    name = "pacman",
    version,
    about = "Bernoulli decompositions and Sperner-type bounds"
)]
struct Cli {
    /// Cap on worker threads (does not change any output).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Chasing or colliding decomposition of a measure, as CSV.
    Decompose(DecomposeArgs),
    /// Chasing gap over a grid of p values.
    BetaScan(BetaScanArgs),
    /// Antichain checks, LYM sums, probabilities and bounds.
    Antichain {
        #[command(subcommand)]
        action: AntichainCommand,
    },
    /// Monte Carlo concentration experiment from a config file.
    Concentration(ConcentrationArgs),
    /// Split of an alloy-type lattice potential.
    Lattice(LatticeArgs),
}

#[derive(Args, Debug)]
struct DistArgs {
    /// Distribution file (`atom x m` / `segment a b m` lines).
    #[arg(long)]
    dist: PathBuf,

    /// Read the file as a sample, one value per line.
    #[arg(long)]
    empirical: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Chasing,
    Colliding,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Chasing => Variant::Chasing,
            VariantArg::Colliding => Variant::Colliding,
        }
    }
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[command(flatten)]
    dist: DistArgs,

    /// Bernoulli parameter, or `auto` to search for one with a positive gap.
    #[arg(long, default_value = "auto")]
    p: String,

    #[arg(long, value_enum, default_value = "chasing")]
    variant: VariantArg,

    /// Number of uniform grid rows in addition to the breakpoint rows.
    #[arg(long, default_value_t = 9)]
    grid: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BetaScanArgs {
    #[command(flatten)]
    dist: DistArgs,

    /// Comma-separated p values; overrides `--steps`.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,

    /// Scan p = k/(steps+1), k = 1..=steps.
    #[arg(long, default_value_t = 19)]
    steps: usize,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ProfileArgs {
    /// Common success probability of every coordinate.
    #[arg(long, conflicts_with = "profile")]
    p: Option<f64>,

    /// Comma-separated per-coordinate success probabilities.
    #[arg(long, value_delimiter = ',')]
    profile: Option<Vec<f64>>,
}

#[derive(Subcommand, Debug)]
enum AntichainCommand {
    /// Verify that every block of the file is an antichain.
    Check {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LYM sum of every block.
    Lym {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability of every block under a product Bernoulli measure.
    Prob {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        profile: ProfileArgs,
        /// Accept sets that are not antichains.
        #[arg(long)]
        raw: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Maximum-probability antichain of {0,1}^N.
    Max {
        #[arg(short = 'N', long = "dim")]
        n: usize,
        #[command(flatten)]
        profile: ProfileArgs,
        /// List the members of the maximizer.
        #[arg(long)]
        members: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability of every block against the Sperner bound.
    Bounds {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct ConcentrationArgs {
    /// Experiment config; relative paths inside it are resolved against
    /// its directory.
    #[arg(long)]
    config: PathBuf,

    /// Overrides the config's seed and `PACMAN_SEED`.
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[command(flatten)]
    dist: DistArgs,

    /// Bernoulli parameter, or `auto`.
    #[arg(long, default_value = "auto")]
    p: String,

    /// Stencil file: `offset_1 ... offset_d value` lines.
    #[arg(long)]
    stencil: PathBuf,

    /// Box sides, e.g. `32x32`.
    #[arg(long = "box")]
    box_dims: String,

    /// Upper end of the coupling range; defaults to the top of the support.
    #[arg(long)]
    m: Option<f64>,

    #[arg(long)]
    seed: Option<u64>,

    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
