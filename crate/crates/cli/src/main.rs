//! Command-line experiment runner.
//!
//! ```text
//! mpbandit run --matrix u1 --algo metc-elim --horizons 1e3,1e4,1e5 --reps 100 --out u1.csv
//! mpbandit gaps --matrix u2
//! ```

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mpbandit::baselines::TieBreak;
use mpbandit::experiment::{gaps_report, run_experiment, write_csv, Algo, ExperimentConfig, MatrixSource};
use mpbandit::metc_elim::Mode;
use mpbandit::model::RewardDist;

#[derive(Debug, Parser)]
#[command(name = "mpbandit", version, about = "Multiplayer bandit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run seeded replications and write regret checkpoints as CSV.
    Run(RunArgs),
    /// Print U*, the smallest gap and the optimal matchings of a matrix.
    Gaps {
        /// `u1`, `u2` or a matrix file.
        #[arg(long, default_value = "u1")]
        matrix: MatrixSource,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgoArg {
    MetcElim,
    SelfishUcb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DistArg {
    Bernoulli,
    Gaussian,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// `u1`, `u2` or a matrix file.
    #[arg(long, default_value = "u1")]
    matrix: MatrixSource,
    #[arg(long, value_enum, default_value = "metc-elim")]
    algo: AlgoArg,
    /// Exploration exponent: epoch `p` plays each candidate `2^(p^c)` times.
    #[arg(long, default_value_t = 1)]
    c: u32,
    /// `faithful` or `enhanced`.
    #[arg(long, default_value = "enhanced")]
    mode: Mode,
    /// Reward distribution; defaults to the matrix's own.
    #[arg(long, value_enum)]
    dist: Option<DistArg>,
    /// Gaussian reward variance (with `--dist gaussian`).
    #[arg(long)]
    sigma2: Option<f64>,
    /// Comma-separated, strictly increasing; scientific notation allowed.
    #[arg(long, value_delimiter = ',', value_parser = parse_horizon, required = true)]
    horizons: Vec<u64>,
    #[arg(long, default_value_t = 100)]
    reps: u32,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run M-ETC-Elim without knowing the horizon (doubling trick).
    #[arg(long)]
    doubling: bool,
    /// Selfish-UCB tie-breaking: `lex` (lowest arm) or `random`.
    #[arg(long, default_value = "lex")]
    ucb_ties: TieBreak,
    #[arg(long)]
    out: PathBuf,
}

fn parse_horizon(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        return Err(format!("`{s}` is not a positive integer"));
    }
    Ok(v as u64)
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig, String> {
        let algo = match self.algo {
            AlgoArg::MetcElim => Algo::MetcElim {
                c: self.c,
                mode: self.mode,
                doubling: self.doubling,
            },
            AlgoArg::SelfishUcb => Algo::SelfishUcb {
                ties: self.ucb_ties,
            },
        };
        let dist = match (self.dist, self.sigma2) {
            (None, None) => None,
            (Some(DistArg::Bernoulli), None) => Some(RewardDist::Bernoulli),
            (Some(DistArg::Gaussian), Some(sigma2)) => Some(RewardDist::Gaussian { sigma2 }),
            (Some(DistArg::Gaussian), None) => return Err("--dist gaussian needs --sigma2".into()),
            (_, Some(_)) => return Err("--sigma2 only applies with --dist gaussian".into()),
        };
        Ok(ExperimentConfig {
            matrix: self.matrix.clone(),
            algo,
            dist,
            horizons: self.horizons.clone(),
            reps: self.reps,
            seed: self.seed,
        })
    }
}

/// Writes the CSV next to `out` and renames it into place, so a failed run
/// never leaves a partial file behind.
fn run(args: &RunArgs) -> Result<(), String> {
    let cfg = args.config()?;
    let results = run_experiment(&cfg).map_err(|e| e.to_string())?;
    let dir = match args.out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .map_err(|e| format!("cannot write to {}: {e}", dir.display()))?;
    write_csv(&cfg, &results, std::io::BufWriter::new(&mut tmp)).map_err(|e| e.to_string())?;
    tmp.as_file_mut().flush().map_err(|e| e.to_string())?;
    tmp.persist(&args.out)
        .map_err(|e| format!("cannot write {}: {}", args.out.display(), e.error))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args),
        Command::Gaps { matrix } => matrix
            .load()
            .and_then(|m| gaps_report(&m))
            .map(|report| print!("{report}"))
            .map_err(|e| e.to_string()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
