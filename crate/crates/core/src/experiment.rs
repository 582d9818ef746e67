//! Replicated runs and their CSV traces.
//!
//! Replication `rep` of every horizon uses episode seed
//! `rep_seed(master, rep)`; rows come out in (horizon, rep) order regardless
//! of how the work was scheduled.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::assignment::gap_structure;
use crate::baselines::{SelfishUcb, TieBreak};
use crate::error::{Error, Result};
use crate::metc_elim::{Doubling, MetcElimConfig, MetcElimPlayer, Mode};
use crate::model::{builtin_u1, builtin_u2, Delta, RewardDist, RewardMatrix};
use crate::seeding::{player_index, rep_seed, stream, Domain};
use crate::simenv::{run_episode, Player, RegretTrace};

/// Header of every trace CSV.
pub const CSV_HEADER: &str = "algo,c,mode,matrix,dist,seed,rep,t,regret,pseudo_regret";

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    U1,
    U2,
    File(PathBuf),
}

impl MatrixSource {
    pub fn label(&self) -> String {
        match self {
            MatrixSource::U1 => "u1".into(),
            MatrixSource::U2 => "u2".into(),
            MatrixSource::File(p) => p.display().to_string(),
        }
    }

    pub fn load(&self) -> Result<RewardMatrix> {
        match self {
            MatrixSource::U1 => Ok(builtin_u1()),
            MatrixSource::U2 => Ok(builtin_u2()),
            MatrixSource::File(p) => RewardMatrix::load(p),
        }
    }
}

impl FromStr for MatrixSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "u1" => MatrixSource::U1,
            "u2" => MatrixSource::U2,
            "" => return Err(Error::InvalidConfig("empty matrix name".into())),
            path => MatrixSource::File(path.into()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Algo {
    MetcElim { c: u32, mode: Mode, doubling: bool },
    SelfishUcb { ties: TieBreak },
}

impl Algo {
    fn csv_fields(&self) -> (&'static str, u32, &'static str) {
        match *self {
            Algo::MetcElim { c, mode, doubling } => {
                (if doubling { "metc-elim-doubling" } else { "metc-elim" }, c, mode.name())
            }
            Algo::SelfishUcb { ties: TieBreak::Lexicographic } => ("selfish-ucb", 0, "none"),
            Algo::SelfishUcb { ties: TieBreak::Random } => ("selfish-ucb", 0, "random-ties"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub matrix: MatrixSource,
    pub algo: Algo,
    /// Overrides the matrix's own distribution when set.
    pub dist: Option<RewardDist>,
    pub horizons: Vec<u64>,
    pub reps: u32,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::InvalidConfig("need at least one replication".into()));
        }
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::InvalidConfig("horizons must be positive".into()));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig("horizons must be strictly increasing".into()));
        }
        if let Algo::MetcElim { c: 0, .. } = self.algo {
            return Err(Error::InvalidConfig("c must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load_matrix(&self) -> Result<RewardMatrix> {
        let matrix = self.matrix.load()?;
        match self.dist {
            Some(d) => matrix.with_dist(d),
            None => Ok(matrix),
        }
    }
}

/// Builds the players of one episode.
pub fn make_players(
    matrix: &RewardMatrix,
    algo: &Algo,
    horizon: u64,
    seed: u64,
) -> Result<Vec<Box<dyn Player>>> {
    let k = matrix.arms();
    let mut players: Vec<Box<dyn Player>> = Vec::with_capacity(matrix.players());
    for m in 0..matrix.players() {
        match *algo {
            Algo::MetcElim { c, mode, doubling: false } => {
                let cfg = MetcElimConfig::new(k, horizon)
                    .with_c(c)
                    .with_mode(mode)
                    .with_dist(matrix.dist());
                let rng = stream(seed, Domain::Player, player_index(m, 0));
                players.push(Box::new(MetcElimPlayer::new(cfg, rng)?));
            }
            Algo::MetcElim { c, mode, doubling: true } => {
                let cfg = MetcElimConfig::new(k, 1)
                    .with_c(c)
                    .with_mode(mode)
                    .with_dist(matrix.dist());
                cfg.validate()?;
                players.push(Box::new(Doubling::new(move |instance, assumed| {
                    let cfg = MetcElimConfig {
                        horizon: assumed,
                        ..cfg.clone()
                    };
                    let rng = stream(seed, Domain::Player, player_index(m, instance));
                    MetcElimPlayer::new(cfg, rng).expect("validated above")
                })));
            }
            Algo::SelfishUcb { ties } => {
                let rng = stream(seed, Domain::Player, player_index(m, 0));
                players.push(Box::new(SelfishUcb::new(k, ties, rng)));
            }
        }
    }
    Ok(players)
}

/// One seeded episode.
pub fn run_replication(
    matrix: &RewardMatrix,
    algo: &Algo,
    horizon: u64,
    seed: u64,
) -> Result<RegretTrace> {
    let mut players = make_players(matrix, algo, horizon, seed)?;
    run_episode(&mut players, matrix, horizon, seed)
}

/// One finished episode of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationResult {
    pub horizon: u64,
    pub rep: u32,
    pub trace: RegretTrace,
}

/// Every (horizon, rep) episode, in that order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ReplicationResult>> {
    cfg.validate()?;
    let matrix = cfg.load_matrix()?;
    let jobs: Vec<(u64, u32)> = cfg
        .horizons
        .iter()
        .flat_map(|&h| (0..cfg.reps).map(move |r| (h, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(horizon, rep)| {
            let seed = rep_seed(cfg.seed, rep as u64);
            run_replication(&matrix, &cfg.algo, horizon, seed).map(|trace| ReplicationResult {
                horizon,
                rep,
                trace,
            })
        })
        .collect()
}

/// CSV rows for `results`, header first.
pub fn write_csv<W: Write>(
    cfg: &ExperimentConfig,
    results: &[ReplicationResult],
    mut out: W,
) -> Result<()> {
    let (algo, c, mode) = cfg.algo.csv_fields();
    let matrix = cfg.matrix.label();
    let dist = match cfg.dist {
        Some(d) => d.name(),
        None => cfg.matrix.load()?.dist().name(),
    };
    writeln!(out, "{CSV_HEADER}")?;
    for r in results {
        for cp in &r.trace.checkpoints {
            writeln!(
                out,
                "{algo},{c},{mode},{matrix},{dist},{},{},{},{},{}",
                cfg.seed, r.rep, cp.t, cp.regret, cp.pseudo_regret
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Runs the experiment and returns the whole CSV.
pub fn experiment_csv(cfg: &ExperimentConfig) -> Result<Vec<u8>> {
    let results = run_experiment(cfg)?;
    let mut buf = Vec::new();
    write_csv(cfg, &results, &mut buf)?;
    Ok(buf)
}

/// `U*`, `Δ` and the optimal matchings of a matrix, one per line.
pub fn gaps_report(matrix: &RewardMatrix) -> Result<String> {
    let gs = gap_structure(matrix)?;
    let mut s = String::new();
    writeln!(s, "M = {}, K = {}", matrix.players(), matrix.arms()).unwrap();
    writeln!(s, "U* = {}", rounded(gs.u_star)).unwrap();
    let delta = match gs.delta {
        Delta::Finite(d) => rounded(d),
        Delta::Infinite => "inf".into(),
    };
    writeln!(s, "Delta = {delta}").unwrap();
    writeln!(s, "optimal matchings ({}):", gs.optimal_matchings.len()).unwrap();
    for pi in &gs.optimal_matchings {
        writeln!(s, "  {pi}").unwrap();
    }
    Ok(s)
}

/// Twelve decimals, trailing zeros dropped: hides summation noise.
fn rounded(x: f64) -> String {
    let s = format!("{x:.12}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
