//! M-ETC-Elim: explore-then-commit with matching elimination.
//!
//! Every player first runs [`InitProcedure`] to learn `M` and a distinct
//! rank. Rank 1 becomes the leader, the others followers. Each epoch `p`:
//!
//! 1. the leader eliminates candidate edges and picks candidate matchings;
//! 2. it broadcasts to every follower its arm in each candidate matching and
//!    the communication arms for the rest of the epoch;
//! 3. if a single candidate is left everybody plays it forever, otherwise
//!    every candidate is played `2^(p^c)` times;
//! 4. followers report quantized mean estimates back to the leader.
//!
//! All coordination happens through deliberate collisions (see
//! [`crate::protocol`]).
//!
//! ```
//! use mpbandit::metc_elim::{MetcElimConfig, MetcElimPlayer};
//! use mpbandit::model::builtin_u1;
//! use mpbandit::seeding::{stream, Domain};
//! use mpbandit::simenv::run_episode;
//!
//! let u1 = builtin_u1();
//! let horizon = 50_000;
//! let cfg = MetcElimConfig::new(u1.arms(), horizon);
//! let mut players: Vec<MetcElimPlayer> = (0..u1.players())
//!     .map(|m| MetcElimPlayer::new(cfg.clone(), stream(1, Domain::Player, m as u64)).unwrap())
//!     .collect();
//! let trace = run_episode(&mut players, &u1, horizon, 1).unwrap();
//! assert!(trace.final_pseudo_regret() < 0.1 * horizon as f64);
//! ```

mod candidates;
mod doubling;
mod follower;
mod init;
mod leader;
mod params;

pub use candidates::{build_candidates, build_candidates_enhanced, distinct_arms, CandidateEdgeSet};
pub use doubling::{instance_lengths, Doubling};
pub use follower::{FollowerEpochRecord, Transmission};
pub use init::{init_length, musical_chairs_rounds, InitProcedure};
pub use leader::LeaderEpochRecord;
pub use params::{
    build_threshold, delta, enhanced_bits, epoch_exponent, epsilon, epsilon_prime,
    gaussian_epsilon, good_event_budget, pulls_through, report_bits, rounds_per_matching,
    trunc_bits, EnhancedParams, EpochParams, MetcElimConfig, Mode, MAX_ENHANCED_BITS,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::assignment::WeightTable;
use crate::error::{Error, Result};
use crate::model::RewardMatrix;
use crate::simenv::{Feedback, GoodEventMonitor, Player};

use follower::Follower;
use leader::Leader;

#[derive(Debug, Clone)]
enum Stage {
    Init(InitProcedure),
    Leader(Box<Leader>),
    Follower(Box<Follower>),
    /// Initialization failed (or gave `M > K`): uniformly random arms.
    Degraded(ChaCha8Rng),
    /// Transient placeholder while switching stages.
    Switching,
}

/// One player running M-ETC-Elim.
#[derive(Debug, Clone)]
pub struct MetcElimPlayer {
    cfg: MetcElimConfig,
    stage: Stage,
    init_result: Option<(usize, usize)>,
}

impl MetcElimPlayer {
    pub fn new(cfg: MetcElimConfig, rng: ChaCha8Rng) -> Result<Self> {
        cfg.validate()?;
        let init = InitProcedure::new(cfg.k, cfg.init_delta(), rng);
        Ok(Self {
            cfg,
            stage: Stage::Init(init),
            init_result: None,
        })
    }

    pub fn config(&self) -> &MetcElimConfig {
        &self.cfg
    }

    /// `(rank, M)` learned during initialization.
    pub fn init_result(&self) -> Option<(usize, usize)> {
        self.init_result
    }

    pub fn rank(&self) -> Option<usize> {
        self.init_result.map(|(r, _)| r)
    }

    pub fn is_leader(&self) -> bool {
        matches!(self.stage, Stage::Leader(_))
    }

    /// Current epoch (0 during initialization).
    pub fn epoch(&self) -> u32 {
        match &self.stage {
            Stage::Leader(l) => l.epoch(),
            Stage::Follower(f) => f.epoch(),
            _ => 0,
        }
    }

    pub fn leader_records(&self) -> Option<&[LeaderEpochRecord]> {
        match &self.stage {
            Stage::Leader(l) => Some(l.records()),
            _ => None,
        }
    }

    pub fn follower_records(&self) -> Option<&[FollowerEpochRecord]> {
        match &self.stage {
            Stage::Follower(f) => Some(f.records()),
            _ => None,
        }
    }

    /// Leader's current candidate edges, rows indexed by rank − 1.
    pub fn candidate_edges(&self) -> Option<&CandidateEdgeSet> {
        match &self.stage {
            Stage::Leader(l) => Some(l.edges()),
            _ => None,
        }
    }

    /// First round (one-based, from the start of the run) of exploitation.
    pub fn exploit_entered_at(&self) -> Option<u64> {
        match &self.stage {
            Stage::Leader(l) => l.exploit_at(),
            Stage::Follower(f) => f.exploit_at(),
            _ => None,
        }
    }

    fn finish_init(&mut self) {
        let Stage::Init(init) = std::mem::replace(&mut self.stage, Stage::Switching) else {
            unreachable!("only called during initialization");
        };
        let round = init.len();
        self.init_result = init.result();
        let rng = init.into_rng();
        self.stage = match self.init_result {
            Some((_, m)) if m > self.cfg.k => Stage::Degraded(rng),
            Some((1, m)) => Stage::Leader(Box::new(Leader::new(self.cfg.clone(), m, round))),
            Some((rank, m)) => {
                Stage::Follower(Box::new(Follower::new(self.cfg.clone(), rank, m, round, rng)))
            }
            None => Stage::Degraded(rng),
        };
    }
}

impl Player for MetcElimPlayer {
    fn choose_arm(&mut self) -> usize {
        match &mut self.stage {
            Stage::Init(init) => init.choose_arm(),
            Stage::Leader(l) => l.choose_arm(),
            Stage::Follower(f) => f.choose_arm(),
            Stage::Degraded(rng) => rng.random_range(0..self.cfg.k),
            Stage::Switching => unreachable!("stage switch is atomic"),
        }
    }

    fn observe(&mut self, feedback: Feedback) {
        match &mut self.stage {
            Stage::Init(init) => {
                init.observe(feedback);
                if init.is_finished() {
                    self.finish_init();
                }
            }
            Stage::Leader(l) => l.observe(feedback),
            Stage::Follower(f) => f.observe(feedback),
            Stage::Degraded(_) => {}
            Stage::Switching => unreachable!("stage switch is atomic"),
        }
    }

    fn is_degraded(&self) -> bool {
        match &self.stage {
            Stage::Init(init) => init.is_degraded(),
            Stage::Degraded(_) => true,
            Stage::Follower(f) => f.is_degraded(),
            _ => false,
        }
    }
}

/// Initialization succeeded for everyone: all learned the true `M` and the
/// ranks are `1..=M`. Returns the player index of each rank.
pub fn players_by_rank(players: &[MetcElimPlayer]) -> Option<Vec<usize>> {
    let m = players.len();
    let mut by_rank = vec![usize::MAX; m];
    for (idx, p) in players.iter().enumerate() {
        let (rank, count) = p.init_result()?;
        if count != m || rank == 0 || rank > m || by_rank[rank - 1] != usize::MAX {
            return None;
        }
        by_rank[rank - 1] = idx;
    }
    Some(by_rank)
}

/// The true means with rows reordered by rank, matching the leader's view.
pub fn means_by_rank(matrix: &RewardMatrix, by_rank: &[usize]) -> WeightTable {
    let mut w = WeightTable::zeros(matrix.players(), matrix.arms());
    for (r, &idx) in by_rank.iter().enumerate() {
        for k in 0..matrix.arms() {
            w.set(r, k, matrix.mean(idx, k));
        }
    }
    w
}

/// Evaluates the good event for a finished episode: initialization
/// succeeded and, at every elimination from epoch 2 on, the leader's
/// estimated utility of every matching inside the candidate edges was within
/// the epoch's budget.
pub fn good_event_monitor(
    players: &[MetcElimPlayer],
    matrix: &RewardMatrix,
) -> Result<GoodEventMonitor> {
    if players.len() != matrix.players() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} players", matrix.players()),
            got: format!("{}", players.len()),
        });
    }
    let Some(by_rank) = players_by_rank(players) else {
        return Ok(GoodEventMonitor::new(false));
    };
    let truth = means_by_rank(matrix, &by_rank);
    let mut monitor = GoodEventMonitor::new(true);
    let Some(records) = players[by_rank[0]].leader_records() else {
        // Initialization had not finished when the episode ended.
        return Ok(monitor);
    };
    for rec in records.iter().filter(|r| r.epoch >= 2) {
        monitor.record_estimates(
            rec.epoch,
            &truth,
            &rec.estimates,
            &|m, k| rec.edges_before.contains(m, k),
            rec.budget,
        )?;
    }
    Ok(monitor)
}
