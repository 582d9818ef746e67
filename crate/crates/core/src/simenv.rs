//! The lockstep game.
//!
//! Every round each player picks an arm, the environment resolves
//! collisions, samples rewards and hands each player its own
//! `(reward, collided)` pair. Nothing else is shared between players.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::assignment::{enumerate_matchings, max_weight_matching, WeightTable};
use crate::error::{Error, Result};
use crate::model::{utility, RewardDist, RewardMatrix};
use crate::seeding::{stream, Domain};

/// What one player observes after a round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub arm: usize,
    pub reward: f64,
    pub collided: bool,
}

/// A decentralized player: picks an arm, then sees its own feedback.
pub trait Player: Send {
    fn choose_arm(&mut self) -> usize;
    fn observe(&mut self, feedback: Feedback);
    /// True when the player fell back to uncoordinated play (failed
    /// initialization or an undecodable message).
    fn is_degraded(&self) -> bool {
        false
    }
}

impl<P: Player + ?Sized> Player for Box<P> {
    fn choose_arm(&mut self) -> usize {
        (**self).choose_arm()
    }

    fn observe(&mut self, feedback: Feedback) {
        (**self).observe(feedback)
    }

    fn is_degraded(&self) -> bool {
        (**self).is_degraded()
    }
}

/// Per-player result of one round.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoundOutcome {
    pub rewards: Vec<f64>,
    pub collided: Vec<bool>,
}

/// Reward sampling and collision resolution for one episode.
///
/// Each player has its own reward stream and consumes exactly one draw per
/// round, whatever it pulls, so a player's rewards do not depend on other
/// players' actions.
pub struct Environment {
    matrix: RewardMatrix,
    u_star: f64,
    rngs: Vec<ChaCha8Rng>,
    occupancy: Vec<u32>,
    round: u64,
}

impl Environment {
    pub fn new(matrix: RewardMatrix, seed: u64) -> Result<Self> {
        let u_star = optimal_utility(matrix.means())?;
        let rngs = (0..matrix.players())
            .map(|m| stream(seed, Domain::Environment, m as u64))
            .collect();
        let occupancy = vec![0; matrix.arms()];
        Ok(Self {
            matrix,
            u_star,
            rngs,
            occupancy,
            round: 0,
        })
    }

    pub fn matrix(&self) -> &RewardMatrix {
        &self.matrix
    }

    pub fn u_star(&self) -> f64 {
        self.u_star
    }

    /// Rounds played so far.
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn step(&mut self, actions: &[usize]) -> Result<RoundOutcome> {
        let mut out = RoundOutcome::default();
        self.step_into(actions, &mut out)?;
        Ok(out)
    }

    /// [`Environment::step`] reusing `out`'s buffers.
    pub fn step_into(&mut self, actions: &[usize], out: &mut RoundOutcome) -> Result<()> {
        let (players, arms) = (self.matrix.players(), self.matrix.arms());
        if actions.len() != players {
            return Err(Error::DimensionMismatch {
                expected: format!("{players} actions"),
                got: format!("{}", actions.len()),
            });
        }
        self.round += 1;
        for (player, &arm) in actions.iter().enumerate() {
            if arm >= arms {
                return Err(Error::ProtocolViolation {
                    player,
                    arm,
                    round: self.round,
                    k: arms,
                });
            }
        }

        self.occupancy.fill(0);
        for &arm in actions {
            self.occupancy[arm] += 1;
        }
        out.rewards.clear();
        out.collided.clear();
        let dist = self.matrix.dist();
        for (player, &arm) in actions.iter().enumerate() {
            let mu = self.matrix.mean(player, arm);
            let rng = &mut self.rngs[player];
            let y = match dist {
                RewardDist::Bernoulli => {
                    if rng.random::<f64>() < mu {
                        1.0
                    } else {
                        0.0
                    }
                }
                RewardDist::Gaussian { sigma2 } => {
                    let z: f64 = StandardNormal.sample(rng);
                    mu + sigma2.sqrt() * z
                }
            };
            let collided = self.occupancy[arm] > 1;
            out.collided.push(collided);
            out.rewards.push(if collided { 0.0 } else { y });
        }
        Ok(())
    }

    /// `U* − Σ_m μ[m][a_m]·1{no collision on a_m}`, never negative.
    pub fn instantaneous_pseudo_regret(&self, actions: &[usize]) -> f64 {
        let mut occupancy = vec![0u32; self.matrix.arms()];
        for &a in actions {
            occupancy[a] += 1;
        }
        let collected: f64 = actions
            .iter()
            .enumerate()
            .map(|(m, &a)| if occupancy[a] > 1 { 0.0 } else { self.matrix.mean(m, a) })
            .sum();
        (self.u_star - collected).max(0.0)
    }
}

/// `U*`. Enumeration is used when affordable so that `U*` is exactly the
/// largest of the floating-point utilities.
fn optimal_utility(w: &WeightTable) -> Result<f64> {
    match enumerate_matchings(w) {
        Ok(all) => Ok(all[0].1),
        Err(Error::EnumerationTooLarge { .. }) => utility(w, &max_weight_matching(w)?),
        Err(e) => Err(e),
    }
}

/// One row of a regret trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    /// `t·U* − Σ rewards`.
    pub regret: f64,
    pub pseudo_regret: f64,
}

/// Regret at the checkpoint rounds of one episode.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub seed: u64,
    pub horizon: u64,
    pub checkpoints: Vec<Checkpoint>,
    /// Some player ended the episode degraded.
    pub degraded: bool,
}

impl RegretTrace {
    pub fn final_pseudo_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.pseudo_regret)
    }

    pub fn final_regret(&self) -> f64 {
        self.checkpoints.last().map_or(0.0, |c| c.regret)
    }
}

/// `1, 2, 4, …` up to `horizon`, plus `horizon` itself.
pub fn checkpoint_grid(horizon: u64) -> Vec<u64> {
    let mut grid: Vec<u64> = std::iter::successors(Some(1u64), |t| t.checked_mul(2))
        .take_while(|&t| t <= horizon)
        .collect();
    if grid.last() != Some(&horizon) && horizon >= 1 {
        grid.push(horizon);
    }
    grid
}

/// Everything that happened in one round, for observers.
#[derive(Debug)]
pub struct RoundRecord<'a> {
    pub t: u64,
    pub actions: &'a [usize],
    pub outcome: &'a RoundOutcome,
    pub pseudo_regret_increment: f64,
}

/// Plays `horizon` rounds with `players` (player `m` is row `m` of the
/// matrix).
pub fn run_episode<P: Player>(
    players: &mut [P],
    matrix: &RewardMatrix,
    horizon: u64,
    seed: u64,
) -> Result<RegretTrace> {
    run_episode_observed(players, matrix, horizon, seed, |_| {})
}

/// [`run_episode`] calling `observer` after every round.
pub fn run_episode_observed<P: Player, F: FnMut(&RoundRecord<'_>)>(
    players: &mut [P],
    matrix: &RewardMatrix,
    horizon: u64,
    seed: u64,
    mut observer: F,
) -> Result<RegretTrace> {
    if horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    if players.len() != matrix.players() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} players", matrix.players()),
            got: format!("{}", players.len()),
        });
    }
    let mut env = Environment::new(matrix.clone(), seed)?;
    let grid = checkpoint_grid(horizon);
    let mut next = 0;
    let mut checkpoints = Vec::with_capacity(grid.len());
    let mut actions = vec![0; players.len()];
    let mut outcome = RoundOutcome::default();
    let (mut regret, mut pseudo) = (0.0, 0.0);

    for t in 1..=horizon {
        for (a, p) in actions.iter_mut().zip(players.iter_mut()) {
            *a = p.choose_arm();
        }
        env.step_into(&actions, &mut outcome)?;
        let inc = env.instantaneous_pseudo_regret(&actions);
        pseudo += inc;
        regret += env.u_star() - outcome.rewards.iter().sum::<f64>();
        for (m, p) in players.iter_mut().enumerate() {
            p.observe(Feedback {
                arm: actions[m],
                reward: outcome.rewards[m],
                collided: outcome.collided[m],
            });
        }
        observer(&RoundRecord {
            t,
            actions: &actions,
            outcome: &outcome,
            pseudo_regret_increment: inc,
        });
        if grid[next] == t {
            checkpoints.push(Checkpoint {
                t,
                regret,
                pseudo_regret: pseudo,
            });
            next += 1;
        }
    }

    Ok(RegretTrace {
        seed,
        horizon,
        checkpoints,
        degraded: players.iter().any(|p| p.is_degraded()),
    })
}

/// One epoch's worth of evidence for the good event.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochDeviation {
    pub epoch: u32,
    /// Largest `|Ũ(π) − U(π)|` over the checked matchings.
    pub worst: f64,
    pub budget: f64,
}

/// Tracks the good event: initialization succeeded and, in every epoch,
/// every matching made of candidate edges has its estimated utility within
/// the epoch's budget of the true one.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodEventMonitor {
    init_ok: bool,
    epochs: Vec<EpochDeviation>,
}

impl GoodEventMonitor {
    pub fn new(init_ok: bool) -> Self {
        Self {
            init_ok,
            epochs: Vec::new(),
        }
    }

    pub fn record(&mut self, epoch: u32, worst: f64, budget: f64) {
        self.epochs.push(EpochDeviation {
            epoch,
            worst,
            budget,
        });
    }

    /// Records the worst deviation between `estimates` and `truth` over all
    /// matchings whose edges satisfy `allowed`. Both tables must be indexed
    /// the same way.
    pub fn record_estimates(
        &mut self,
        epoch: u32,
        truth: &WeightTable,
        estimates: &WeightTable,
        allowed: &dyn Fn(usize, usize) -> bool,
        budget: f64,
    ) -> Result<()> {
        let mut worst: f64 = 0.0;
        for (pi, u) in enumerate_matchings(truth)? {
            if pi.edges().all(|(m, k)| allowed(m, k)) {
                worst = worst.max((utility(estimates, &pi)? - u).abs());
            }
        }
        self.record(epoch, worst, budget);
        Ok(())
    }

    pub fn init_ok(&self) -> bool {
        self.init_ok
    }

    pub fn epochs(&self) -> &[EpochDeviation] {
        &self.epochs
    }

    pub fn holds(&self) -> bool {
        self.init_ok && self.epochs.iter().all(|e| e.worst <= e.budget)
    }
}
