//! Selfish-UCB: every player runs UCB1 on its own reward stream, collision
//! zeros included, ignoring the other players.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::simenv::{Feedback, Player};

/// `mean + sqrt(2 ln t / n)`; `+∞` for an arm never pulled.
pub fn ucb1_index(mean_hat: f64, n: u64, t: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    mean_hat + (2.0 * (t as f64).ln() / n as f64).sqrt()
}

/// How to pick among arms with equal index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Smallest arm. Identical players then act identically and keep
    /// colliding.
    #[default]
    Lexicographic,
    /// Uniformly at random among the tied arms.
    Random,
}

impl TieBreak {
    pub fn name(self) -> &'static str {
        match self {
            TieBreak::Lexicographic => "lex",
            TieBreak::Random => "random",
        }
    }
}

impl fmt::Display for TieBreak {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TieBreak {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lex" => Ok(TieBreak::Lexicographic),
            "random" => Ok(TieBreak::Random),
            other => Err(Error::InvalidConfig(format!(
                "unknown tie rule `{other}` (expected lex or random)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SelfishUcb {
    counts: Vec<u64>,
    sums: Vec<f64>,
    ties: TieBreak,
    rng: ChaCha8Rng,
    tied: Vec<usize>,
}

impl SelfishUcb {
    pub fn new(k: usize, ties: TieBreak, rng: ChaCha8Rng) -> Self {
        assert!(k >= 1, "at least one arm");
        Self {
            counts: vec![0; k],
            sums: vec![0.0; k],
            ties,
            rng,
            tied: Vec::with_capacity(k),
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    /// Rounds observed so far.
    pub fn rounds(&self) -> u64 {
        self.counts.iter().sum()
    }
}

impl Player for SelfishUcb {
    fn choose_arm(&mut self) -> usize {
        let t = self.rounds();
        let mut best = f64::NEG_INFINITY;
        self.tied.clear();
        for (arm, (&n, &s)) in self.counts.iter().zip(&self.sums).enumerate() {
            let mean = if n == 0 { 0.0 } else { s / n as f64 };
            let index = ucb1_index(mean, n, t);
            if index > best {
                best = index;
                self.tied.clear();
                self.tied.push(arm);
            } else if index == best {
                self.tied.push(arm);
            }
        }
        match self.ties {
            TieBreak::Lexicographic => self.tied[0],
            TieBreak::Random if self.tied.len() == 1 => self.tied[0],
            TieBreak::Random => self.tied[self.rng.random_range(0..self.tied.len())],
        }
    }

    fn observe(&mut self, fb: Feedback) {
        self.counts[fb.arm] += 1;
        self.sums[fb.arm] += fb.reward;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{RewardDist, RewardMatrix};
    use crate::seeding::{stream, Domain};
    use crate::simenv::run_episode;

    #[test]
    fn index_examples() {
        assert!((ucb1_index(0.5, 2, 10) - (0.5 + 10f64.ln().sqrt())).abs() < 1e-12);
        assert!((ucb1_index(0.5, 2, 10) - 2.017).abs() < 1e-3);
        assert_eq!(ucb1_index(0.3, 0, 5), f64::INFINITY);
        assert_eq!(ucb1_index(0.3, 1, 1), 0.3);
    }

    #[test]
    fn forced_first_pass() {
        let mut p = SelfishUcb::new(4, TieBreak::Lexicographic, stream(0, Domain::Player, 0));
        for expected in 0..4 {
            let arm = p.choose_arm();
            assert_eq!(arm, expected);
            p.observe(Feedback { arm, reward: 0.5, collided: false });
        }
    }

    #[test]
    fn collision_zeros_count() {
        let mut p = SelfishUcb::new(2, TieBreak::Lexicographic, stream(0, Domain::Player, 0));
        p.observe(Feedback { arm: 1, reward: 0.0, collided: true });
        assert_eq!(p.counts(), &[0, 1]);
        assert_eq!(p.sums(), &[0.0, 0.0]);
    }

    #[test]
    fn single_player_concentrates_on_best_arm() {
        let m = RewardMatrix::from_rows(vec![vec![0.9, 0.1]], RewardDist::Bernoulli).unwrap();
        let mut players = vec![SelfishUcb::new(2, TieBreak::Lexicographic, stream(3, Domain::Player, 0))];
        run_episode(&mut players, &m, 20_000, 3).unwrap();
        let c = players[0].counts();
        assert!(c[0] as f64 / 20_000.0 > 0.98, "{c:?}");
    }

    #[test]
    fn identical_players_lock_step() {
        let m = RewardMatrix::from_rows(vec![vec![0.9, 0.1], vec![0.9, 0.1]], RewardDist::Bernoulli)
            .unwrap();
        let mut players: Vec<SelfishUcb> = (0..2)
            .map(|i| SelfishUcb::new(2, TieBreak::Lexicographic, stream(0, Domain::Player, i)))
            .collect();
        let trace = run_episode(&mut players, &m, 500, 1).unwrap();
        assert_eq!(players[0].counts(), players[1].counts());
        assert!((trace.final_pseudo_regret() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn tie_rule_parse() {
        assert_eq!("random".parse::<TieBreak>().unwrap(), TieBreak::Random);
        assert!("coin".parse::<TieBreak>().is_err());
    }
}
