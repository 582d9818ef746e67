//! Rank election: musical chairs, then sequential hopping.
//!
//! After `T₀ = ⌈K ln(K/δ₀)⌉` rounds of musical chairs every player sits on
//! its own arm with probability at least `1 − δ₀`. During the next `2K − 2`
//! rounds a player on arm `k` waits `2k − 2` rounds on it, sweeps arms
//! `k+1..K`, and idles back on arm `k`. Players on arms `k₁ < k₂` meet
//! exactly once, in round `T₀ + k₁ + k₂ − 2`, while the lower one sweeps and
//! the higher one waits; counting collisions gives both the rank and `M`.
//!
//! Idling on the player's own arm rather than on a shared arm keeps the idle
//! rounds collision-free: every sweep reaching arm `k` happens while its
//! owner is still waiting.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::simenv::{Feedback, Player};

/// `T₀ = max(1, ⌈K ln(K/δ₀)⌉)`.
pub fn musical_chairs_rounds(k: usize, delta0: f64) -> u64 {
    let kf = k as f64;
    ((kf * (kf / delta0).ln()).ceil() as u64).max(1)
}

/// `T₀ + 2K − 2`.
pub fn init_length(k: usize, delta0: f64) -> u64 {
    musical_chairs_rounds(k, delta0) + 2 * k as u64 - 2
}

/// One player's run of the initialization. Also usable as a standalone
/// [`Player`]; after finishing it keeps pulling its occupied arm.
#[derive(Debug, Clone)]
pub struct InitProcedure {
    k: usize,
    t0: u64,
    round: u64,
    occupied: Option<usize>,
    rank: usize,
    players: usize,
    rng: ChaCha8Rng,
}

impl InitProcedure {
    pub fn new(k: usize, delta0: f64, rng: ChaCha8Rng) -> Self {
        assert!(k >= 1, "at least one arm");
        Self {
            k,
            t0: musical_chairs_rounds(k, delta0),
            round: 0,
            occupied: None,
            rank: 1,
            players: 1,
            rng,
        }
    }

    pub fn len(&self) -> u64 {
        self.t0 + 2 * self.k as u64 - 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn musical_chairs_rounds(&self) -> u64 {
        self.t0
    }

    pub fn is_finished(&self) -> bool {
        self.round >= self.len()
    }

    pub fn occupied_arm(&self) -> Option<usize> {
        self.occupied
    }

    /// `(rank, M)` once finished, if an arm was occupied.
    pub fn result(&self) -> Option<(usize, usize)> {
        (self.is_finished() && self.occupied.is_some()).then_some((self.rank, self.players))
    }

    pub fn into_rng(self) -> ChaCha8Rng {
        self.rng
    }

    /// Hopping-phase arm for a player on zero-based arm `arm` at hopping
    /// offset `h` (zero-based).
    fn hop_arm(&self, arm: usize, h: u64) -> usize {
        let k1 = arm as u64 + 1;
        let wait = 2 * k1 - 2;
        let sweep_end = self.k as u64 + k1 - 2;
        if h < wait {
            arm
        } else if h < sweep_end {
            (k1 + (h - wait)) as usize
        } else {
            arm
        }
    }
}

impl Player for InitProcedure {
    fn choose_arm(&mut self) -> usize {
        match self.occupied {
            None => self.rng.random_range(0..self.k),
            Some(arm) if self.round >= self.t0 && !self.is_finished() => {
                self.hop_arm(arm, self.round - self.t0)
            }
            Some(arm) => arm,
        }
    }

    fn observe(&mut self, fb: Feedback) {
        if self.is_finished() {
            self.round += 1;
            return;
        }
        if self.round < self.t0 {
            if self.occupied.is_none() && !fb.collided {
                self.occupied = Some(fb.arm);
            }
        } else if let Some(arm) = self.occupied {
            let h = self.round - self.t0;
            let wait = 2 * arm as u64;
            if fb.collided && h < wait {
                self.rank += 1;
                self.players += 1;
            } else if fb.collided && h < self.k as u64 + arm as u64 - 1 {
                self.players += 1;
            }
        }
        self.round += 1;
    }

    fn is_degraded(&self) -> bool {
        self.round >= self.t0 && self.occupied.is_none()
    }
}
