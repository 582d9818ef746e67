//! Unknown horizon: restart with assumed horizons `1, 2, 4, …`.

use crate::simenv::{Feedback, Player};

/// Lengths of the instances a doubling run of `horizon` rounds goes through;
/// the last one is cut short.
pub fn instance_lengths(horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut left = horizon;
    let mut len = 1u64;
    while left > 0 {
        out.push(len.min(left));
        left = left.saturating_sub(len);
        len = len.saturating_mul(2);
    }
    out
}

/// Runs fresh players built by `factory(instance, assumed_horizon)` for
/// `1, 2, 4, …` rounds in turn. Instances share no state.
pub struct Doubling<P, F> {
    factory: F,
    current: Option<P>,
    instance: u32,
    left_in_instance: u64,
    degraded: bool,
}

impl<P: Player, F: FnMut(u32, u64) -> P + Send> Doubling<P, F> {
    pub fn new(factory: F) -> Self {
        Self {
            factory,
            current: None,
            instance: 0,
            left_in_instance: 0,
            degraded: false,
        }
    }

    /// Instances started so far.
    pub fn instances(&self) -> u32 {
        self.instance
    }

    pub fn current(&self) -> Option<&P> {
        self.current.as_ref()
    }
}

impl<P: Player, F: FnMut(u32, u64) -> P + Send> Player for Doubling<P, F> {
    fn choose_arm(&mut self) -> usize {
        if self.left_in_instance == 0 {
            if let Some(old) = &self.current {
                self.degraded |= old.is_degraded();
            }
            let assumed = 1u64.checked_shl(self.instance).unwrap_or(u64::MAX);
            self.current = Some((self.factory)(self.instance, assumed));
            self.instance += 1;
            self.left_in_instance = assumed;
        }
        self.current.as_mut().expect("instance started above").choose_arm()
    }

    fn observe(&mut self, feedback: Feedback) {
        self.left_in_instance -= 1;
        self.current.as_mut().expect("observe follows choose_arm").observe(feedback);
    }

    fn is_degraded(&self) -> bool {
        self.degraded || self.current.as_ref().is_some_and(|p| p.is_degraded())
    }
}
