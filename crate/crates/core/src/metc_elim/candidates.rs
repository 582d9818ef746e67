//! The leader's elimination step: candidate edges `E` and candidate
//! matchings `C`.
//!
//! Both builders compute `π₁` and every forced matching over the edges in
//! `E` at the start of the step, so every matching in `C` uses only such
//! edges. `C` always starts with `π₁` and holds no duplicates.

use std::fmt;

use crate::assignment::{
    max_weight_matching_forced_within, max_weight_matching_within, WeightTable,
};
use crate::error::{Error, Result};
use crate::model::{utility, Matching};

/// A set of `(player, arm)` edges, iterated row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CandidateEdgeSet {
    players: usize,
    arms: usize,
    present: Vec<bool>,
}

impl CandidateEdgeSet {
    pub fn full(players: usize, arms: usize) -> Self {
        Self {
            players,
            arms,
            present: vec![true; players * arms],
        }
    }

    pub fn empty(players: usize, arms: usize) -> Self {
        Self {
            players,
            arms,
            present: vec![false; players * arms],
        }
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    pub fn contains(&self, player: usize, arm: usize) -> bool {
        player < self.players && arm < self.arms && self.present[player * self.arms + arm]
    }

    pub fn insert(&mut self, player: usize, arm: usize) {
        self.present[player * self.arms + arm] = true;
    }

    pub fn remove(&mut self, player: usize, arm: usize) {
        self.present[player * self.arms + arm] = false;
    }

    pub fn len(&self) -> usize {
        self.present.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.present
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i / self.arms, i % self.arms))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.iter().all(|(m, k)| other.contains(m, k))
    }

    pub fn covers(&self, pi: &Matching) -> bool {
        pi.edges().all(|(m, k)| self.contains(m, k))
    }
}

impl fmt::Debug for CandidateEdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set()
            .entries(self.iter().map(|(m, k)| (m + 1, k + 1)))
            .finish()
    }
}

/// Arms of `player` across `candidates`, in order of first appearance.
pub fn distinct_arms(candidates: &[Matching], player: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for pi in candidates {
        let arm = pi.arm(player);
        if !out.contains(&arm) {
            out.push(arm);
        }
    }
    out
}

fn best_within(estimates: &WeightTable, edges: &CandidateEdgeSet) -> Result<Matching> {
    if edges.players() != estimates.players() || edges.arms() != estimates.arms() {
        return Err(Error::DimensionMismatch {
            expected: format!("{}x{} edge set", estimates.players(), estimates.arms()),
            got: format!("{}x{}", edges.players(), edges.arms()),
        });
    }
    max_weight_matching_within(estimates, &|m, k| edges.contains(m, k)).ok_or_else(|| {
        Error::InvalidInput("candidate edges contain no complete matching".into())
    })
}

fn push_unique(list: &mut Vec<Matching>, pi: Matching) {
    if !list.contains(&pi) {
        list.push(pi);
    }
}

/// One forced matching per candidate edge: kept (and its matching added)
/// when its estimated gap to `π₁` is at most `threshold`, otherwise the edge
/// is eliminated.
pub fn build_candidates(
    estimates: &WeightTable,
    edges: &CandidateEdgeSet,
    threshold: f64,
) -> Result<(Vec<Matching>, CandidateEdgeSet)> {
    let best = best_within(estimates, edges)?;
    let best_u = utility(estimates, &best)?;
    let allowed = |m: usize, k: usize| edges.contains(m, k);
    let mut next = edges.clone();
    let mut candidates = vec![best];
    for (m, k) in edges.iter() {
        match max_weight_matching_forced_within(estimates, m, k, &allowed) {
            Some(pi) if best_u - utility(estimates, &pi)? <= threshold => {
                push_unique(&mut candidates, pi)
            }
            _ => next.remove(m, k),
        }
    }
    Ok((candidates, next))
}

/// Covering variant: `π₁` covers its edges; each still-uncovered candidate
/// edge either gets eliminated or contributes its forced matching, which
/// covers all of that matching's edges.
pub fn build_candidates_enhanced(
    estimates: &WeightTable,
    edges: &CandidateEdgeSet,
    threshold: f64,
) -> Result<(Vec<Matching>, CandidateEdgeSet)> {
    let best = best_within(estimates, edges)?;
    let best_u = utility(estimates, &best)?;
    let allowed = |m: usize, k: usize| edges.contains(m, k);
    let mut covered = CandidateEdgeSet::empty(edges.players(), edges.arms());
    for (m, k) in best.edges() {
        covered.insert(m, k);
    }
    let mut next = edges.clone();
    let mut candidates = vec![best];
    for (m, k) in edges.iter() {
        if covered.contains(m, k) {
            continue;
        }
        match max_weight_matching_forced_within(estimates, m, k, &allowed) {
            Some(pi) if best_u - utility(estimates, &pi)? <= threshold => {
                for (a, b) in pi.edges() {
                    covered.insert(a, b);
                }
                push_unique(&mut candidates, pi);
            }
            _ => next.remove(m, k),
        }
    }
    Ok((candidates, next))
}
