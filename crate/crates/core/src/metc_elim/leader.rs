//! The rank-1 player: eliminates, broadcasts the candidate list, explores,
//! and collects the followers' estimates.

use crate::assignment::WeightTable;
use crate::model::Matching;
use crate::protocol::{
    arm_field_width, dequantize, encode_uint, receiver_decode, sender_round_action,
    size_field_width, EpochSchedule,
};
use crate::simenv::Feedback;

use super::candidates::{
    build_candidates, build_candidates_enhanced, distinct_arms, CandidateEdgeSet,
};
use super::params::{
    build_threshold, good_event_budget, report_bits, rounds_per_matching, MetcElimConfig, Mode,
};

/// What the leader did in one epoch. Rounds are one-based and count from
/// the start of the run, initialization included.
#[derive(Debug, Clone, PartialEq)]
pub struct LeaderEpochRecord {
    pub epoch: u32,
    /// Estimates the candidates were built from (rows by rank).
    pub estimates: WeightTable,
    pub edges_before: CandidateEdgeSet,
    pub edges_after: CandidateEdgeSet,
    pub threshold: f64,
    /// Allowed estimation error under the good event.
    pub budget: f64,
    pub candidates: Vec<Matching>,
    /// Communication arms announced in this epoch, by rank.
    pub comm_arms: Vec<usize>,
    pub schedule: EpochSchedule,
    pub broadcast_start: u64,
    pub explore_start: Option<u64>,
    pub report_start: Option<u64>,
    /// First round after the report block.
    pub end: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Broadcast,
    Explore,
    Report,
    Exploit(usize),
}

#[derive(Debug, Clone)]
pub(crate) struct Leader {
    cfg: MetcElimConfig,
    m: usize,
    p: u32,
    edges: CandidateEdgeSet,
    estimates: WeightTable,
    candidates: Vec<Matching>,
    comm: Vec<usize>,
    next_comm: Vec<usize>,
    sched: EpochSchedule,
    sums: Vec<f64>,
    counts: Vec<u64>,
    phase: Phase,
    pos: u64,
    broadcast: Vec<usize>,
    flags: Vec<bool>,
    /// Rounds played so far, initialization included.
    round: u64,
    records: Vec<LeaderEpochRecord>,
    exploit_at: Option<u64>,
}

impl Leader {
    pub(crate) fn new(cfg: MetcElimConfig, m: usize, round: u64) -> Self {
        let k = cfg.k;
        let mut leader = Self {
            m,
            p: 0,
            edges: CandidateEdgeSet::full(m, k),
            estimates: WeightTable::zeros(m, k),
            candidates: Vec::new(),
            comm: (0..m).collect(),
            next_comm: Vec::new(),
            sched: EpochSchedule {
                players: m,
                arms: k,
                size_c: 0,
                rounds_per_matching: 0,
                bits_per_value: 0,
            },
            sums: vec![0.0; k],
            counts: vec![0; k],
            phase: Phase::Broadcast,
            pos: 0,
            broadcast: Vec::new(),
            flags: Vec::new(),
            round,
            records: Vec::new(),
            exploit_at: None,
            cfg,
        };
        leader.begin_epoch();
        leader
    }

    pub(crate) fn records(&self) -> &[LeaderEpochRecord] {
        &self.records
    }

    pub(crate) fn edges(&self) -> &CandidateEdgeSet {
        &self.edges
    }

    pub(crate) fn exploit_at(&self) -> Option<u64> {
        self.exploit_at
    }

    pub(crate) fn epoch(&self) -> u32 {
        self.p
    }

    fn begin_epoch(&mut self) {
        self.p += 1;
        let (m, k, p) = (self.m, self.cfg.k, self.p);
        let threshold = build_threshold(&self.cfg, m, p);
        let build = match self.cfg.mode {
            Mode::Faithful => build_candidates,
            Mode::Enhanced => build_candidates_enhanced,
        };
        // The edge set always keeps the previous first candidate, so a
        // complete matching exists.
        let (candidates, edges) = build(&self.estimates, &self.edges, threshold)
            .expect("candidate edges always contain a complete matching");
        let edges_before = std::mem::replace(&mut self.edges, edges);
        self.candidates = candidates;
        self.next_comm = self.candidates[0].assignment().to_vec();
        self.sched = EpochSchedule {
            players: m,
            arms: k,
            size_c: self.candidates.len(),
            rounds_per_matching: rounds_per_matching(p, self.cfg.c),
            bits_per_value: report_bits(&self.cfg, m, p),
        };

        let w = size_field_width(m, k);
        let l = arm_field_width(k);
        let own = self.comm[0];
        let mut acts = Vec::with_capacity(self.sched.broadcast_len() as usize);
        let send = |acts: &mut Vec<usize>, value: usize, width: u32, target: usize| {
            let bits = encode_uint(value as u64, width).expect("field widths fit their values");
            for &b in bits.bits() {
                acts.push(sender_round_action(b, own, target).expect("distinct communication arms"));
            }
        };
        for r in 2..=m {
            send(&mut acts, self.candidates.len(), w, self.comm[r - 1]);
        }
        for r in 2..=m {
            let target = self.comm[r - 1];
            for pi in &self.candidates {
                send(&mut acts, pi.arm(r - 1), l, target);
            }
            send(&mut acts, self.next_comm[0], l, target);
            send(&mut acts, self.next_comm[r - 1], l, target);
        }
        debug_assert_eq!(acts.len() as u64, self.sched.broadcast_len());
        self.broadcast = acts;

        self.records.push(LeaderEpochRecord {
            epoch: p,
            estimates: self.estimates.clone(),
            edges_before,
            edges_after: self.edges.clone(),
            threshold,
            budget: if p >= 2 { good_event_budget(&self.cfg, m, p) } else { f64::INFINITY },
            candidates: self.candidates.clone(),
            comm_arms: self.next_comm.clone(),
            schedule: self.sched,
            broadcast_start: self.round + 1,
            explore_start: None,
            report_start: None,
            end: None,
        });

        self.phase = Phase::Broadcast;
        self.pos = 0;
        if self.broadcast.is_empty() {
            self.end_broadcast();
        }
    }

    fn end_broadcast(&mut self) {
        self.comm = self.next_comm.clone();
        if self.sched.exploits() {
            self.phase = Phase::Exploit(self.candidates[0].arm(0));
            self.exploit_at = Some(self.round + 1);
            return;
        }
        self.phase = Phase::Explore;
        self.pos = 0;
        self.last_record().explore_start = Some(self.round + 1);
    }

    fn end_explore(&mut self) {
        self.last_record().report_start = Some(self.round + 1);
        self.phase = Phase::Report;
        self.pos = 0;
        self.flags.clear();
        if self.sched.report_len() == 0 {
            self.end_epoch();
        }
    }

    fn end_epoch(&mut self) {
        let (m, k) = (self.m, self.cfg.k);
        let faithful = self.cfg.mode == Mode::Faithful;
        for arm in 0..k {
            if self.counts[arm] > 0 {
                self.estimates.set(0, arm, self.sums[arm] / self.counts[arm] as f64);
            } else if faithful {
                self.estimates.set(0, arm, 0.0);
            }
        }
        let bpv = self.sched.bits_per_value as usize;
        for r in 2..=m {
            if faithful {
                for arm in 0..k {
                    self.estimates.set(r - 1, arm, 0.0);
                }
            }
            let start = self.sched.report_window(r).start as usize;
            for (i, arm) in distinct_arms(&self.candidates, r - 1).into_iter().enumerate() {
                let from = start + i * bpv;
                let value = dequantize(&receiver_decode(&self.flags[from..from + bpv]));
                self.estimates.set(r - 1, arm, value);
            }
        }
        if faithful {
            self.sums.fill(0.0);
            self.counts.fill(0);
        }
        self.last_record().end = Some(self.round + 1);
        self.begin_epoch();
    }

    fn last_record(&mut self) -> &mut LeaderEpochRecord {
        self.records.last_mut().expect("an epoch is in progress")
    }

    pub(crate) fn choose_arm(&self) -> usize {
        match self.phase {
            Phase::Broadcast => self.broadcast[self.pos as usize],
            Phase::Explore => {
                self.candidates[(self.pos / self.sched.rounds_per_matching) as usize].arm(0)
            }
            Phase::Report => self.comm[0],
            Phase::Exploit(arm) => arm,
        }
    }

    pub(crate) fn observe(&mut self, fb: Feedback) {
        self.round += 1;
        match self.phase {
            Phase::Broadcast => {
                self.pos += 1;
                if self.pos == self.broadcast.len() as u64 {
                    self.end_broadcast();
                }
            }
            Phase::Explore => {
                self.sums[fb.arm] += fb.reward;
                self.counts[fb.arm] += 1;
                self.pos += 1;
                if self.pos == self.sched.explore_len() {
                    self.end_explore();
                }
            }
            Phase::Report => {
                self.flags.push(fb.collided);
                self.pos += 1;
                if self.pos == self.sched.report_len() {
                    self.end_epoch();
                }
            }
            Phase::Exploit(_) => {}
        }
    }
}
