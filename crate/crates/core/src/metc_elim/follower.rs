//! Players of rank ≥ 2: decode the broadcast, explore their assigned arms,
//! report quantized means.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::protocol::{
    arm_field_width, decode_uint, dequantize, quantize_mean, size_field_width, EpochSchedule,
};
use crate::simenv::Feedback;

use super::params::{report_bits, rounds_per_matching, MetcElimConfig, Mode};

/// One reported estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Transmission {
    pub arm: usize,
    /// Empirical mean before clamping to `[0, 1]`.
    pub raw: f64,
    pub clamped: f64,
    /// The value the leader decodes.
    pub sent: f64,
    pub bits: u32,
}

/// What a follower decoded and sent in one epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerEpochRecord {
    pub epoch: u32,
    /// This player's arm in every candidate matching, in broadcast order.
    pub arms: Vec<usize>,
    /// Announced communication arms: the leader's, then this player's.
    pub comm_arms: (usize, usize),
    pub transmissions: Vec<Transmission>,
    pub broadcast_start: u64,
    pub explore_start: Option<u64>,
    pub report_start: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Broadcast,
    Explore,
    Report,
    Exploit(usize),
    /// Undecodable broadcast: plays uniformly random arms from now on.
    Degraded,
}

#[derive(Debug, Clone)]
pub(crate) struct Follower {
    cfg: MetcElimConfig,
    m: usize,
    rank: usize,
    p: u32,
    leader_arm: usize,
    own_arm: usize,
    sched: Option<EpochSchedule>,
    arms: Vec<usize>,
    sums: Vec<f64>,
    counts: Vec<u64>,
    phase: Phase,
    pos: u64,
    flags: Vec<bool>,
    outgoing: Vec<bool>,
    rng: ChaCha8Rng,
    round: u64,
    records: Vec<FollowerEpochRecord>,
    exploit_at: Option<u64>,
}

impl Follower {
    pub(crate) fn new(
        cfg: MetcElimConfig,
        rank: usize,
        m: usize,
        round: u64,
        rng: ChaCha8Rng,
    ) -> Self {
        let k = cfg.k;
        let mut f = Self {
            m,
            rank,
            p: 0,
            leader_arm: 0,
            own_arm: rank - 1,
            sched: None,
            arms: Vec::new(),
            sums: vec![0.0; k],
            counts: vec![0; k],
            phase: Phase::Broadcast,
            pos: 0,
            flags: Vec::new(),
            outgoing: Vec::new(),
            rng,
            round,
            records: Vec::new(),
            exploit_at: None,
            cfg,
        };
        f.begin_epoch();
        f
    }

    pub(crate) fn records(&self) -> &[FollowerEpochRecord] {
        &self.records
    }

    pub(crate) fn exploit_at(&self) -> Option<u64> {
        self.exploit_at
    }

    pub(crate) fn is_degraded(&self) -> bool {
        self.phase == Phase::Degraded
    }

    pub(crate) fn epoch(&self) -> u32 {
        self.p
    }

    fn begin_epoch(&mut self) {
        self.p += 1;
        self.phase = Phase::Broadcast;
        self.pos = 0;
        self.flags.clear();
        self.sched = None;
        self.records.push(FollowerEpochRecord {
            epoch: self.p,
            arms: Vec::new(),
            comm_arms: (self.leader_arm, self.own_arm),
            transmissions: Vec::new(),
            broadcast_start: self.round + 1,
            explore_start: None,
            report_start: None,
        });
    }

    fn header_len(&self) -> u64 {
        (self.m as u64 - 1) * size_field_width(self.m, self.cfg.k) as u64
    }

    fn last_record(&mut self) -> &mut FollowerEpochRecord {
        self.records.last_mut().expect("an epoch is in progress")
    }

    fn decode_header(&mut self) -> Option<EpochSchedule> {
        let (m, k) = (self.m, self.cfg.k);
        let w = size_field_width(m, k) as usize;
        let start = (self.rank - 2) * w;
        let size_c = decode_uint(&self.flags[start..start + w]) as usize;
        if size_c == 0 || size_c > m * k {
            return None;
        }
        Some(EpochSchedule {
            players: m,
            arms: k,
            size_c,
            rounds_per_matching: rounds_per_matching(self.p, self.cfg.c),
            bits_per_value: report_bits(&self.cfg, m, self.p),
        })
    }

    /// Decodes this player's slice; `None` on out-of-range values.
    fn decode_body(&mut self, sched: &EpochSchedule) -> Option<()> {
        let k = self.cfg.k;
        let l = arm_field_width(k) as usize;
        let read = |flags: &[bool], at: usize| decode_uint(&flags[at..at + l]) as usize;
        let start = sched.arms_window(self.rank).start as usize;
        let arms: Vec<usize> = (0..sched.size_c).map(|i| read(&self.flags, start + i * l)).collect();
        let comm = sched.comm_window(self.rank).start as usize;
        let leader_arm = read(&self.flags, comm);
        let own_arm = read(&self.flags, comm + l);
        if arms.iter().any(|&a| a >= k) || leader_arm >= k || own_arm >= k || leader_arm == own_arm
        {
            return None;
        }
        self.arms = arms.clone();
        self.leader_arm = leader_arm;
        self.own_arm = own_arm;
        let rec = self.last_record();
        rec.arms = arms;
        rec.comm_arms = (leader_arm, own_arm);
        Some(())
    }

    fn degrade(&mut self) {
        self.phase = Phase::Degraded;
    }

    fn end_broadcast(&mut self, sched: EpochSchedule) {
        if sched.exploits() {
            self.phase = Phase::Exploit(self.arms[0]);
            self.exploit_at = Some(self.round + 1);
            return;
        }
        self.phase = Phase::Explore;
        self.pos = 0;
        self.last_record().explore_start = Some(self.round + 1);
    }

    fn end_explore(&mut self, sched: EpochSchedule) {
        let mut distinct: Vec<usize> = Vec::new();
        for &a in &self.arms {
            if !distinct.contains(&a) {
                distinct.push(a);
            }
        }
        let bits = sched.bits_per_value;
        let mut outgoing = Vec::with_capacity(sched.slot_len() as usize);
        let mut sent = Vec::with_capacity(distinct.len());
        for arm in distinct {
            let raw = if self.counts[arm] > 0 {
                self.sums[arm] / self.counts[arm] as f64
            } else {
                0.0
            };
            let clamped = raw.clamp(0.0, 1.0);
            let q = quantize_mean(clamped, bits).expect("clamped value and valid width");
            sent.push(Transmission {
                arm,
                raw,
                clamped,
                sent: dequantize(&q),
                bits,
            });
            outgoing.extend_from_slice(q.bits());
        }
        outgoing.resize(sched.slot_len() as usize, false);
        self.outgoing = outgoing;
        let round = self.round;
        let rec = self.last_record();
        rec.transmissions = sent;
        rec.report_start = Some(round + 1);
        self.phase = Phase::Report;
        self.pos = 0;
    }

    pub(crate) fn choose_arm(&mut self) -> usize {
        match self.phase {
            Phase::Broadcast => self.own_arm,
            Phase::Explore => {
                let sched = self.sched.expect("schedule known while exploring");
                self.arms[(self.pos / sched.rounds_per_matching) as usize]
            }
            Phase::Report => {
                let sched = self.sched.expect("schedule known while reporting");
                let window = sched.report_window(self.rank);
                if window.contains(&self.pos) && self.outgoing[(self.pos - window.start) as usize]
                {
                    self.leader_arm
                } else {
                    self.own_arm
                }
            }
            Phase::Exploit(arm) => arm,
            Phase::Degraded => self.rng.random_range(0..self.cfg.k),
        }
    }

    pub(crate) fn observe(&mut self, fb: Feedback) {
        self.round += 1;
        match self.phase {
            Phase::Broadcast => {
                self.flags.push(fb.collided);
                self.pos += 1;
                if self.pos == self.header_len() {
                    match self.decode_header() {
                        Some(s) => self.sched = Some(s),
                        None => return self.degrade(),
                    }
                }
                if let Some(sched) = self.sched {
                    if self.pos == sched.broadcast_len() {
                        if self.decode_body(&sched).is_none() {
                            return self.degrade();
                        }
                        self.end_broadcast(sched);
                    }
                }
            }
            Phase::Explore => {
                let sched = self.sched.expect("schedule known while exploring");
                self.sums[fb.arm] += fb.reward;
                self.counts[fb.arm] += 1;
                self.pos += 1;
                if self.pos == sched.explore_len() {
                    self.end_explore(sched);
                }
            }
            Phase::Report => {
                let sched = self.sched.expect("schedule known while reporting");
                self.pos += 1;
                if self.pos == sched.report_len() {
                    if self.cfg.mode == Mode::Faithful {
                        self.sums.fill(0.0);
                        self.counts.fill(0);
                    }
                    self.begin_epoch();
                }
            }
            Phase::Exploit(_) | Phase::Degraded => {}
        }
    }
}
