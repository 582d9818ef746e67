//! Communication over forced collisions.
//!
//! A sender transmits a bit to a receiver sitting on its communication arm by
//! pulling that arm (bit 1, the receiver sees a collision) or its own
//! communication arm (bit 0). With distinct communication arms nobody else
//! is disturbed.
//!
//! The epoch schedule below is pure arithmetic over values every player
//! knows, so the leader and all followers agree on every phase boundary.
//!
//! ```
//! use mpbandit::protocol::{dequantize, quantize_mean};
//!
//! let bits = quantize_mean(0.9, 2).unwrap();
//! assert_eq!(bits.to_string(), "11");
//! assert_eq!(dequantize(&bits), 0.75);
//! ```

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An ordered sequence of bits, most significant first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString(Vec<bool>);

impl BitString {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

impl FromStr for BitString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidInput(format!("`{other}` is not a bit"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(BitString)
    }
}

/// Largest supported value width.
pub const MAX_VALUE_BITS: u32 = 63;

/// The `b` most significant fractional binary digits of `x ∈ [0, 1]`; `1.0`
/// maps to all ones. The decoded value never exceeds `x` and is within
/// `2^-b` of it.
pub fn quantize_mean(x: f64, b: u32) -> Result<BitString> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("cannot quantize {x}: outside [0, 1]")));
    }
    if !(1..=MAX_VALUE_BITS).contains(&b) {
        return Err(Error::InvalidInput(format!(
            "bit count must be in 1..={MAX_VALUE_BITS}, got {b}"
        )));
    }
    let top = (1u64 << b) - 1;
    // Scaling by a power of two is exact, so the floor is exact too.
    let v = ((x * (1u64 << b) as f64).floor() as u64).min(top);
    encode_uint(v, b)
}

/// `Σ bit_i 2^-i` with `i` counted from 1.
pub fn dequantize(bits: &BitString) -> f64 {
    let mut value = 0.0;
    let mut weight = 0.5;
    for &b in bits.bits() {
        if b {
            value += weight;
        }
        weight *= 0.5;
    }
    value
}

/// `value` in exactly `width` bits, most significant first.
pub fn encode_uint(value: u64, width: u32) -> Result<BitString> {
    if width < 64 && value >> width != 0 {
        return Err(Error::InvalidInput(format!("{value} does not fit in {width} bits")));
    }
    Ok(BitString(
        (0..width).rev().map(|i| (value >> i) & 1 == 1).collect(),
    ))
}

pub fn decode_uint(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| acc << 1 | b as u64)
}

/// Arm the sender pulls to transmit `bit` to the receiver on `target_arm`.
pub fn sender_round_action(bit: bool, own_arm: usize, target_arm: usize) -> Result<usize> {
    if own_arm == target_arm {
        return Err(Error::InvalidCommPlan(format!(
            "sender and receiver share communication arm {own_arm}"
        )));
    }
    Ok(if bit { target_arm } else { own_arm })
}

/// Bits read by a receiver that sat on its communication arm: a collision
/// is a 1.
pub fn receiver_decode(collisions: &[bool]) -> BitString {
    BitString(collisions.to_vec())
}

/// `⌈lg n⌉`, with `ceil_lg(0) = ceil_lg(1) = 0`.
pub fn ceil_lg(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Width of the candidate-list size field: `⌈lg(MK + 1)⌉`.
pub fn size_field_width(players: usize, arms: usize) -> u32 {
    ceil_lg((players * arms) as u64 + 1)
}

/// Width of an arm index: `⌈lg K⌉`.
pub fn arm_field_width(arms: usize) -> u32 {
    ceil_lg(arms as u64)
}

/// Rounds spent communicating in one epoch: the leader's broadcast block
/// plus the followers' report block.
pub fn comm_phase_length(
    players: usize,
    arms: usize,
    size_c: usize,
    bits_per_value: u32,
    values_per_follower: usize,
) -> u64 {
    let followers = players.saturating_sub(1) as u64;
    let w = size_field_width(players, arms) as u64;
    let l = arm_field_width(arms) as u64;
    followers * (w + size_c as u64 * l + 2 * l)
        + followers * values_per_follower as u64 * bits_per_value as u64
}

/// Communication arms in force, indexed by rank − 1 (the leader first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommPlan {
    arms: Vec<usize>,
}

impl CommPlan {
    pub fn new(arms: Vec<usize>, k: usize) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::InvalidCommPlan("no players".into()));
        }
        let mut seen = vec![false; k];
        for &a in &arms {
            if a >= k {
                return Err(Error::InvalidCommPlan(format!("arm {a} out of range for K = {k}")));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(Error::InvalidCommPlan(format!("arm {a} used twice")));
            }
        }
        Ok(Self { arms })
    }

    /// Before any matching is known each player uses its rank: rank `r`
    /// sits on arm `r − 1`.
    pub fn by_rank(players: usize, k: usize) -> Result<Self> {
        Self::new((0..players).collect(), k)
    }

    pub fn leader_arm(&self) -> usize {
        self.arms[0]
    }

    /// Communication arm of the player with one-based `rank`.
    pub fn arm_of(&self, rank: usize) -> usize {
        self.arms[rank - 1]
    }

    pub fn arms(&self) -> &[usize] {
        &self.arms
    }
}

/// Round layout of one epoch after the candidate list is fixed.
///
/// Broadcast block (offsets from its start):
/// 1. header pass: `size(C)` to each follower in rank order, `W` rounds each;
/// 2. one slice per follower in rank order: its arm in every candidate
///    matching (`L` bits each), then the next leader and follower
///    communication arms (`L` bits each).
///
/// Then exploration (`size(C) · rounds_per_matching`) unless `size(C) = 1`,
/// and the report block: one fixed slot of `min(size(C), K)` values per
/// follower in rank order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochSchedule {
    pub players: usize,
    pub arms: usize,
    pub size_c: usize,
    pub rounds_per_matching: u64,
    pub bits_per_value: u32,
}

impl EpochSchedule {
    fn w(&self) -> u64 {
        size_field_width(self.players, self.arms) as u64
    }

    fn l(&self) -> u64 {
        arm_field_width(self.arms) as u64
    }

    fn followers(&self) -> u64 {
        self.players.saturating_sub(1) as u64
    }

    pub fn header_len(&self) -> u64 {
        self.followers() * self.w()
    }

    /// Header window of the follower with `rank ≥ 2`.
    pub fn header_window(&self, rank: usize) -> Range<u64> {
        let start = (rank as u64 - 2) * self.w();
        start..start + self.w()
    }

    pub fn slice_len(&self) -> u64 {
        (self.size_c as u64 + 2) * self.l()
    }

    /// Candidate-arm bits for follower `rank`.
    pub fn arms_window(&self, rank: usize) -> Range<u64> {
        let start = self.header_len() + (rank as u64 - 2) * self.slice_len();
        start..start + self.size_c as u64 * self.l()
    }

    /// Communication-arm bits (leader's, then the follower's) for `rank`.
    pub fn comm_window(&self, rank: usize) -> Range<u64> {
        let end = self.header_len() + (rank as u64 - 1) * self.slice_len();
        end - 2 * self.l()..end
    }

    pub fn broadcast_len(&self) -> u64 {
        self.header_len() + self.followers() * self.slice_len()
    }

    pub fn exploits(&self) -> bool {
        self.size_c == 1
    }

    pub fn explore_len(&self) -> u64 {
        if self.exploits() {
            0
        } else {
            (self.size_c as u64).saturating_mul(self.rounds_per_matching)
        }
    }

    pub fn values_per_follower(&self) -> usize {
        self.size_c.min(self.arms)
    }

    pub fn slot_len(&self) -> u64 {
        self.values_per_follower() as u64 * self.bits_per_value as u64
    }

    /// Report slot of follower `rank`, relative to the report block.
    pub fn report_window(&self, rank: usize) -> Range<u64> {
        let start = (rank as u64 - 2) * self.slot_len();
        start..start + self.slot_len()
    }

    pub fn report_len(&self) -> u64 {
        if self.exploits() {
            0
        } else {
            self.followers() * self.slot_len()
        }
    }

    /// Broadcast plus report rounds; agrees with [`comm_phase_length`]
    /// whenever a report block happens.
    pub fn comm_len(&self) -> u64 {
        self.broadcast_len() + self.report_len()
    }
}
