//! Confidence widths, thresholds and bit budgets per epoch.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::RewardDist;

/// Main-text behaviour or the practical variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Per-epoch estimates, threshold `4Mε_p`, `⌈(p^c+1)/2⌉`-bit reports,
    /// one forced matching per candidate edge.
    Faithful,
    /// Estimates over all pulls so far, threshold `2.2Mε′`, `b`-bit reports,
    /// greedy covering of candidate edges.
    Enhanced,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Faithful => "faithful",
            Mode::Enhanced => "enhanced",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "faithful" => Ok(Mode::Faithful),
            "enhanced" => Ok(Mode::Enhanced),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode `{other}` (expected faithful or enhanced)"
            ))),
        }
    }
}

/// Settings shared by every player of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct MetcElimConfig {
    pub k: usize,
    /// Horizon the players assume.
    pub horizon: u64,
    pub c: u32,
    pub mode: Mode,
    pub dist: RewardDist,
}

impl MetcElimConfig {
    /// `c = 1`, enhanced mode, Bernoulli rewards.
    pub fn new(k: usize, horizon: u64) -> Self {
        Self {
            k,
            horizon,
            c: 1,
            mode: Mode::Enhanced,
            dist: RewardDist::Bernoulli,
        }
    }

    pub fn with_c(mut self, c: u32) -> Self {
        self.c = c;
        self
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_dist(mut self, dist: RewardDist) -> Self {
        self.dist = dist;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidConfig("horizon must be at least 1".into()));
        }
        if self.c == 0 {
            return Err(Error::InvalidConfig("c must be at least 1".into()));
        }
        if let RewardDist::Gaussian { sigma2 } = self.dist {
            if !(sigma2 > 0.0 && sigma2.is_finite()) {
                return Err(Error::InvalidConfig(format!("sigma2 must be positive, got {sigma2}")));
            }
        }
        Ok(())
    }

    /// Failure probability handed to initialization: `1/(KT)`.
    pub fn init_delta(&self) -> f64 {
        1.0 / (self.k as f64 * self.horizon as f64)
    }
}

/// `p^c` as a float.
pub fn epoch_exponent(p: u32, c: u32) -> f64 {
    (p as f64).powi(c as i32)
}

/// `δ = 1/(M²KT²)`.
pub fn delta(m: usize, k: usize, t: u64) -> f64 {
    1.0 / ((m * m) as f64 * k as f64 * (t as f64) * (t as f64))
}

/// `ln(2/δ) = ln(2M²KT²)`, in log form so it never overflows.
fn ln_two_over_delta(m: usize, k: usize, t: u64) -> f64 {
    2f64.ln() + 2.0 * (m as f64).ln() + (k as f64).ln() + 2.0 * (t as f64).ln()
}

/// `ε_p = sqrt(ln(2/δ) / 2^(1+p^c))`. `p = 0` gives `ε_0`.
pub fn epsilon(p: u32, c: u32, m: usize, k: usize, t: u64) -> f64 {
    let e = if p == 0 { 0.0 } else { epoch_exponent(p, c) };
    (ln_two_over_delta(m, k, t) / (1.0 + e).exp2()).sqrt()
}

/// Sub-Gaussian width `sqrt(σ² ln(2/δ) / 2^(p^c − 1))`.
pub fn gaussian_epsilon(p: u32, c: u32, sigma2: f64, m: usize, k: usize, t: u64) -> f64 {
    let e = if p == 0 { 0.0 } else { epoch_exponent(p, c) };
    (sigma2 * ln_two_over_delta(m, k, t) / (e - 1.0).exp2()).sqrt()
}

fn dist_epsilon(dist: RewardDist, p: u32, c: u32, m: usize, k: usize, t: u64) -> f64 {
    match dist {
        RewardDist::Bernoulli => epsilon(p, c, m, k, t),
        RewardDist::Gaussian { sigma2 } => gaussian_epsilon(p, c, sigma2, m, k, t),
    }
}

/// `2^(p^c)` pulls per candidate matching, saturating.
pub fn rounds_per_matching(p: u32, c: u32) -> u64 {
    let e = epoch_exponent(p, c);
    if e >= 63.0 {
        u64::MAX
    } else {
        1u64 << e as u32
    }
}

/// `⌈(p^c + 1)/2⌉`, capped at the protocol's value width.
pub fn trunc_bits(p: u32, c: u32) -> u32 {
    ((epoch_exponent(p, c) + 1.0) / 2.0)
        .ceil()
        .min(crate::protocol::MAX_VALUE_BITS as f64) as u32
}

/// Main-text parameters of epoch `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochParams {
    pub p: u32,
    pub c: u32,
    pub delta: f64,
    pub epsilon_p: f64,
    pub trunc_bits: u32,
}

impl EpochParams {
    pub fn new(p: u32, c: u32, m: usize, k: usize, t: u64) -> Self {
        Self {
            p,
            c,
            delta: delta(m, k, t),
            epsilon_p: epsilon(p, c, m, k, t),
            trunc_bits: trunc_bits(p, c),
        }
    }
}

/// `N_p = Σ_{i=1..p} 2^(i^c)`: pulls of every candidate edge after epoch `p`.
pub fn pulls_through(p: u32, c: u32) -> f64 {
    (1..=p).map(|i| epoch_exponent(i, c).exp2()).sum()
}

/// `ε′_p = sqrt(ln(M²TK) / (2N_p))`, or `sqrt(2σ² ln(M²TK) / N_p)` for
/// Gaussian rewards. `ε′_0 = ∞`.
pub fn epsilon_prime(p: u32, c: u32, m: usize, k: usize, t: u64, dist: RewardDist) -> f64 {
    if p == 0 {
        return f64::INFINITY;
    }
    let ln = 2.0 * (m as f64).ln() + (t as f64).ln() + (k as f64).ln();
    let n = pulls_through(p, c);
    match dist {
        RewardDist::Bernoulli => (ln / (2.0 * n)).sqrt(),
        RewardDist::Gaussian { sigma2 } => (2.0 * sigma2 * ln / n).sqrt(),
    }
}

/// Largest report width in enhanced mode: beyond this an `f64` mean has no
/// more bits to send.
pub const MAX_ENHANCED_BITS: u32 = 53;

/// `b = ⌈−lg(0.1·ε′)⌉`, clamped to `1..=53`.
pub fn enhanced_bits(epsilon_prime: f64) -> u32 {
    let b = (-(0.1 * epsilon_prime).log2()).ceil();
    if b.is_nan() || b < 1.0 {
        1
    } else {
        b.min(MAX_ENHANCED_BITS as f64) as u32
    }
}

/// Practical-variant parameters after epoch `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnhancedParams {
    pub p: u32,
    pub n_p: f64,
    pub epsilon_prime: f64,
    pub bits: u32,
    pub threshold: f64,
}

impl EnhancedParams {
    pub fn new(p: u32, c: u32, m: usize, k: usize, t: u64, dist: RewardDist) -> Self {
        let epsilon_prime = epsilon_prime(p, c, m, k, t, dist);
        Self {
            p,
            n_p: pulls_through(p, c),
            epsilon_prime,
            bits: enhanced_bits(epsilon_prime),
            threshold: 2.2 * m as f64 * epsilon_prime,
        }
    }
}

/// Elimination threshold used when building the candidates of epoch `p`.
///
/// Faithful: `4Mε_p`. Enhanced: `2.2Mε′_{p−1}`, the width of the estimates
/// actually available (infinite in epoch 1, where nothing is known).
pub fn build_threshold(cfg: &MetcElimConfig, m: usize, p: u32) -> f64 {
    let mf = m as f64;
    match cfg.mode {
        Mode::Faithful => 4.0 * mf * dist_epsilon(cfg.dist, p, cfg.c, m, cfg.k, cfg.horizon),
        Mode::Enhanced => 2.2 * mf * epsilon_prime(p - 1, cfg.c, m, cfg.k, cfg.horizon, cfg.dist),
    }
}

/// Allowed deviation of estimated utilities at the build of epoch `p`
/// under the good event: `2Mε_{p−1}` (faithful) or `1.1Mε′_{p−1}`
/// (enhanced, half its threshold).
pub fn good_event_budget(cfg: &MetcElimConfig, m: usize, p: u32) -> f64 {
    let mf = m as f64;
    match cfg.mode {
        Mode::Faithful => 2.0 * mf * dist_epsilon(cfg.dist, p - 1, cfg.c, m, cfg.k, cfg.horizon),
        Mode::Enhanced => 1.1 * mf * epsilon_prime(p - 1, cfg.c, m, cfg.k, cfg.horizon, cfg.dist),
    }
}

/// Bits per reported value at the end of epoch `p`.
pub fn report_bits(cfg: &MetcElimConfig, m: usize, p: u32) -> u32 {
    match cfg.mode {
        Mode::Faithful => trunc_bits(p, cfg.c),
        Mode::Enhanced => {
            enhanced_bits(epsilon_prime(p, cfg.c, m, cfg.k, cfg.horizon, cfg.dist))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_example() {
        let e = epsilon(1, 1, 3, 3, 1000);
        assert!((e - (5.4e7f64.ln() / 4.0).sqrt()).abs() < 1e-12);
        assert!((e - 2.110).abs() < 1e-3);
        assert!((epsilon(0, 1, 3, 3, 1000) - (5.4e7f64.ln() / 2.0).sqrt()).abs() < 1e-12);
        assert!((delta(3, 3, 1000) - 1.0 / 2.7e7).abs() < 1e-20);
    }

    #[test]
    fn epsilon_ratios() {
        for c in 1..=3 {
            for p in 1..6 {
                let ratio = epsilon(p, c, 2, 5, 10_000) / epsilon(p + 1, c, 2, 5, 10_000);
                let expected = (epoch_exponent(p + 1, c) - epoch_exponent(p, c)).exp2().sqrt();
                assert!((ratio / expected - 1.0).abs() < 1e-12);
            }
        }
        let r = epsilon(4, 1, 3, 3, 100) / epsilon(5, 1, 3, 3, 100);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gaussian_epsilon_examples() {
        // σ² = 1/4 is where the sub-Gaussian width meets the bounded one.
        for p in 1..5 {
            let g = gaussian_epsilon(p, 1, 0.25, 3, 3, 1000);
            assert!((g - epsilon(p, 1, 3, 3, 1000)).abs() < 1e-12);
            assert!(gaussian_epsilon(p + 1, 1, 0.5, 3, 3, 1000) < gaussian_epsilon(p, 1, 0.5, 3, 3, 1000));
        }
        let g = gaussian_epsilon(1, 1, 0.05, 3, 3, 1000);
        assert!((g - (0.05 * 5.4e7f64.ln()).sqrt()).abs() < 1e-12);
        assert!((g - 0.943).abs() < 1e-3);
    }

    #[test]
    fn trunc_bits_examples() {
        assert_eq!(trunc_bits(1, 1), 1);
        assert_eq!(trunc_bits(2, 1), 2);
        assert_eq!(trunc_bits(3, 1), 2);
        assert_eq!(trunc_bits(4, 1), 3);
        assert_eq!(trunc_bits(3, 2), 5);
        assert_eq!(trunc_bits(100, 3), 63);
    }

    #[test]
    fn rounds_per_matching_examples() {
        assert_eq!(rounds_per_matching(1, 1), 2);
        assert_eq!(rounds_per_matching(3, 1), 8);
        assert_eq!(rounds_per_matching(3, 2), 512);
        assert_eq!(rounds_per_matching(9, 2), u64::MAX);
    }

    #[test]
    fn enhanced_params_are_monotone() {
        let mut prev = EnhancedParams::new(1, 1, 3, 3, 1_000_000, RewardDist::Bernoulli);
        assert_eq!(prev.n_p, 2.0);
        for p in 2..12 {
            let cur = EnhancedParams::new(p, 1, 3, 3, 1_000_000, RewardDist::Bernoulli);
            assert!(cur.n_p > prev.n_p);
            assert!(cur.epsilon_prime < prev.epsilon_prime);
            assert!(cur.bits >= prev.bits);
            assert!((cur.threshold - 6.6 * cur.epsilon_prime).abs() < 1e-12);
            assert!((-(cur.bits as f64)).exp2() <= 0.1 * cur.epsilon_prime);
            prev = cur;
        }
        assert_eq!(pulls_through(3, 1), 14.0);
        assert_eq!(pulls_through(2, 2), 18.0);
        assert_eq!(epsilon_prime(0, 1, 3, 3, 10, RewardDist::Bernoulli), f64::INFINITY);
    }

    #[test]
    fn enhanced_bits_clamps() {
        assert_eq!(enhanced_bits(f64::INFINITY), 1);
        assert_eq!(enhanced_bits(0.0), 53);
        assert_eq!(enhanced_bits(10.0), 1);
        // 0.1 · 0.08 = 0.008, −lg 0.008 ≈ 6.97.
        assert_eq!(enhanced_bits(0.08), 7);
    }

    #[test]
    fn mode_parse() {
        assert_eq!("faithful".parse::<Mode>().unwrap(), Mode::Faithful);
        assert_eq!(Mode::Enhanced.to_string(), "enhanced");
        assert!("eager".parse::<Mode>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(MetcElimConfig::new(3, 100).validate().is_ok());
        assert!(MetcElimConfig::new(0, 100).validate().is_err());
        assert!(MetcElimConfig::new(3, 0).validate().is_err());
        assert!(MetcElimConfig::new(3, 10).with_c(0).validate().is_err());
        assert!(MetcElimConfig::new(3, 10)
            .with_dist(RewardDist::Gaussian { sigma2: 0.0 })
            .validate()
            .is_err());
    }

    #[test]
    fn thresholds() {
        let cfg = MetcElimConfig::new(3, 1000);
        assert_eq!(build_threshold(&cfg, 3, 1), f64::INFINITY);
        let e1 = epsilon_prime(1, 1, 3, 3, 1000, RewardDist::Bernoulli);
        assert!((build_threshold(&cfg, 3, 2) - 6.6 * e1).abs() < 1e-12);
        assert!((good_event_budget(&cfg, 3, 2) - 3.3 * e1).abs() < 1e-12);
        let f = cfg.clone().with_mode(Mode::Faithful);
        assert!((build_threshold(&f, 3, 2) - 12.0 * epsilon(2, 1, 3, 3, 1000)).abs() < 1e-12);
        assert!((good_event_budget(&f, 3, 2) - 6.0 * epsilon(1, 1, 3, 3, 1000)).abs() < 1e-12);
        assert_eq!(report_bits(&f, 3, 3), 2);
    }
}
