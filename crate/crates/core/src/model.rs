//! Problem instances: reward matrices, matchings, utilities and gaps.
//!
//! Players and arms are zero-based everywhere in the API. [`Matching`]'s
//! `Display` impl prints one-based arms, the usual notation for matchings.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::assignment::{self, WeightTable};
use crate::error::{Error, Result};

/// Reward distribution family shared by every (player, arm) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardDist {
    Bernoulli,
    /// Gaussian with the cell's mean and this variance. Samples are not
    /// clipped to `[0, 1]`.
    Gaussian { sigma2: f64 },
}

impl RewardDist {
    pub fn name(&self) -> &'static str {
        match self {
            RewardDist::Bernoulli => "bernoulli",
            RewardDist::Gaussian { .. } => "gaussian",
        }
    }
}

/// The `M x K` matrix of mean rewards plus the distribution family.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardMatrix {
    means: WeightTable,
    dist: RewardDist,
}

impl RewardMatrix {
    pub fn new(means: WeightTable, dist: RewardDist) -> Result<Self> {
        if means.players() == 0 {
            return Err(Error::InvalidInput("at least one player is required".into()));
        }
        if means.arms() < means.players() {
            return Err(Error::InvalidInput(format!(
                "need K >= M, got M = {}, K = {}",
                means.players(),
                means.arms()
            )));
        }
        for m in 0..means.players() {
            for (k, &mu) in means.row(m).iter().enumerate() {
                if !(0.0..=1.0).contains(&mu) {
                    return Err(Error::InvalidInput(format!(
                        "mean ({}, {}) = {mu} lies outside [0, 1]",
                        m + 1,
                        k + 1
                    )));
                }
            }
        }
        if let RewardDist::Gaussian { sigma2 } = dist {
            if !(sigma2 > 0.0 && sigma2.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "gaussian variance must be positive, got {sigma2}"
                )));
            }
        }
        Ok(Self { means, dist })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>, dist: RewardDist) -> Result<Self> {
        Self::new(WeightTable::from_rows(rows)?, dist)
    }

    pub fn means(&self) -> &WeightTable {
        &self.means
    }

    pub fn dist(&self) -> RewardDist {
        self.dist
    }

    pub fn with_dist(mut self, dist: RewardDist) -> Result<Self> {
        self.dist = dist;
        Self::new(self.means, self.dist)
    }

    pub fn players(&self) -> usize {
        self.means.players()
    }

    pub fn arms(&self) -> usize {
        self.means.arms()
    }

    pub fn mean(&self, player: usize, arm: usize) -> f64 {
        self.means.get(player, arm)
    }

    /// Loads the plain-text matrix format: a line `M K`, `M` lines of `K`
    /// decimal means, then `bernoulli` or `gaussian <sigma2>`. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    pub fn to_file_format(&self) -> String {
        let mut out = format!("{} {}\n", self.players(), self.arms());
        for m in 0..self.players() {
            let row: Vec<String> = self.means.row(m).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        match self.dist {
            RewardDist::Bernoulli => out.push_str("bernoulli\n"),
            RewardDist::Gaussian { sigma2 } => out.push_str(&format!("gaussian {sigma2}\n")),
        }
        out
    }
}

impl FromStr for RewardMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let parse_err = |line: usize, msg: String| Error::Parse { line, msg };

        let (line, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, "empty matrix file".into()))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(parse_err(line, format!("expected `M K`, got `{header}`")));
        }
        let m: usize = dims[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad player count `{}`", dims[0])))?;
        let k: usize = dims[1]
            .parse()
            .map_err(|_| parse_err(line, format!("bad arm count `{}`", dims[1])))?;

        let mut rows = Vec::with_capacity(m);
        for row_idx in 0..m {
            let (line, text) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("missing row {}", row_idx + 1)))?;
            let row: Vec<f64> = text
                .split_whitespace()
                .map(|tok| {
                    let v: f64 = tok
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad decimal `{tok}`")))?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(parse_err(line, format!("mean {tok} outside [0, 1]")));
                    }
                    Ok(v)
                })
                .collect::<Result<_>>()?;
            if row.len() != k {
                return Err(parse_err(line, format!("expected {k} values, got {}", row.len())));
            }
            rows.push(row);
        }

        let (line, dist_line) = lines
            .next()
            .ok_or_else(|| parse_err(0, "missing distribution line".into()))?;
        let toks: Vec<&str> = dist_line.split_whitespace().collect();
        let dist = match toks.as_slice() {
            ["bernoulli"] => RewardDist::Bernoulli,
            ["gaussian", s2] => RewardDist::Gaussian {
                sigma2: s2
                    .parse()
                    .map_err(|_| parse_err(line, format!("bad variance `{s2}`")))?,
            },
            _ => {
                return Err(parse_err(
                    line,
                    format!("expected `bernoulli` or `gaussian <sigma2>`, got `{dist_line}`"),
                ))
            }
        };
        if let Some((line, extra)) = lines.next() {
            return Err(parse_err(line, format!("unexpected trailing content `{extra}`")));
        }
        RewardMatrix::from_rows(rows, dist).map_err(|e| match e {
            Error::InvalidInput(msg) => parse_err(line, msg),
            other => other,
        })
    }
}

/// The 3x3 instance with a unique optimal matching (3, 2, 1).
pub fn builtin_u1() -> RewardMatrix {
    RewardMatrix::from_rows(
        vec![
            vec![0.1, 0.05, 0.9],
            vec![0.1, 0.25, 0.3],
            vec![0.4, 0.2, 0.8],
        ],
        RewardDist::Bernoulli,
    )
    .expect("builtin matrix is valid")
}

/// The 5x5 instance with several optimal and near-optimal matchings.
pub fn builtin_u2() -> RewardMatrix {
    RewardMatrix::from_rows(
        vec![
            vec![0.5, 0.49, 0.39, 0.29, 0.5],
            vec![0.5, 0.49, 0.39, 0.29, 0.19],
            vec![0.29, 0.19, 0.5, 0.499, 0.39],
            vec![0.29, 0.49, 0.5, 0.5, 0.39],
            vec![0.49, 0.49, 0.49, 0.49, 0.5],
        ],
        RewardDist::Bernoulli,
    )
    .expect("builtin matrix is valid")
}

/// An injective player-to-arm assignment, indexed by player.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Matching(Vec<usize>);

impl Matching {
    /// Panics if two players share an arm.
    pub fn new(assignment: Vec<usize>) -> Self {
        Self::try_new(assignment).expect("matching must be injective")
    }

    pub fn try_new(assignment: Vec<usize>) -> Result<Self> {
        let mut seen = assignment.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!(
                "assignment {assignment:?} is not injective"
            )));
        }
        Ok(Self(assignment))
    }

    /// Builds a matching from one-based arm numbers.
    pub fn from_one_based(arms: &[usize]) -> Self {
        Self::new(arms.iter().map(|&a| a - 1).collect())
    }

    pub fn arm(&self, player: usize) -> usize {
        self.0[player]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.0
    }

    pub fn players(&self) -> usize {
        self.0.len()
    }

    pub fn contains_edge(&self, player: usize, arm: usize) -> bool {
        self.0.get(player) == Some(&arm)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied().enumerate()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl fmt::Display for Matching {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", a + 1)?;
        }
        write!(f, ")")
    }
}

/// Sum of the selected weights, accumulated in player order.
///
/// Every utility in the crate goes through this function, so utilities of
/// the same matching are bit-identical wherever they are computed.
pub fn utility(weights: &WeightTable, pi: &Matching) -> Result<f64> {
    check_dims(weights, pi)?;
    Ok(pi.edges().map(|(m, k)| weights.get(m, k)).sum())
}

/// `U* - U(pi)`, with gaps inside the tie tolerance reported as exactly 0.
pub fn gap(weights: &WeightTable, pi: &Matching) -> Result<f64> {
    check_dims(weights, pi)?;
    let best = assignment::max_weight_matching(weights)?;
    let u_star = utility(weights, &best)?;
    let g = u_star - utility(weights, pi)?;
    Ok(if g <= assignment::tie_tolerance(weights) {
        0.0
    } else {
        g
    })
}

fn check_dims(weights: &WeightTable, pi: &Matching) -> Result<()> {
    if pi.players() != weights.players() {
        return Err(Error::DimensionMismatch {
            expected: format!("{} players", weights.players()),
            got: format!("matching over {} players", pi.players()),
        });
    }
    if let Some(&bad) = pi.assignment().iter().find(|&&a| a >= weights.arms()) {
        return Err(Error::DimensionMismatch {
            expected: format!("arms below {}", weights.arms()),
            got: format!("arm index {bad}"),
        });
    }
    Ok(())
}

/// Smallest positive gap; `Infinite` when every matching is optimal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Delta {
    Finite(f64),
    Infinite,
}

impl Delta {
    pub fn finite(self) -> Option<f64> {
        match self {
            Delta::Finite(d) => Some(d),
            Delta::Infinite => None,
        }
    }
}

impl fmt::Display for Delta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delta::Finite(d) => write!(f, "{d}"),
            Delta::Infinite => write!(f, "inf"),
        }
    }
}

/// Ground-truth gap information for an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GapStructure {
    pub u_star: f64,
    pub delta: Delta,
    pub optimal_matchings: Vec<Matching>,
    pub per_matching_gap: BTreeMap<Matching, f64>,
}

impl GapStructure {
    pub fn is_optimal(&self, pi: &Matching) -> bool {
        self.per_matching_gap.get(pi) == Some(&0.0)
    }

    /// Edges `(player, arm)` that belong to at least one optimal matching.
    pub fn optimal_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<_> = self
            .optimal_matchings
            .iter()
            .flat_map(|pi| pi.edges().collect::<Vec<_>>())
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn utility_examples() {
        let u1 = builtin_u1();
        let best = Matching::from_one_based(&[3, 2, 1]);
        assert!(approx(utility(u1.means(), &best).unwrap(), 1.55));
        let ident = Matching::from_one_based(&[1, 2, 3]);
        assert!(approx(utility(u1.means(), &ident).unwrap(), 1.15));

        let single = WeightTable::from_rows(vec![vec![0.7]]).unwrap();
        assert_eq!(utility(&single, &Matching::new(vec![0])).unwrap(), 0.7);
    }

    #[test]
    fn utility_rejects_bad_dimensions() {
        let u1 = builtin_u1();
        assert!(matches!(
            utility(u1.means(), &Matching::new(vec![0, 1])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(utility(u1.means(), &Matching::new(vec![0, 1, 5])).is_err());
    }

    #[test]
    fn gap_examples() {
        let u1 = builtin_u1();
        assert_eq!(gap(u1.means(), &Matching::from_one_based(&[3, 2, 1])).unwrap(), 0.0);
        let g = gap(u1.means(), &Matching::from_one_based(&[3, 1, 2])).unwrap();
        assert!(approx(g, 0.35), "{g}");

        let flat = WeightTable::from_rows(vec![vec![0.5; 4]; 3]).unwrap();
        for pi in [[0, 1, 2], [3, 2, 1], [1, 3, 0]] {
            assert_eq!(gap(&flat, &Matching::new(pi.to_vec())).unwrap(), 0.0);
        }
    }

    #[test]
    fn matching_must_be_injective() {
        assert!(Matching::try_new(vec![1, 0, 1]).is_err());
        assert_eq!(Matching::from_one_based(&[3, 2, 1]).to_string(), "(3,2,1)");
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(RewardMatrix::from_rows(vec![vec![0.5], vec![0.5]], RewardDist::Bernoulli).is_err());
        assert!(RewardMatrix::from_rows(vec![vec![1.5, 0.0]], RewardDist::Bernoulli).is_err());
        assert!(RewardMatrix::from_rows(vec![vec![0.5]], RewardDist::Gaussian { sigma2: 0.0 }).is_err());
    }

    #[test]
    fn parses_matrix_files() {
        let text = "# U-like\n2 3\n0.1 0.2 0.3\n1 0 0.5\n\ngaussian 0.05\n";
        let m: RewardMatrix = text.parse().unwrap();
        assert_eq!(m.players(), 2);
        assert_eq!(m.arms(), 3);
        assert_eq!(m.mean(0, 2), 0.3);
        assert_eq!(m.mean(1, 0), 1.0);
        assert_eq!(m.dist(), RewardDist::Gaussian { sigma2: 0.05 });

        let round_trip: RewardMatrix = builtin_u2().to_file_format().parse().unwrap();
        assert_eq!(round_trip, builtin_u2());
    }

    #[test]
    fn matrix_parse_errors_carry_line_numbers() {
        let cases = [
            ("2 2\n0.1 0.2\n0.3 1.2\nbernoulli\n", 3),
            ("2 2\n0.1 0.2\n0.3\nbernoulli\n", 3),
            ("2 2\n0.1 0.2\n0.3 0.4\npoisson\n", 4),
            ("1 2\n0.1 abc\nbernoulli\n", 2),
        ];
        for (text, want) in cases {
            match text.parse::<RewardMatrix>() {
                Err(Error::Parse { line, .. }) => assert_eq!(line, want, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!("3 2\n0 0\n0 0\n0 0\nbernoulli\n".parse::<RewardMatrix>().is_err());
    }

    #[test]
    fn u2_entry() {
        assert_eq!(builtin_u2().mean(2, 3), 0.499);
    }
}
