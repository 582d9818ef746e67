//! Maximum-weight bipartite matching between players and arms.
//!
//! The solver is the shortest-augmenting-path form of the Hungarian
//! algorithm. It works directly on rectangular `M x K` tables (`M <= K`) and
//! can skip forbidden edges, which is how candidate-edge restrictions and
//! forced edges are expressed.
//!
//! Among several optimal matchings the lexicographically smallest assignment
//! array is returned: players are fixed one at a time to the smallest arm
//! that still admits an optimal completion. Utilities within
//! [`tie_tolerance`] of each other count as equal.

use crate::error::{Error, Result};
use crate::model::{utility, Delta, GapStructure, Matching, RewardMatrix};

/// Dense `M x K` table of finite weights (true means or estimates).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    players: usize,
    arms: usize,
    data: Vec<f64>,
}

impl WeightTable {
    pub fn zeros(players: usize, arms: usize) -> Self {
        Self {
            players,
            arms,
            data: vec![0.0; players * arms],
        }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let players = rows.len();
        let arms = rows.first().map_or(0, Vec::len);
        if players == 0 || arms == 0 {
            return Err(Error::InvalidInput("weight table must be non-empty".into()));
        }
        let mut data = Vec::with_capacity(players * arms);
        for (m, row) in rows.into_iter().enumerate() {
            if row.len() != arms {
                return Err(Error::DimensionMismatch {
                    expected: format!("{arms} columns"),
                    got: format!("{} columns in row {}", row.len(), m + 1),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite weight {bad}")));
            }
            data.extend(row);
        }
        Ok(Self {
            players,
            arms,
            data,
        })
    }

    pub fn players(&self) -> usize {
        self.players
    }

    pub fn arms(&self) -> usize {
        self.arms
    }

    #[inline]
    pub fn get(&self, player: usize, arm: usize) -> f64 {
        self.data[player * self.arms + arm]
    }

    #[inline]
    pub fn set(&mut self, player: usize, arm: usize, value: f64) {
        debug_assert!(value.is_finite());
        self.data[player * self.arms + arm] = value;
    }

    pub fn row(&self, player: usize) -> &[f64] {
        &self.data[player * self.arms..(player + 1) * self.arms]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Copy with `delta` added to every weight.
    pub fn shifted(&self, delta: f64) -> Self {
        Self {
            data: self.data.iter().map(|v| v + delta).collect(),
            ..self.clone()
        }
    }
}

/// Absolute tolerance under which two matching utilities are a tie.
pub fn tie_tolerance(w: &WeightTable) -> f64 {
    1e-12 * w.players() as f64 * (1.0 + w.max_abs())
}

/// Maximum-weight matching over all `M x K` edges.
pub fn max_weight_matching(w: &WeightTable) -> Result<Matching> {
    check_shape(w)?;
    Ok(lex_best(w, &|_, _| true).expect("complete bipartite graph with M <= K has a matching"))
}

/// Best matching among those assigning arm `arm` to player `player`.
pub fn max_weight_matching_forced(w: &WeightTable, player: usize, arm: usize) -> Result<Matching> {
    check_shape(w)?;
    check_edge(w, player, arm)?;
    Ok(max_weight_matching_forced_within(w, player, arm, &|_, _| true)
        .expect("complete bipartite graph with M <= K has a matching"))
}

/// Best matching using only edges accepted by `allowed`, or `None` when no
/// such matching covers every player.
pub fn max_weight_matching_within(
    w: &WeightTable,
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Option<Matching> {
    if w.players() > w.arms() {
        return None;
    }
    lex_best(w, allowed)
}

/// Forced-edge variant of [`max_weight_matching_within`].
///
/// Row `player` may only use `arm` and column `arm` may only be used by
/// `player`. This is the `(M-1) x (K-1)` subproblem with the forced edge
/// reinserted.
pub fn max_weight_matching_forced_within(
    w: &WeightTable,
    player: usize,
    arm: usize,
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Option<Matching> {
    if w.players() > w.arms() || player >= w.players() || arm >= w.arms() || !allowed(player, arm) {
        return None;
    }
    let forced = |r: usize, c: usize| {
        if r == player {
            c == arm
        } else {
            c != arm && allowed(r, c)
        }
    };
    lex_best(w, &forced)
}

/// Matchings per enumeration are capped by this many players and arms.
pub const ENUMERATION_LIMIT: usize = 8;

/// Every matching with its utility, best first. Equal utilities keep the
/// lexicographic generation order.
pub fn enumerate_matchings(w: &WeightTable) -> Result<Vec<(Matching, f64)>> {
    if w.players() > ENUMERATION_LIMIT || w.arms() > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge {
            m: w.players(),
            k: w.arms(),
        });
    }
    check_shape(w)?;

    fn extend(
        w: &WeightTable,
        prefix: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<(Matching, f64)>,
    ) {
        if prefix.len() == w.players() {
            let pi = Matching::new(prefix.clone());
            let u = utility(w, &pi).expect("generated matching fits the table");
            out.push((pi, u));
            return;
        }
        for arm in 0..w.arms() {
            if !used[arm] {
                used[arm] = true;
                prefix.push(arm);
                extend(w, prefix, used, out);
                prefix.pop();
                used[arm] = false;
            }
        }
    }

    let mut out = Vec::new();
    extend(w, &mut Vec::new(), &mut vec![false; w.arms()], &mut out);
    out.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("utilities are finite"));
    Ok(out)
}

/// `U*`, `Δ`, the optimal matchings and every matching's gap, by enumeration.
pub fn gap_structure(matrix: &RewardMatrix) -> Result<GapStructure> {
    gap_structure_of(matrix.means())
}

pub fn gap_structure_of(w: &WeightTable) -> Result<GapStructure> {
    let all = enumerate_matchings(w)?;
    let u_star = all[0].1;
    let tol = tie_tolerance(w);

    let mut optimal_matchings = Vec::new();
    let mut delta: Option<f64> = None;
    let mut per_matching_gap = std::collections::BTreeMap::new();
    for (pi, u) in all {
        let g = u_star - u;
        if g <= tol {
            optimal_matchings.push(pi.clone());
            per_matching_gap.insert(pi, 0.0);
        } else {
            delta = Some(delta.map_or(g, |d| d.min(g)));
            per_matching_gap.insert(pi, g);
        }
    }
    Ok(GapStructure {
        u_star,
        delta: delta.map_or(Delta::Infinite, Delta::Finite),
        optimal_matchings,
        per_matching_gap,
    })
}

fn check_shape(w: &WeightTable) -> Result<()> {
    if w.players() > w.arms() {
        return Err(Error::InvalidInput(format!(
            "matching needs M <= K, got M = {}, K = {}",
            w.players(),
            w.arms()
        )));
    }
    Ok(())
}

fn check_edge(w: &WeightTable, player: usize, arm: usize) -> Result<()> {
    if player >= w.players() || arm >= w.arms() {
        return Err(Error::InvalidInput(format!(
            "edge ({player}, {arm}) outside a {}x{} table",
            w.players(),
            w.arms()
        )));
    }
    Ok(())
}

/// Lexicographically smallest optimal matching among allowed edges.
fn lex_best(w: &WeightTable, allowed: &dyn Fn(usize, usize) -> bool) -> Option<Matching> {
    let players = w.players();
    let all_rows: Vec<usize> = (0..players).collect();
    let (opt, _) = hungarian(w, &all_rows, allowed)?;
    let tol = tie_tolerance(w);

    let mut used = vec![false; w.arms()];
    let mut assignment = Vec::with_capacity(players);
    let mut fixed_sum = 0.0;
    for player in 0..players {
        let rest: Vec<usize> = (player + 1..players).collect();
        let mut chosen = None;
        for arm in 0..w.arms() {
            if used[arm] || !allowed(player, arm) {
                continue;
            }
            used[arm] = true;
            let completion = {
                let used = &used;
                hungarian(w, &rest, &|r, c| !used[c] && allowed(r, c))
            };
            used[arm] = false;
            if let Some((value, _)) = completion {
                if fixed_sum + w.get(player, arm) + value >= opt - tol {
                    chosen = Some(arm);
                    break;
                }
            }
        }
        let arm = chosen?;
        used[arm] = true;
        fixed_sum += w.get(player, arm);
        assignment.push(arm);
    }
    Some(Matching::new(assignment))
}

/// Maximum-weight assignment of `rows` to distinct columns using allowed
/// edges only. Returns the total weight and the column of each row.
fn hungarian(
    w: &WeightTable,
    rows: &[usize],
    allowed: &dyn Fn(usize, usize) -> bool,
) -> Option<(f64, Vec<usize>)> {
    let n = rows.len();
    let m = w.arms();
    if n == 0 {
        return Some((0.0, Vec::new()));
    }
    if n > m {
        return None;
    }

    // 1-based potentials; column 0 is the virtual root of each search.
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![inf; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        minv.fill(inf);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = rows[i0 - 1];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                if allowed(row, j - 1) {
                    let cur = -w.get(row, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == 0 {
                return None;
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut cols = vec![0usize; n];
    for j in 1..=m {
        if p[j] > 0 {
            cols[p[j] - 1] = j - 1;
        }
    }
    let total = rows.iter().zip(&cols).map(|(&r, &c)| w.get(r, c)).sum();
    Some((total, cols))
}
