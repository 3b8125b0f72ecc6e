//! Players, coalitions and the minority payoff rule.
//!
//! Outcomes are indexed by the measured bit string with player A in the most
//! significant position, so for four players index 7 is `0111` (A = 0 and
//! B, C, D = 1).

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest player count accepted anywhere in the crate.
pub const MAX_PLAYERS: usize = 20;

/// Bit of `player` in `outcome` for an `n_players` game (A is the MSB).
#[inline]
pub fn player_bit(outcome: usize, player: usize, n_players: usize) -> usize {
    (outcome >> (n_players - 1 - player)) & 1
}

/// Bit mask selecting `player` in outcome / flip-mask indices.
#[inline]
pub fn player_mask(player: usize, n_players: usize) -> usize {
    1 << (n_players - 1 - player)
}

/// Conventional letter for a player index: 0 -> 'A', 1 -> 'B', ...
pub fn player_name(player: usize) -> char {
    (b'A' + player as u8) as char
}

/// How the members of a strategy group execute their shared parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Semantics {
    /// The group applies one joint operator; its bits always flip together.
    Correlated,
    /// Every member acts on its own qubit with the group's parameter.
    SharedParameter,
    /// Every player is its own group.
    Independent,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Semantics::Correlated => "correlated",
            Semantics::SharedParameter => "shared_parameter",
            Semantics::Independent => "independent",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub name: String,
    pub players: Vec<usize>,
}

impl Group {
    pub fn new(name: impl Into<String>, players: Vec<usize>) -> Self {
        Group {
            name: name.into(),
            players,
        }
    }

    /// Bit mask of all members.
    pub fn mask(&self, n_players: usize) -> usize {
        self.players
            .iter()
            .fold(0, |m, &p| m | player_mask(p, n_players))
    }
}

/// Per-outcome, per-player integer payoffs (pennies).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffTable {
    n_players: usize,
    // row-major: outcome * n_players + player
    entries: Vec<i32>,
}

impl PayoffTable {
    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.n_players
    }

    pub fn outcome(&self, outcome: usize) -> &[i32] {
        let n = self.n_players;
        &self.entries[outcome * n..(outcome + 1) * n]
    }

    pub fn payoff(&self, outcome: usize, player: usize) -> i32 {
        self.entries[outcome * self.n_players + player]
    }

    /// The payoff of `player` in every outcome (α, β, γ, θ rows for n = 4).
    pub fn player_payoff_coefficients(&self, player: usize) -> Result<Vec<f64>> {
        if player >= self.n_players {
            return Err(Error::PlayerOutOfRange {
                player,
                n_players: self.n_players,
            });
        }
        Ok((0..self.n_outcomes())
            .map(|i| self.payoff(i, player) as f64)
            .collect())
    }
}

/// Builds the minority-game payoff table.
///
/// A player whose bit differs from the common bit of everyone else pays
/// `n - 1` and every other player receives one penny. Any other outcome
/// (unanimous, or no lone minority such as a 2-2 split) pays nothing.
pub fn minority_payoff_table(n_players: usize) -> Result<PayoffTable> {
    if n_players < 3 {
        return Err(Error::InvalidSpec(format!(
            "minority game needs at least 3 players, got {n_players}"
        )));
    }
    if n_players > MAX_PLAYERS {
        return Err(Error::TooLarge {
            n: n_players,
            max: MAX_PLAYERS,
        });
    }
    let n = n_players;
    let mut entries = vec![0i32; (1usize << n) * n];
    for outcome in 0..1usize << n {
        let ones = outcome.count_ones() as usize;
        let loner = if ones == 1 {
            Some(outcome.leading_zeros() as usize - (usize::BITS as usize - n))
        } else if ones == n - 1 {
            let zero_bits = !outcome & ((1 << n) - 1);
            Some(zero_bits.leading_zeros() as usize - (usize::BITS as usize - n))
        } else {
            None
        };
        if let Some(loner) = loner {
            let row = &mut entries[outcome * n..(outcome + 1) * n];
            for (player, slot) in row.iter_mut().enumerate() {
                *slot = if player == loner { -(n as i32 - 1) } else { 1 };
            }
        }
    }
    Ok(PayoffTable { n_players, entries })
}

/// Player count, strategy groups and how the groups act.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    n_players: usize,
    groups: Vec<Group>,
    semantics: Semantics,
    table: PayoffTable,
}

impl GameSpec {
    /// Validates that `groups` partitions the players. Independent semantics
    /// only accepts singleton groups.
    pub fn new(n_players: usize, groups: Vec<Group>, semantics: Semantics) -> Result<Self> {
        let table = minority_payoff_table(n_players)?;
        if groups.is_empty() {
            return Err(Error::InvalidSpec("no strategy groups".into()));
        }
        let mut seen = vec![false; n_players];
        for group in &groups {
            if group.players.is_empty() {
                return Err(Error::InvalidSpec(format!(
                    "group `{}` is empty",
                    group.name
                )));
            }
            if semantics == Semantics::Independent && group.players.len() > 1 {
                return Err(Error::InvalidSpec(format!(
                    "group `{}` has {} players but independent semantics requires singleton groups",
                    group.name,
                    group.players.len()
                )));
            }
            for &p in &group.players {
                if p >= n_players {
                    return Err(Error::PlayerOutOfRange {
                        player: p,
                        n_players,
                    });
                }
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidSpec(format!(
                        "player {} appears in more than one group",
                        player_name(p)
                    )));
                }
            }
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidSpec(format!(
                "player {} is in no group",
                player_name(p)
            )));
        }
        for (i, g) in groups.iter().enumerate() {
            if groups[..i].iter().any(|h| h.name == g.name) {
                return Err(Error::InvalidSpec(format!(
                    "duplicate group name `{}`",
                    g.name
                )));
            }
        }
        Ok(GameSpec {
            n_players,
            groups,
            semantics,
            table,
        })
    }

    /// Every player on its own, groups named "A", "B", ...
    pub fn independent(n_players: usize) -> Result<Self> {
        let groups = (0..n_players)
            .map(|p| Group::new(player_name(p).to_string(), vec![p]))
            .collect();
        GameSpec::new(n_players, groups, Semantics::Independent)
    }

    /// Players A and B form one group, everyone else plays alone.
    pub fn ab_coalition(n_players: usize, semantics: Semantics) -> Result<Self> {
        let mut groups = vec![Group::new("AB", vec![0, 1])];
        groups.extend((2..n_players).map(|p| Group::new(player_name(p).to_string(), vec![p])));
        GameSpec::new(n_players, groups, semantics)
    }

    pub fn n_players(&self) -> usize {
        self.n_players
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.n_players
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_index(&self, name: &str) -> Option<usize> {
        self.groups.iter().position(|g| g.name == name)
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn payoff_table(&self) -> &PayoffTable {
        &self.table
    }

    pub(crate) fn check_profile(&self, profile: &StrategyProfile) -> Result<()> {
        if profile.len() != self.groups.len() {
            return Err(Error::ProfileMismatch {
                expected: self.groups.len(),
                found: profile.len(),
            });
        }
        Ok(())
    }

    /// Mean payoff of the group's members.
    pub fn group_payoff(&self, payoffs: &PayoffVector, group: usize) -> f64 {
        let members = &self.groups[group].players;
        members.iter().map(|&p| payoffs[p]).sum::<f64>() / members.len() as f64
    }
}

/// One parameter in `[0, 1]` per strategy group: the probability (CPO) or
/// squared amplitude weight (QSO) of the identity action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StrategyProfile(Vec<f64>);

impl StrategyProfile {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ParameterOutOfRange {
                    group: format!("#{i}"),
                    value: v,
                });
            }
        }
        Ok(StrategyProfile(values))
    }

    /// Every group plays the same value.
    pub fn uniform(n_groups: usize, value: f64) -> Result<Self> {
        StrategyProfile::new(vec![value; n_groups])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Copy with group `index` set to `value`.
    pub fn with(&self, index: usize, value: f64) -> Result<Self> {
        let mut values = self.0.clone();
        values[index] = value;
        StrategyProfile::new(values)
    }
}

impl Index<usize> for StrategyProfile {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Nonnegative weight per basis outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeWeights {
    values: Vec<f64>,
    normalized: bool,
}

impl OutcomeWeights {
    const NORMALIZATION_TOL: f64 = 1e-12;

    /// Weights that must form a probability distribution.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&values)?;
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > Self::NORMALIZATION_TOL {
            return Err(Error::Domain(format!("weights sum to {total}, expected 1")));
        }
        Ok(OutcomeWeights {
            values,
            normalized: true,
        })
    }

    /// Weights used as given; the total may differ from one.
    pub fn unnormalized(values: Vec<f64>) -> Result<Self> {
        Self::check_nonnegative(&values)?;
        Ok(OutcomeWeights {
            values,
            normalized: false,
        })
    }

    fn check_nonnegative(values: &[f64]) -> Result<()> {
        match values.iter().position(|w| w.is_nan() || *w < 0.0) {
            Some(i) => Err(Error::Domain(format!(
                "weight {} at outcome {i} is negative",
                values[i]
            ))),
            None => Ok(()),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// One expected payoff per player.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PayoffVector(Vec<f64>);

impl PayoffVector {
    pub fn new(values: Vec<f64>) -> Self {
        PayoffVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// |Σ payoffs|; zero for any outcome distribution under the minority table.
    pub fn zero_sum_residual(&self) -> f64 {
        self.0.iter().sum::<f64>().abs()
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for PayoffVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Weight-weighted sum of each player's per-outcome payoffs, without
/// renormalizing the weights.
pub fn expected_payoffs(table: &PayoffTable, weights: &OutcomeWeights) -> Result<PayoffVector> {
    let w = weights.values();
    if w.len() != table.n_outcomes() {
        return Err(Error::Dimension {
            expected: table.n_outcomes(),
            found: w.len(),
        });
    }
    let mut out = vec![0.0; table.n_players()];
    for (outcome, &weight) in w.iter().enumerate() {
        if weight == 0.0 {
            continue;
        }
        for (acc, &pay) in out.iter_mut().zip(table.outcome(outcome)) {
            *acc += weight * pay as f64;
        }
    }
    Ok(PayoffVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(bits: &str) -> usize {
        usize::from_str_radix(bits, 2).unwrap()
    }

    #[test]
    fn three_player_lone_minority() {
        let t = minority_payoff_table(3).unwrap();
        assert_eq!(t.outcome(idx("001")), &[1, 1, -2]);
        assert_eq!(t.outcome(idx("000")), &[0, 0, 0]);
        assert_eq!(t.outcome(idx("101")), &[1, -2, 1]);
    }

    #[test]
    fn four_player_rows() {
        let t = minority_payoff_table(4).unwrap();
        assert_eq!(t.outcome(7), &[-3, 1, 1, 1]);
        assert_eq!(t.outcome(3), &[0, 0, 0, 0]);
        assert_eq!(t.outcome(8), &[-3, 1, 1, 1]);
    }

    #[test]
    fn player_a_row_four_players() {
        // The listing has "α_5" twice; the second one is α_15.
        let t = minority_payoff_table(4).unwrap();
        let alpha = t.player_payoff_coefficients(0).unwrap();
        for i in [0, 3, 5, 6, 9, 10, 12, 15] {
            assert_eq!(alpha[i], 0.0, "alpha_{i}");
        }
        for i in [1, 2, 4, 11, 13, 14] {
            assert_eq!(alpha[i], 1.0, "alpha_{i}");
        }
        assert_eq!(alpha[7], -3.0);
        assert_eq!(alpha[8], -3.0);
    }

    #[test]
    fn player_c_row_three_players() {
        // enumerated by hand: C alone at 001 and 110
        let t = minority_payoff_table(3).unwrap();
        let gamma = t.player_payoff_coefficients(2).unwrap();
        assert_eq!(gamma, vec![0.0, -2.0, 1.0, 1.0, 1.0, 1.0, -2.0, 0.0]);
    }

    #[test]
    fn player_d_is_c_with_bits_swapped() {
        let t = minority_payoff_table(4).unwrap();
        let c = t.player_payoff_coefficients(2).unwrap();
        let d = t.player_payoff_coefficients(3).unwrap();
        for (i, &di) in d.iter().enumerate() {
            let swapped = (i & !0b11) | ((i & 1) << 1) | ((i >> 1) & 1);
            assert_eq!(di, c[swapped]);
        }
    }

    #[test]
    fn bad_player_counts() {
        assert!(matches!(
            minority_payoff_table(2),
            Err(Error::InvalidSpec(_))
        ));
        assert!(matches!(
            minority_payoff_table(MAX_PLAYERS + 1),
            Err(Error::TooLarge { .. })
        ));
        let t = minority_payoff_table(4).unwrap();
        assert!(matches!(
            t.player_payoff_coefficients(4),
            Err(Error::PlayerOutOfRange { .. })
        ));
    }

    #[test]
    fn five_player_generalization() {
        let t = minority_payoff_table(5).unwrap();
        assert_eq!(t.outcome(idx("00001")), &[1, 1, 1, 1, -4]);
        assert_eq!(t.outcome(idx("10111")), &[1, -4, 1, 1, 1]);
        assert_eq!(t.outcome(idx("00011")), &[0; 5]);
    }

    #[test]
    fn expected_payoff_examples() {
        let t = minority_payoff_table(4).unwrap();
        let mut w = vec![0.0; 16];
        w[7] = 1.0;
        let p = expected_payoffs(&t, &OutcomeWeights::normalized(w).unwrap()).unwrap();
        assert_eq!(p.values(), &[-3.0, 1.0, 1.0, 1.0]);

        let uniform = OutcomeWeights::normalized(vec![1.0 / 16.0; 16]).unwrap();
        let p = expected_payoffs(&t, &uniform).unwrap();
        assert!(p.values().iter().all(|v| v.abs() < 1e-15));

        let zeros = OutcomeWeights::unnormalized(vec![0.0; 16]).unwrap();
        assert_eq!(expected_payoffs(&t, &zeros).unwrap().values(), &[0.0; 4]);
    }

    #[test]
    fn expected_payoff_errors() {
        let t = minority_payoff_table(3).unwrap();
        let short = OutcomeWeights::unnormalized(vec![0.1; 4]).unwrap();
        assert!(matches!(
            expected_payoffs(&t, &short),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(
            OutcomeWeights::unnormalized(vec![0.5, -0.1, 0.6, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(OutcomeWeights::normalized(vec![0.5, 0.6]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(GameSpec::ab_coalition(3, Semantics::Correlated).is_ok());
        let dup = vec![Group::new("AB", vec![0, 1]), Group::new("BC", vec![1, 2])];
        assert!(GameSpec::new(3, dup, Semantics::Correlated).is_err());
        let missing = vec![Group::new("AB", vec![0, 1])];
        assert!(GameSpec::new(3, missing, Semantics::Correlated).is_err());
        assert!(GameSpec::ab_coalition(4, Semantics::Independent).is_err());
        assert_eq!(GameSpec::independent(4).unwrap().n_groups(), 4);
    }

    #[test]
    fn profile_range() {
        assert!(StrategyProfile::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(StrategyProfile::new(vec![1.5]).is_err());
        assert!(StrategyProfile::new(vec![f64::NAN]).is_err());
    }
}
