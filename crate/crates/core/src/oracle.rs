//! Brute-force recomputation of both engines.
//!
//! Nothing here goes through the XOR kernel or the shared mask weighting:
//! flip masks are enumerated with explicit loops, the QSO operator is
//! materialized as a dense matrix, and only the payoff table is shared with
//! the engines.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cpo::cpo_payoffs;
use crate::error::{Error, Result};
use crate::game::{GameSpec, Semantics, StrategyProfile};
use crate::qso::{apply_qso, qso_outcome_weights, qso_payoffs, WeightMode};
use crate::scenario::{Engine, Scenario};
use crate::state::StateVector;

/// Largest qubit count the dense QSO oracle will materialize.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Row-by-row index layout of the 16×16 Λ matrix: entry `(j, k)` holds the
/// subscript of the `x` that appears there.
pub const REFERENCE_LAMBDA_INDICES: [[usize; 16]; 16] = [
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15],
    [1, 0, 3, 2, 5, 4, 7, 6, 9, 8, 11, 10, 13, 12, 15, 14],
    [2, 3, 0, 1, 6, 7, 4, 5, 10, 11, 8, 9, 14, 15, 12, 13],
    [3, 2, 1, 0, 7, 6, 5, 4, 11, 10, 9, 8, 15, 14, 13, 12],
    [4, 5, 6, 7, 0, 1, 2, 3, 12, 13, 14, 15, 8, 9, 10, 11],
    [5, 4, 7, 6, 1, 0, 3, 2, 13, 12, 15, 14, 9, 8, 11, 10],
    [6, 7, 4, 5, 2, 3, 0, 1, 14, 15, 12, 13, 10, 11, 8, 9],
    [7, 6, 5, 4, 3, 2, 1, 0, 15, 14, 13, 12, 11, 10, 9, 8],
    [8, 9, 10, 11, 12, 13, 14, 15, 0, 1, 2, 3, 4, 5, 6, 7],
    [9, 8, 11, 10, 13, 12, 15, 14, 1, 0, 3, 2, 5, 4, 7, 6],
    [10, 11, 8, 9, 14, 15, 12, 13, 2, 3, 0, 1, 6, 7, 4, 5],
    [11, 10, 9, 8, 15, 14, 13, 12, 3, 2, 1, 0, 7, 6, 5, 4],
    [12, 13, 14, 15, 8, 9, 10, 11, 4, 5, 6, 7, 0, 1, 2, 3],
    [13, 12, 15, 14, 9, 8, 11, 10, 5, 4, 7, 6, 1, 0, 3, 2],
    [14, 15, 12, 13, 10, 11, 8, 9, 6, 7, 4, 5, 2, 3, 0, 1],
    [15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 0],
];

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub weights: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Max |oracle − engine| over weights and payoffs, recomputed on every call.
    pub max_deviation: f64,
}

/// Bits of `mask` as a vector, player A first.
fn bits_of(mask: usize, n: usize) -> Vec<u8> {
    (0..n)
        .map(|player| ((mask >> (n - 1 - player)) & 1) as u8)
        .collect()
}

/// Literal per-mask weight: walk the groups, look at each member's bit.
fn literal_mask_weight(
    spec: &GameSpec,
    profile: &StrategyProfile,
    mask: usize,
    amplitude: bool,
) -> f64 {
    let bits = bits_of(mask, spec.n_players());
    let mut weight = 1.0;
    for (g, group) in spec.groups().iter().enumerate() {
        let p = profile[g];
        let (stay, flip) = if amplitude {
            (p.sqrt(), (1.0 - p).sqrt())
        } else {
            (p, 1.0 - p)
        };
        if spec.semantics() == Semantics::Correlated {
            let first = bits[group.players[0]];
            if group.players.iter().any(|&m| bits[m] != first) {
                return 0.0;
            }
            weight *= if first == 0 { stay } else { flip };
        } else {
            for &m in &group.players {
                weight *= if bits[m] == 0 { stay } else { flip };
            }
        }
    }
    weight
}

fn table_payoffs(spec: &GameSpec, weights: &[f64]) -> Vec<f64> {
    let table = spec.payoff_table();
    let mut payoffs = vec![0.0; spec.n_players()];
    for (outcome, w) in weights.iter().enumerate() {
        for (player, acc) in payoffs.iter_mut().enumerate() {
            *acc += w * table.payoff(outcome, player) as f64;
        }
    }
    payoffs
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// CPO outcome distribution and payoffs by explicit double loop over
/// outcomes and flip masks.
pub fn oracle_cpo_payoffs(
    spec: &GameSpec,
    x: &[f64],
    profile: &StrategyProfile,
) -> Result<OracleResult> {
    let dim = spec.n_outcomes();
    if x.len() != dim {
        return Err(Error::Dimension {
            expected: dim,
            found: x.len(),
        });
    }
    if profile.len() != spec.n_groups() {
        return Err(Error::ProfileMismatch {
            expected: spec.n_groups(),
            found: profile.len(),
        });
    }
    let pi: Vec<f64> = (0..dim)
        .map(|k| literal_mask_weight(spec, profile, k, false))
        .collect();
    let mut q = vec![0.0; dim];
    for (j, qj) in q.iter_mut().enumerate() {
        for (k, pk) in pi.iter().enumerate() {
            *qj += x[j ^ k] * pk;
        }
    }
    let payoffs = table_payoffs(spec, &q);

    let engine = cpo_payoffs(spec, x, profile)?;
    let engine_q =
        crate::cpo::cpo_outcome_distribution(x, &crate::cpo::flip_mask_weights(spec, profile)?)?;
    let max_deviation =
        max_abs_diff(&payoffs, engine.values()).max(max_abs_diff(&q, engine_q.values()));
    Ok(OracleResult {
        weights: q,
        payoffs,
        max_deviation,
    })
}

/// Dense `2^n × 2^n` QSO operator: a sum of bit-flip permutation matrices
/// weighted by square-root parameters.
pub fn dense_qso_operator(spec: &GameSpec, profile: &StrategyProfile) -> Result<DMatrix<f64>> {
    let n = spec.n_players();
    if n > MAX_DENSE_QUBITS {
        return Err(Error::TooLarge {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    if profile.len() != spec.n_groups() {
        return Err(Error::ProfileMismatch {
            expected: spec.n_groups(),
            found: profile.len(),
        });
    }
    let dim = 1usize << n;
    let mut op = DMatrix::zeros(dim, dim);
    for mask in 0..dim {
        let w = literal_mask_weight(spec, profile, mask, true);
        if w == 0.0 {
            continue;
        }
        // permutation |m⟩ -> |m ⊕ mask⟩
        for m in 0..dim {
            op[(m ^ mask, m)] += w;
        }
    }
    Ok(op)
}

pub fn oracle_qso_payoffs(
    spec: &GameSpec,
    state: &StateVector,
    profile: &StrategyProfile,
    mode: WeightMode,
) -> Result<OracleResult> {
    let op = dense_qso_operator(spec, profile)?;
    if state.n_qubits() != spec.n_players() {
        return Err(Error::Dimension {
            expected: spec.n_players(),
            found: state.n_qubits(),
        });
    }
    let out = op * DVector::from_column_slice(state.amplitudes());
    let mut weights: Vec<f64> = out.iter().map(|c| c * c).collect();
    if mode == WeightMode::Normalized {
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::DegenerateState);
        }
        weights.iter_mut().for_each(|w| *w /= total);
    }
    let payoffs = table_payoffs(spec, &weights);

    let engine = qso_payoffs(spec, state, profile, mode)?;
    let engine_w = qso_outcome_weights(&apply_qso(spec, state, profile)?, mode)?;
    let max_deviation =
        max_abs_diff(&payoffs, engine.values()).max(max_abs_diff(&weights, engine_w.values()));
    Ok(OracleResult {
        weights,
        payoffs,
        max_deviation,
    })
}

/// Oracle for whichever engine the scenario uses.
pub fn oracle_scenario_payoffs(
    scenario: &Scenario,
    profile: &StrategyProfile,
) -> Result<OracleResult> {
    match scenario.engine {
        Engine::Cpo => {
            let x: Vec<f64> = scenario.state.amplitudes().iter().map(|a| a * a).collect();
            oracle_cpo_payoffs(&scenario.spec, &x, profile)
        }
        Engine::Qso => oracle_qso_payoffs(&scenario.spec, &scenario.state, profile, scenario.mode),
    }
}

/// Product of a subset of strategy parameters (empty = constant term).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Monomial(pub Vec<usize>);

impl Monomial {
    fn eval(&self, values: &[f64]) -> f64 {
        self.0.iter().map(|&i| values[i]).product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    pub terms: Vec<Monomial>,
    pub coefficients: Vec<f64>,
    /// Coefficient of `√(Π θ(1−θ))` over all parameters, for QSO scenarios.
    pub radical: Option<f64>,
    /// Largest |fit − payoff| over the samples.
    pub residual: f64,
}

impl PolynomialFit {
    /// Coefficient of the monomial over `indices` (order-insensitive).
    pub fn coefficient(&self, indices: &[usize]) -> f64 {
        let mut key = indices.to_vec();
        key.sort_unstable();
        self.terms
            .iter()
            .position(|m| m.0 == key)
            .map(|i| self.coefficients[i])
            .unwrap_or(0.0)
    }
}

fn radical(values: &[f64]) -> f64 {
    values.iter().map(|v| v * (1.0 - v)).product::<f64>().sqrt()
}

/// Least-squares fit of one player's payoff onto `{1, θ_i, θ_iθ_j}` plus,
/// for QSO scenarios, the radical `√(Π θ(1−θ))`.
pub fn expand_payoff_polynomial(
    scenario: &Scenario,
    player: usize,
    samples: &[StrategyProfile],
) -> Result<PolynomialFit> {
    let k = scenario.n_params();
    if player >= scenario.spec.n_players() {
        return Err(Error::PlayerOutOfRange {
            player,
            n_players: scenario.spec.n_players(),
        });
    }
    let mut terms = vec![Monomial(vec![])];
    terms.extend((0..k).map(|i| Monomial(vec![i])));
    for i in 0..k {
        for j in i + 1..k {
            terms.push(Monomial(vec![i, j]));
        }
    }
    let with_radical = scenario.engine == Engine::Qso;
    let columns = terms.len() + usize::from(with_radical);

    let mut design = DMatrix::zeros(samples.len(), columns);
    let mut target = DVector::zeros(samples.len());
    for (row, profile) in samples.iter().enumerate() {
        let v = profile.values();
        for (c, term) in terms.iter().enumerate() {
            design[(row, c)] = term.eval(v);
        }
        if with_radical {
            design[(row, columns - 1)] = radical(v);
        }
        target[row] = scenario.payoffs(profile)?[player];
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1e-300))
        .count();
    if samples.len() < columns || rank < columns {
        return Err(Error::RankDeficient { rank, columns });
    }
    let solution = svd
        .solve(&target, 1e-12)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let residual = (&design * &solution - &target).amax();
    let coefficients = solution.iter().take(terms.len()).copied().collect();
    let radical = with_radical.then(|| solution[columns - 1]);
    Ok(PolynomialFit {
        terms,
        coefficients,
        radical,
        residual,
    })
}

/// `count` profiles drawn uniformly from `[lo, hi]^k`.
pub fn random_profiles(
    k: usize,
    count: usize,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Vec<StrategyProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            StrategyProfile::new((0..k).map(|_| rng.gen_range(lo..=hi)).collect())
                .expect("range inside [0, 1]")
        })
        .collect()
}

/// Closed-form payoffs and derivatives for the standard scenarios, written
/// out term by term. They serve as references for the engines.
///
/// Parameter names follow the usual convention: `p` for the AB coalition
/// (or player A), `q`, `r`, `l` for the next groups; `a = c1·c2`.
pub mod closed_form {
    fn s(v: f64) -> f64 {
        v * (1.0 - v)
    }

    /// Player A, three players, `c1|000⟩ + c2|111⟩`.
    pub fn tcqg_ghz_player_a(a: f64, p: f64, q: f64) -> f64 {
        p + q - 2.0 * p * q + 4.0 * a * (s(p) * s(q)).sqrt()
    }

    /// `(∂P_A/∂p, ∂P_A/∂q)` for [`tcqg_ghz_player_a`], interior only.
    pub fn tcqg_ghz_gradient_a(a: f64, p: f64, q: f64) -> [f64; 2] {
        [
            1.0 - 2.0 * q + 2.0 * a * (s(q) / s(p)).sqrt() * (1.0 - 2.0 * p),
            1.0 - 2.0 * p + 2.0 * a * (s(p) / s(q)).sqrt() * (1.0 - 2.0 * q),
        ]
    }

    /// Player A, three players, `c1|001⟩ + c2|110⟩`.
    pub fn tcqg_flip_player_a(a: f64, p: f64, q: f64) -> f64 {
        1.0 - p - q + 2.0 * p * q + 4.0 * a * (s(p) * s(q)).sqrt()
    }

    pub fn tcqg_flip_gradient_a(a: f64, p: f64, q: f64) -> [f64; 2] {
        let root = (s(p) * s(q)).sqrt();
        [
            -1.0 + 2.0 * q + 2.0 * a * s(q) * (1.0 - 2.0 * p) / root,
            -1.0 + 2.0 * p + 2.0 * a * s(p) * (1.0 - 2.0 * q) / root,
        ]
    }

    /// Player A, four players, `c1|0000⟩ + c2|1111⟩`, parameters `(p, q, l)`.
    pub fn fcqg_ghz_player_a(a: f64, p: f64, q: f64, l: f64) -> f64 {
        q + l + 8.0 * a * (s(p) * s(q) * s(l)).sqrt() - 2.0 * l * q
    }

    pub fn fcqg_ghz_gradient_a(a: f64, p: f64, q: f64, l: f64) -> [f64; 3] {
        let root = (s(p) * s(q) * s(l)).sqrt();
        [
            4.0 * a * ((1.0 - p) * s(q) * s(l) - p * s(q) * s(l)) / root,
            1.0 + 4.0 * a * (s(p) * (1.0 - q) * s(l) - p * q * (1.0 - p) * s(l)) / root - 2.0 * l,
            1.0 + 4.0 * a * (s(p) * s(q) * (1.0 - l) - p * q * (1.0 - p) * (1.0 - q) * l) / root
                - 2.0 * q,
        ]
    }

    pub fn fcqg_ghz_player_c(a: f64, p: f64, q: f64, l: f64) -> f64 {
        -8.0 * a * (s(p) * s(q) * s(l)).sqrt() + 4.0 * p * q - 4.0 * l * p + 2.0 * l * q - 3.0 * q
            + l
    }

    /// Player D as usually written alongside [`fcqg_ghz_player_c`]. It does
    /// not satisfy zero-sum; the correct form is player C with `q ↔ l`.
    pub fn fcqg_ghz_player_d_as_printed(a: f64, p: f64, q: f64, l: f64) -> f64 {
        -8.0 * a * (s(p) * s(q) * s(l)).sqrt() - 4.0 * p * q + 4.0 * l * p + 2.0 * l * q
            - q
            - 3.0 * l
    }

    /// Player A, four players, `c1|0001⟩ + c2|1101⟩`.
    pub fn fcqg_0001_player_a(a: f64, p: f64, q: f64, l: f64) -> f64 {
        (1.0 - q - l + 2.0 * q * l) * (1.0 + 4.0 * a * s(p).sqrt())
    }

    pub fn fcqg_0001_gradient_a(a: f64, p: f64, q: f64, l: f64) -> [f64; 3] {
        let bracket = 1.0 - q - l + 2.0 * q * l;
        let lift = 1.0 + 4.0 * a * s(p).sqrt();
        [
            bracket * 2.0 * a * (1.0 - 2.0 * p) / s(p).sqrt(),
            (2.0 * l - 1.0) * lift,
            (2.0 * q - 1.0) * lift,
        ]
    }

    /// The eight pair-bracket polynomials, in the order
    /// `(x0+x15), (x1+x14), …, (x7+x8)`, that give player A's CPO payoff.
    pub fn cpo_player_a_brackets(p: f64, q: f64, r: f64, l: f64) -> [f64; 8] {
        [
            2.0 * p * r + 2.0 * p * l + 2.0 * q * p - 2.0 * q * l - 2.0 * r * l - 2.0 * q * r
                + l
                + r
                + q
                - 3.0 * p,
            2.0 * p * q + 2.0 * p * r + 2.0 * q * l - 2.0 * p * l - 2.0 * q * r + 2.0 * r * l
                - p
                - q
                - l
                - r
                + 1.0,
            2.0 * p * q + 2.0 * q * r + 2.0 * p * l + 2.0 * r * l
                - 2.0 * p * r
                - 2.0 * q * l
                - p
                - q
                - l
                - r
                + 1.0,
            2.0 * q * r + 2.0 * q * l + 2.0 * p * q
                - 2.0 * p * r
                - 2.0 * p * l
                - 2.0 * r * l
                - 3.0 * q
                + r
                + p
                + l,
            2.0 * p * r + 2.0 * p * l + 2.0 * q * r + 2.0 * q * l
                - 2.0 * q * p
                - 2.0 * r * l
                - p
                - q
                - r
                - l
                + 1.0,
            2.0 * p * r + 2.0 * q * r + 2.0 * r * l - 2.0 * q * p - 2.0 * q * l - 2.0 * p * l
                + l
                + p
                + q
                - 3.0 * r,
            2.0 * p * l + 2.0 * q * l + 2.0 * r * l - 2.0 * q * p - 2.0 * q * r - 2.0 * p * r
                + q
                + r
                + p
                - 3.0 * l,
            -2.0 * p * q - 2.0 * q * l - 2.0 * r * l - 2.0 * p * r - 2.0 * p * l - 2.0 * q * r
                + 3.0 * p
                + 3.0 * q
                + 3.0 * r
                + 3.0 * l
                - 3.0,
        ]
    }

    fn pair(x: &[f64], i: usize) -> f64 {
        x[i] + x[15 - i]
    }

    /// Player A, four independent CPO players, any initial probabilities `x`.
    pub fn cpo_player_a(x: &[f64], p: f64, q: f64, r: f64, l: f64) -> f64 {
        cpo_player_a_brackets(p, q, r, l)
            .iter()
            .enumerate()
            .map(|(i, b)| pair(x, i) * b)
            .sum()
    }

    /// Player C when `x` vanishes on indices 4..=11.
    pub fn cpo_cooperative_player_c(x: &[f64], p: f64, q: f64, r: f64, l: f64) -> f64 {
        pair(x, 0)
            * (2.0 * p * r + 2.0 * q * r + 2.0 * r * l - 2.0 * q * p - 2.0 * p * l - 2.0 * q * l
                + p
                + q
                + l
                - 3.0 * r)
            + pair(x, 1)
                * (2.0 * p * r + 2.0 * p * l + 2.0 * q * r + 2.0 * q * l
                    - 2.0 * q * p
                    - 2.0 * r * l
                    - p
                    - q
                    - r
                    - l
                    + 1.0)
            + pair(x, 2)
                * (-2.0 * q * p
                    - 2.0 * p * r
                    - 2.0 * q * r
                    - 2.0 * p * l
                    - 2.0 * q * l
                    - 2.0 * r * l
                    + 3.0 * r
                    + 3.0 * p
                    + 3.0 * q
                    + 3.0 * l
                    - 3.0)
            + pair(x, 3)
                * (2.0 * p * l + 2.0 * q * l + 2.0 * r * l
                    - 2.0 * q * p
                    - 2.0 * p * r
                    - 2.0 * q * r
                    + p
                    + q
                    + r
                    - 3.0 * l)
    }

    /// Player A when `x` vanishes on {1, 2, 4, 7, 8, 11, 13, 14}.
    pub fn cpo_mixed_player_a(x: &[f64], p: f64, q: f64, r: f64, l: f64) -> f64 {
        pair(x, 0)
            * (2.0 * p * r + 2.0 * q * p + 2.0 * p * l - 2.0 * q * l - 2.0 * r * l - 2.0 * q * r
                + l
                + r
                + q
                - 3.0 * p)
            + pair(x, 3)
                * (2.0 * q * r + 2.0 * q * l + 2.0 * q * p
                    - 2.0 * p * r
                    - 2.0 * p * l
                    - 2.0 * r * l
                    - 3.0 * q
                    + r
                    + p
                    + l)
            + pair(x, 5)
                * (2.0 * p * r + 2.0 * q * r + 2.0 * r * l
                    - 2.0 * q * p
                    - 2.0 * q * l
                    - 2.0 * p * l
                    + l
                    + p
                    + q
                    - 3.0 * r)
            + pair(x, 6)
                * (2.0 * p * l + 2.0 * q * l + 2.0 * r * l
                    - 2.0 * q * p
                    - 2.0 * q * r
                    - 2.0 * p * r
                    + q
                    + r
                    + p
                    - 3.0 * l)
    }

    /// Player C on the same support as [`cpo_mixed_player_a`].
    pub fn cpo_mixed_player_c(x: &[f64], p: f64, q: f64, r: f64, l: f64) -> f64 {
        pair(x, 0)
            * (2.0 * p * r + 2.0 * q * r + 2.0 * r * l - 2.0 * q * p - 2.0 * p * l - 2.0 * q * l
                + p
                + q
                + l
                - 3.0 * r)
            + pair(x, 3)
                * (2.0 * p * l + 2.0 * q * l + 2.0 * r * l
                    - 2.0 * q * p
                    - 2.0 * p * r
                    - 2.0 * q * r
                    + p
                    + q
                    + r
                    - 3.0 * l)
            + pair(x, 5)
                * (2.0 * p * r + 2.0 * p * l + 2.0 * q * p
                    - 2.0 * q * r
                    - 2.0 * r * l
                    - 2.0 * q * l
                    + r
                    + q
                    + l
                    - 3.0 * p)
            + pair(x, 6)
                * (2.0 * q * r + 2.0 * q * l + 2.0 * q * p
                    - 2.0 * p * r
                    - 2.0 * p * l
                    - 2.0 * r * l
                    + p
                    + r
                    + l
                    - 3.0 * q)
    }

    /// Players A and B for the uniform state on {0,1,2,3,12,13,14,15}.
    pub fn cpo_uniform8_player_a(p: f64, q: f64) -> f64 {
        (8.0 * q * p - 4.0 * p - 4.0 * q + 2.0) / 4.0
    }
}
