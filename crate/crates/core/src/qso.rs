//! Quantum-superposed-operator engine.
//!
//! A group with parameter `p` applies `√p·I⊗…⊗I + √(1-p)·X⊗…⊗X` to the
//! amplitudes. This is the CPO convolution again, run on amplitudes with
//! square-root weights. The operator is not unitary, so the squared output
//! coefficients can sum to more than one; [`WeightMode::Paper`] keeps them
//! as they are.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{expected_payoffs, GameSpec, OutcomeWeights, PayoffVector, StrategyProfile};
use crate::state::StateVector;
use crate::xor::{mask_weights, xor_convolve};

/// How squared QSO coefficients become outcome weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    /// Squared coefficients used as-is.
    #[default]
    Paper,
    /// Squared coefficients divided by their total.
    Normalized,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightMode::Paper => "paper",
            WeightMode::Normalized => "normalized",
        })
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(WeightMode::Paper),
            "normalized" => Ok(WeightMode::Normalized),
            other => Err(Error::Config(format!(
                "unknown weight mode `{other}` (paper|normalized)"
            ))),
        }
    }
}

/// Unnormalized output state ψ_out.
#[derive(Debug, Clone, PartialEq)]
pub struct QsoOutputState {
    coefficients: Vec<f64>,
    profile: StrategyProfile,
    total_weight: f64,
}

impl QsoOutputState {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn profile(&self) -> &StrategyProfile {
        &self.profile
    }

    /// Σ coefficient².
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }
}

/// Amplitude weight of every flip mask: `√p` for identity, `√(1-p)` for flip.
pub fn qso_mask_weights(spec: &GameSpec, profile: &StrategyProfile) -> Result<Vec<f64>> {
    mask_weights(spec, profile, |p| (p.sqrt(), (1.0 - p).sqrt()))
}

pub fn apply_qso(
    spec: &GameSpec,
    state: &StateVector,
    profile: &StrategyProfile,
) -> Result<QsoOutputState> {
    if state.n_qubits() != spec.n_players() {
        return Err(Error::Dimension {
            expected: spec.n_players(),
            found: state.n_qubits(),
        });
    }
    let weights = qso_mask_weights(spec, profile)?;
    let coefficients = xor_convolve(state.amplitudes(), &weights)?;
    let total_weight = coefficients.iter().map(|c| c * c).sum();
    Ok(QsoOutputState {
        coefficients,
        profile: profile.clone(),
        total_weight,
    })
}

pub fn qso_outcome_weights(out: &QsoOutputState, mode: WeightMode) -> Result<OutcomeWeights> {
    let squared: Vec<f64> = out.coefficients.iter().map(|c| c * c).collect();
    match mode {
        WeightMode::Paper => OutcomeWeights::unnormalized(squared),
        WeightMode::Normalized => {
            if out.total_weight <= 0.0 {
                return Err(Error::DegenerateState);
            }
            OutcomeWeights::normalized(squared.into_iter().map(|w| w / out.total_weight).collect())
        }
    }
}

pub fn qso_payoffs(
    spec: &GameSpec,
    state: &StateVector,
    profile: &StrategyProfile,
    mode: WeightMode,
) -> Result<PayoffVector> {
    let out = apply_qso(spec, state, profile)?;
    let weights = qso_outcome_weights(&out, mode)?;
    expected_payoffs(spec.payoff_table(), &weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Semantics;
    use crate::state::TwoComponentState;

    fn profile(v: &[f64]) -> StrategyProfile {
        StrategyProfile::new(v.to_vec()).unwrap()
    }

    fn tcqg() -> GameSpec {
        GameSpec::ab_coalition(3, Semantics::Correlated).unwrap()
    }

    #[test]
    fn deterministic_flip_of_c() {
        let state = StateVector::basis(3, 0).unwrap();
        let out = apply_qso(&tcqg(), &state, &profile(&[1.0, 0.0])).unwrap();
        assert_eq!(out.coefficients()[0b001], 1.0);
        assert_eq!(out.total_weight(), 1.0);
        let pay = qso_payoffs(&tcqg(), &state, &profile(&[1.0, 0.0]), WeightMode::Paper).unwrap();
        assert_eq!(pay.values(), &[1.0, 1.0, -2.0]);
    }

    #[test]
    fn ghz_output_coefficients() {
        let s = TwoComponentState::new(3, 0, 7, 0.6).unwrap();
        let (c1, c2) = (s.c1(), s.c2());
        let (p, q) = (0.3, 0.8);
        let out = apply_qso(&tcqg(), &s.to_state(), &profile(&[p, q])).unwrap();
        let c = out.coefficients();
        let expected = [
            (
                0b000,
                c1 * (p * q).sqrt() + c2 * ((1.0 - p) * (1.0 - q)).sqrt(),
            ),
            (
                0b001,
                c1 * (p * (1.0 - q)).sqrt() + c2 * ((1.0 - p) * q).sqrt(),
            ),
            (
                0b110,
                c1 * ((1.0 - p) * q).sqrt() + c2 * (p * (1.0 - q)).sqrt(),
            ),
            (
                0b111,
                c1 * ((1.0 - p) * (1.0 - q)).sqrt() + c2 * (p * q).sqrt(),
            ),
        ];
        for (i, v) in expected {
            assert!((c[i] - v).abs() < 1e-15, "coefficient {i:03b}");
        }
        for i in [0b010, 0b011, 0b100, 0b101] {
            assert!(c[i].abs() < 1e-15);
        }
    }

    #[test]
    fn single_basis_input_keeps_unit_weight() {
        let spec = GameSpec::ab_coalition(4, Semantics::Correlated).unwrap();
        for idx in [0, 5, 13] {
            let state = StateVector::basis(4, idx).unwrap();
            let out = apply_qso(&spec, &state, &profile(&[0.2, 0.7, 0.45])).unwrap();
            assert!((out.total_weight() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn paper_weight_at_max_entanglement() {
        let s = TwoComponentState::with_entanglement(3, 0, 7, 0.5).unwrap();
        let out = apply_qso(&tcqg(), &s.to_state(), &profile(&[0.5, 0.5])).unwrap();
        let w = qso_outcome_weights(&out, WeightMode::Paper).unwrap();
        assert!((w.total() - 2.0).abs() < 1e-14);
        assert!(!w.is_normalized());
        let n = qso_outcome_weights(&out, WeightMode::Normalized).unwrap();
        assert!((n.total() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn modes_coincide_without_entanglement() {
        let state = StateVector::basis(3, 7).unwrap();
        for p in [0.0, 0.2, 0.9] {
            let prof = profile(&[p, 1.0 - p]);
            let a = qso_payoffs(&tcqg(), &state, &prof, WeightMode::Paper).unwrap();
            let b = qso_payoffs(&tcqg(), &state, &prof, WeightMode::Normalized).unwrap();
            assert!(a.max_abs_diff(b.values()) < 1e-15);
        }
    }

    #[test]
    fn identity_coalition_keeps_ab_bits() {
        let s = TwoComponentState::with_entanglement(3, 0, 7, 0.4).unwrap();
        let out = apply_qso(&tcqg(), &s.to_state(), &profile(&[1.0, 0.3])).unwrap();
        let w = qso_outcome_weights(&out, WeightMode::Paper).unwrap();
        // A and B keep their initial (equal) bits, so mixed AB outcomes are empty
        for i in [0b010, 0b011, 0b100, 0b101] {
            assert_eq!(w.values()[i], 0.0);
        }
    }

    #[test]
    fn ghz_payoffs_at_center() {
        for a in [0.0, 0.33, 0.5] {
            let s = TwoComponentState::with_entanglement(3, 0, 7, a).unwrap();
            let pay = qso_payoffs(
                &tcqg(),
                &s.to_state(),
                &profile(&[0.5, 0.5]),
                WeightMode::Paper,
            )
            .unwrap();
            assert!(
                pay.max_abs_diff(&[0.5 + a, 0.5 + a, -1.0 - 2.0 * a]) < 1e-12,
                "a = {a}"
            );
        }
    }

    #[test]
    fn dimension_and_range_errors() {
        let state = StateVector::basis(4, 0).unwrap();
        assert!(matches!(
            apply_qso(&tcqg(), &state, &profile(&[0.5, 0.5])),
            Err(Error::Dimension { .. })
        ));
        assert!(StrategyProfile::new(vec![0.5, 1.01]).is_err());
    }
}
