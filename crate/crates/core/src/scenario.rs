use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cpo::{cpo_outcome_distribution, flip_mask_weights};
use crate::error::{Error, Result};
use crate::game::{
    expected_payoffs, player_name, GameSpec, OutcomeWeights, PayoffVector, StrategyProfile,
};
use crate::qso::{apply_qso, qso_outcome_weights, WeightMode};
use crate::state::{probabilities, StateVector, TwoComponentState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    Cpo,
    Qso,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Cpo => "cpo",
            Engine::Qso => "qso",
        })
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cpo" => Ok(Engine::Cpo),
            "qso" => Ok(Engine::Qso),
            other => Err(Error::Config(format!("unknown engine `{other}` (cpo|qso)"))),
        }
    }
}

/// A game, an initial state and the engine that evaluates it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub spec: GameSpec,
    pub state: StateVector,
    pub engine: Engine,
    /// Only consulted by the QSO engine.
    pub mode: WeightMode,
}

/// Outcome weights and payoffs at one profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub weights: OutcomeWeights,
    pub payoffs: PayoffVector,
}

impl Evaluation {
    pub fn total_weight(&self) -> f64 {
        self.weights.total()
    }
}

impl Scenario {
    pub fn new(
        spec: GameSpec,
        state: StateVector,
        engine: Engine,
        mode: WeightMode,
    ) -> Result<Self> {
        if state.n_qubits() != spec.n_players() {
            return Err(Error::Dimension {
                expected: spec.n_players(),
                found: state.n_qubits(),
            });
        }
        Ok(Scenario {
            spec,
            state,
            engine,
            mode,
        })
    }

    pub fn evaluate(&self, profile: &StrategyProfile) -> Result<Evaluation> {
        self.spec.check_profile(profile)?;
        let weights = match self.engine {
            Engine::Cpo => {
                let pi = flip_mask_weights(&self.spec, profile)?;
                cpo_outcome_distribution(&probabilities(&self.state), &pi)?
            }
            Engine::Qso => {
                qso_outcome_weights(&apply_qso(&self.spec, &self.state, profile)?, self.mode)?
            }
        };
        let payoffs = expected_payoffs(self.spec.payoff_table(), &weights)?;
        Ok(Evaluation { weights, payoffs })
    }

    pub fn payoffs(&self, profile: &StrategyProfile) -> Result<PayoffVector> {
        Ok(self.evaluate(profile)?.payoffs)
    }

    /// Payoff of one strategy group (mean over its members).
    pub fn group_payoff(&self, profile: &StrategyProfile, group: usize) -> Result<f64> {
        Ok(self.spec.group_payoff(&self.payoffs(profile)?, group))
    }

    pub fn group_names(&self) -> Vec<String> {
        self.spec.groups().iter().map(|g| g.name.clone()).collect()
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_groups()
    }

    /// Entanglement coefficient when the initial state has two components.
    pub fn entanglement(&self) -> Option<f64> {
        self.state
            .as_two_component()
            .map(|t| t.entanglement_coefficient())
    }

    /// Same two basis states, new entanglement coefficient `a`. Product
    /// states cannot be re-entangled because the second basis state is lost.
    pub fn with_entanglement(&self, a: f64) -> Result<Scenario> {
        let two = self.state.as_two_component().ok_or_else(|| {
            Error::Config("entanglement can only be set on a two-component initial state".into())
        })?;
        let state =
            TwoComponentState::with_entanglement(two.n_qubits(), two.basis_a(), two.basis_b(), a)?;
        Ok(Scenario {
            state: state.to_state(),
            ..self.clone()
        })
    }

    /// Parses `name=value` pairs keyed by group name into a profile.
    pub fn profile_from_pairs<'a>(
        &self,
        pairs: impl IntoIterator<Item = (&'a str, f64)>,
    ) -> Result<StrategyProfile> {
        let mut values: Vec<Option<f64>> = vec![None; self.n_params()];
        for (name, value) in pairs {
            let i = self.spec.group_index(name).ok_or_else(|| {
                Error::Config(format!(
                    "unknown group `{name}`; groups are {}",
                    self.group_names().join(", ")
                ))
            })?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ParameterOutOfRange {
                    group: name.to_string(),
                    value,
                });
            }
            if values[i].replace(value).is_some() {
                return Err(Error::Config(format!("group `{name}` given twice")));
            }
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    Error::Config(format!(
                        "missing value for group `{}`",
                        self.spec.groups()[i].name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        StrategyProfile::new(values)
    }

    pub fn payoff_column_names(&self) -> Vec<String> {
        (0..self.spec.n_players())
            .map(|p| format!("P_{}", player_name(p)))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Semantics;

    #[test]
    fn profile_pairs() {
        let spec = GameSpec::ab_coalition(3, Semantics::Correlated).unwrap();
        let sc = Scenario::new(
            spec,
            StateVector::basis(3, 0).unwrap(),
            Engine::Qso,
            WeightMode::Paper,
        )
        .unwrap();
        let p = sc.profile_from_pairs([("C", 0.2), ("AB", 0.7)]).unwrap();
        assert_eq!(p.values(), &[0.7, 0.2]);
        assert!(matches!(
            sc.profile_from_pairs([("AB", 0.7)]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sc.profile_from_pairs([("AB", 0.7), ("X", 0.1)]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            sc.profile_from_pairs([("AB", 1.7), ("C", 0.1)]),
            Err(Error::ParameterOutOfRange { .. })
        ));
    }

    #[test]
    fn reentangle() {
        let spec = GameSpec::ab_coalition(3, Semantics::Correlated).unwrap();
        let state = TwoComponentState::with_entanglement(3, 1, 6, 0.2)
            .unwrap()
            .to_state();
        let sc = Scenario::new(spec, state, Engine::Qso, WeightMode::Paper).unwrap();
        let sc2 = sc.with_entanglement(0.45).unwrap();
        assert!((sc2.entanglement().unwrap() - 0.45).abs() < 1e-15);
        assert_eq!(sc2.state.support(), vec![1, 6]);
    }
}
