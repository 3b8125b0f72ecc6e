//! JSON scenario files.
//!
//! A config either names a preset (optionally with `a`, and optionally
//! overriding `weight_mode`) or spells the game out:
//!
//! ```json
//! {
//!   "n_players": 3,
//!   "groups": [{ "name": "AB", "players": ["A", "B"] }, { "name": "C", "players": ["C"] }],
//!   "semantics": "correlated",
//!   "engine": "qso",
//!   "weight_mode": "paper",
//!   "state": { "two_component": { "basis_a": "000", "basis_b": "111", "a": 0.33 } }
//! }
//! ```
//!
//! `state` may instead be `{ "amplitudes": { "000": 0.6, "111": 0.8 } }`.
//! Amplitudes must normalize to 1 within 1e-9 and are then renormalized.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{player_name, GameSpec, Group, Semantics};
use crate::presets::Preset;
use crate::qso::WeightMode;
use crate::scenario::{Engine, Scenario};
use crate::state::{StateVector, TwoComponentState};

/// Amplitude maps may be off by this much before renormalization.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum StateSource {
    Fixed(StateVector),
    TwoComponent {
        basis_a: usize,
        basis_b: usize,
        a: f64,
    },
}

/// A scenario whose entanglement coefficient can still be changed, as
/// needed for sweeps over `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTemplate {
    pub spec: GameSpec,
    pub engine: Engine,
    pub mode: WeightMode,
    pub state: StateSource,
}

impl ScenarioTemplate {
    pub fn supports_entanglement(&self) -> bool {
        matches!(self.state, StateSource::TwoComponent { .. })
    }

    pub fn build(&self, a_override: Option<f64>) -> Result<Scenario> {
        let state = match (&self.state, a_override) {
            (StateSource::Fixed(s), None) => s.clone(),
            (StateSource::Fixed(_), Some(_)) => {
                return Err(Error::Config(
                    "entanglement can only be set on a two-component initial state".into(),
                ))
            }
            (
                &StateSource::TwoComponent {
                    basis_a,
                    basis_b,
                    a,
                },
                over,
            ) => TwoComponentState::with_entanglement(
                self.spec.n_players(),
                basis_a,
                basis_b,
                over.unwrap_or(a),
            )?
            .to_state(),
        };
        Scenario::new(self.spec.clone(), state, self.engine, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub players: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoComponentConfig {
    pub basis_a: String,
    pub basis_b: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StateConfig {
    Amplitudes(BTreeMap<String, f64>),
    TwoComponent(TwoComponentConfig),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    /// Entanglement coefficient for two-component presets.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_players: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<GroupConfig>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantics: Option<Semantics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<Engine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_mode: Option<WeightMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateConfig>,
}

fn parse_player(name: &str, n: usize) -> Result<usize> {
    let mut chars = name.chars();
    match (chars.next(), chars.next()) {
        (Some(c @ 'A'..='Z'), None) if ((c as u8 - b'A') as usize) < n => {
            Ok((c as u8 - b'A') as usize)
        }
        _ => Err(Error::Config(format!(
            "`{name}` is not a player of a {n}-player game (use A, B, ...)"
        ))),
    }
}

fn parse_basis(bits: &str, n: usize) -> Result<usize> {
    if bits.len() != n || !bits.bytes().all(|b| b == b'0' || b == b'1') {
        return Err(Error::Config(format!(
            "basis state `{bits}` must be a string of {n} bits"
        )));
    }
    Ok(usize::from_str_radix(bits, 2).expect("validated bit string"))
}

fn format_basis(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_preset(preset: Preset, a: Option<f64>) -> Self {
        ScenarioConfig {
            preset: Some(preset),
            a,
            ..Default::default()
        }
    }

    pub fn template(&self) -> Result<ScenarioTemplate> {
        if let Some(preset) = self.preset {
            if self.n_players.is_some()
                || self.groups.is_some()
                || self.semantics.is_some()
                || self.engine.is_some()
                || self.state.is_some()
            {
                return Err(Error::Config(
                    "a preset config may only add `a` and `weight_mode`".into(),
                ));
            }
            let mut t = preset.template(self.a)?;
            if let Some(mode) = self.weight_mode {
                t.mode = mode;
            }
            return Ok(t);
        }
        if self.a.is_some() {
            return Err(Error::Config(
                "top-level `a` is only valid with a preset; put it in `state.two_component`".into(),
            ));
        }
        let n = self
            .n_players
            .ok_or_else(|| Error::Config("missing `n_players`".into()))?;
        let engine = self
            .engine
            .ok_or_else(|| Error::Config("missing `engine`".into()))?;
        let state_cfg = self
            .state
            .as_ref()
            .ok_or_else(|| Error::Config("missing `state` (or give a `preset`)".into()))?;

        let groups: Vec<Group> = match &self.groups {
            Some(gs) => gs
                .iter()
                .map(|g| {
                    let players = g
                        .players
                        .iter()
                        .map(|p| parse_player(p, n))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(Group::new(g.name.clone(), players))
                })
                .collect::<Result<_>>()?,
            None => (0..n)
                .map(|p| Group::new(player_name(p).to_string(), vec![p]))
                .collect(),
        };
        let semantics = self
            .semantics
            .unwrap_or(if groups.iter().all(|g| g.players.len() == 1) {
                Semantics::Independent
            } else {
                Semantics::Correlated
            });
        let spec = GameSpec::new(n, groups, semantics)?;

        let state = match state_cfg {
            StateConfig::Amplitudes(map) => {
                let mut amps = vec![0.0; 1 << n];
                for (bits, &v) in map {
                    amps[parse_basis(bits, n)?] = v;
                }
                StateSource::Fixed(StateVector::renormalized(n, amps, AMPLITUDE_NORM_TOL)?)
            }
            StateConfig::TwoComponent(tc) => {
                let basis_a = parse_basis(&tc.basis_a, n)?;
                let basis_b = parse_basis(&tc.basis_b, n)?;
                match (tc.c1, tc.a) {
                    (Some(c1), None) => StateSource::Fixed(
                        TwoComponentState::new(n, basis_a, basis_b, c1)?.to_state(),
                    ),
                    (None, Some(a)) => {
                        TwoComponentState::with_entanglement(n, basis_a, basis_b, a)?;
                        StateSource::TwoComponent {
                            basis_a,
                            basis_b,
                            a,
                        }
                    }
                    _ => {
                        return Err(Error::Config(
                            "two_component needs exactly one of `c1` or `a`".into(),
                        ))
                    }
                }
            }
        };
        Ok(ScenarioTemplate {
            spec,
            engine,
            mode: self.weight_mode.unwrap_or_default(),
            state,
        })
    }

    pub fn scenario(&self) -> Result<Scenario> {
        self.template()?.build(None)
    }

    /// Fully explicit config for `scenario` (amplitude map, no preset).
    pub fn from_scenario(scenario: &Scenario) -> Self {
        let n = scenario.spec.n_players();
        let groups = scenario
            .spec
            .groups()
            .iter()
            .map(|g| GroupConfig {
                name: g.name.clone(),
                players: g
                    .players
                    .iter()
                    .map(|&p| player_name(p).to_string())
                    .collect(),
            })
            .collect();
        let amplitudes = scenario
            .state
            .support()
            .into_iter()
            .map(|i| (format_basis(i, n), scenario.state.amplitudes()[i]))
            .collect();
        ScenarioConfig {
            preset: None,
            a: None,
            n_players: Some(n),
            groups: Some(groups),
            semantics: Some(scenario.spec.semantics()),
            engine: Some(scenario.engine),
            weight_mode: Some(scenario.mode),
            state: Some(StateConfig::Amplitudes(amplitudes)),
        }
    }
}
