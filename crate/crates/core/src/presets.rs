//! Named scenarios for the standard three- and four-player games.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{ScenarioTemplate, StateSource};
use crate::error::{Error, Result};
use crate::game::{GameSpec, Semantics};
use crate::qso::WeightMode;
use crate::scenario::Engine;
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Three players, AB coalition, `c1|000⟩ + c2|111⟩`, QSO.
    #[serde(rename = "tcqg-ghz")]
    TcqgGhz,
    /// Three players, AB coalition, `c1|001⟩ + c2|110⟩`, QSO.
    #[serde(rename = "tcqg-flip")]
    TcqgFlip,
    /// Four independent CPO players, uniform on {0,1,2,3,12,13,14,15}.
    #[serde(rename = "fcqg-cpo-uniform8")]
    FcqgCpoUniform8,
    /// Four independent CPO players starting in |0000⟩.
    #[serde(rename = "fcqg-cpo-product")]
    FcqgCpoProduct,
    /// Four independent CPO players, uniform on {0,3,5,6,9,10,12,15}: every payoff vanishes.
    #[serde(rename = "fcqg-cpo-null")]
    FcqgCpoNull,
    /// Four independent CPO players on {0,3,5,6,9,10,12,15} with unequal weights.
    #[serde(rename = "fcqg-cpo-mixed")]
    FcqgCpoMixed,
    /// Four players, AB coalition, `c1|0000⟩ + c2|1111⟩`, QSO.
    #[serde(rename = "fcqg-qso-ghz")]
    FcqgQsoGhz,
    /// Four players, AB coalition, `c1|0001⟩ + c2|1101⟩`, QSO.
    #[serde(rename = "fcqg-qso-0001")]
    FcqgQso0001,
}

/// x for the mixed preset, indexed by outcome.
pub const MIXED_PROBABILITIES: [(usize, f64); 8] = [
    (0, 0.2),
    (15, 0.2),
    (3, 0.15),
    (12, 0.15),
    (5, 0.1),
    (10, 0.1),
    (6, 0.05),
    (9, 0.05),
];

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::TcqgGhz,
        Preset::TcqgFlip,
        Preset::FcqgCpoUniform8,
        Preset::FcqgCpoProduct,
        Preset::FcqgCpoNull,
        Preset::FcqgCpoMixed,
        Preset::FcqgQsoGhz,
        Preset::FcqgQso0001,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TcqgGhz => "tcqg-ghz",
            Preset::TcqgFlip => "tcqg-flip",
            Preset::FcqgCpoUniform8 => "fcqg-cpo-uniform8",
            Preset::FcqgCpoProduct => "fcqg-cpo-product",
            Preset::FcqgCpoNull => "fcqg-cpo-null",
            Preset::FcqgCpoMixed => "fcqg-cpo-mixed",
            Preset::FcqgQsoGhz => "fcqg-qso-ghz",
            Preset::FcqgQso0001 => "fcqg-qso-0001",
        }
    }

    /// Whether the preset's state is parameterized by an entanglement coefficient.
    pub fn is_two_component(self) -> bool {
        matches!(
            self,
            Preset::TcqgGhz | Preset::TcqgFlip | Preset::FcqgQsoGhz | Preset::FcqgQso0001
        )
    }

    pub fn template(self, a: Option<f64>) -> Result<ScenarioTemplate> {
        let two = |basis_a: usize, basis_b: usize| -> Result<StateSource> {
            let a = a.ok_or_else(|| {
                Error::Config(format!(
                    "preset `{}` needs an entanglement coefficient a in [0, 0.5]",
                    self.name()
                ))
            })?;
            Ok(StateSource::TwoComponent {
                basis_a,
                basis_b,
                a,
            })
        };
        if !self.is_two_component() && a.is_some() {
            return Err(Error::Config(format!(
                "preset `{}` has no entanglement coefficient to set",
                self.name()
            )));
        }
        let uniform = |support: &[usize]| -> Result<StateSource> {
            let amp = (1.0 / support.len() as f64).sqrt();
            let mut amps = vec![0.0; 16];
            support.iter().for_each(|&i| amps[i] = amp);
            Ok(StateSource::Fixed(StateVector::renormalized(
                4, amps, 1e-9,
            )?))
        };
        let (spec, engine, state) = match self {
            Preset::TcqgGhz => (
                GameSpec::ab_coalition(3, Semantics::Correlated)?,
                Engine::Qso,
                two(0b000, 0b111)?,
            ),
            Preset::TcqgFlip => (
                GameSpec::ab_coalition(3, Semantics::Correlated)?,
                Engine::Qso,
                two(0b001, 0b110)?,
            ),
            Preset::FcqgQsoGhz => (
                GameSpec::ab_coalition(4, Semantics::Correlated)?,
                Engine::Qso,
                two(0b0000, 0b1111)?,
            ),
            Preset::FcqgQso0001 => (
                GameSpec::ab_coalition(4, Semantics::Correlated)?,
                Engine::Qso,
                two(0b0001, 0b1101)?,
            ),
            Preset::FcqgCpoUniform8 => (
                GameSpec::independent(4)?,
                Engine::Cpo,
                uniform(&[0, 1, 2, 3, 12, 13, 14, 15])?,
            ),
            Preset::FcqgCpoNull => (
                GameSpec::independent(4)?,
                Engine::Cpo,
                uniform(&[0, 3, 5, 6, 9, 10, 12, 15])?,
            ),
            Preset::FcqgCpoProduct => (
                GameSpec::independent(4)?,
                Engine::Cpo,
                StateSource::Fixed(StateVector::basis(4, 0)?),
            ),
            Preset::FcqgCpoMixed => {
                let mut amps = vec![0.0; 16];
                MIXED_PROBABILITIES
                    .iter()
                    .for_each(|&(i, x)| amps[i] = f64::sqrt(x));
                (
                    GameSpec::independent(4)?,
                    Engine::Cpo,
                    StateSource::Fixed(StateVector::renormalized(4, amps, 1e-9)?),
                )
            }
        };
        Ok(ScenarioTemplate {
            spec,
            engine,
            mode: WeightMode::Paper,
            state,
        })
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.name()));
        }
        assert!(matches!(
            "nope".parse::<Preset>(),
            Err(Error::UnknownPreset(_))
        ));
    }

    #[test]
    fn every_preset_state_is_normalized() {
        for p in Preset::ALL {
            let a = p.is_two_component().then_some(0.33);
            let sc = p.template(a).unwrap().build(None).unwrap();
            let n2: f64 = sc.state.amplitudes().iter().map(|v| v * v).sum();
            assert!((n2 - 1.0).abs() < 1e-12, "{p}");
        }
    }

    #[test]
    fn entanglement_requirements() {
        assert!(Preset::TcqgGhz.template(None).is_err());
        assert!(Preset::FcqgCpoNull.template(Some(0.2)).is_err());
    }
}
