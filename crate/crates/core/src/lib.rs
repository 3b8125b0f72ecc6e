//! Cooperative three- and four-player quantum minority games.
//!
//! Two ways of executing a strategy are supported:
//!
//! * **CPO** (classical probability operator): each strategy group plays the
//!   identity with probability `p` and a bit flip otherwise
//!   ([`cpo`]).
//! * **QSO** (quantum superposed operator): each group applies
//!   `√p·I + √(1-p)·X` to the amplitudes ([`qso`]).
//!
//! Both engines feed the minority payoff table in [`game`]. [`oracle`]
//! recomputes everything by brute force, [`equilibrium`] audits candidate
//! profiles, and [`config`], [`sweep`] and [`reproduce`] back the CLI.

pub mod config;
pub mod cpo;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod oracle;
pub mod presets;
pub mod qso;
pub mod reproduce;
pub mod scenario;
pub mod state;
pub mod sweep;
pub mod xor;

pub use config::{ScenarioConfig, ScenarioTemplate};
pub use error::{Error, Result};
pub use game::{
    expected_payoffs, minority_payoff_table, GameSpec, Group, OutcomeWeights, PayoffTable,
    PayoffVector, Semantics, StrategyProfile,
};
pub use presets::Preset;
pub use qso::WeightMode;
pub use scenario::{Engine, Evaluation, Scenario};
pub use state::{StateVector, TwoComponentState};
