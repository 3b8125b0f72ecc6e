use minority_qgame::cpo::{cpo_outcome_distribution, cpo_payoffs, flip_mask_weights};
use minority_qgame::game::player_bit;
use minority_qgame::oracle::oracle_scenario_payoffs;
use minority_qgame::qso::{apply_qso, qso_outcome_weights};
use minority_qgame::{
    minority_payoff_table, Engine, GameSpec, Group, Scenario, ScenarioConfig, Semantics,
    StateVector, StrategyProfile, WeightMode,
};
use proptest::prelude::*;

const EXACT: f64 = 1e-12;

fn unit(values: Vec<f64>) -> Vec<f64> {
    let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
    values.into_iter().map(|v| v / norm).collect()
}

fn probability_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("all zero", |v| {
        let total: f64 = v.iter().sum();
        (total > 1e-3).then(|| v.into_iter().map(|w| w / total).collect())
    })
}

fn amplitudes(len: usize, signed: bool) -> impl Strategy<Value = Vec<f64>> {
    let lo = if signed { -1.0 } else { 0.0 };
    prop::collection::vec(lo..1.0f64, len).prop_filter_map("near-zero state", |v| {
        (v.iter().map(|a| a * a).sum::<f64>() > 1e-3).then(|| unit(v))
    })
}

/// A random partition of `n` players into named groups plus a valid semantics.
fn game_spec() -> impl Strategy<Value = GameSpec> {
    (3usize..=4)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(0usize..4, n), 0usize..2))
        .prop_map(|(n, labels, sem)| {
            let mut groups: Vec<Vec<usize>> = Vec::new();
            let mut seen: Vec<usize> = Vec::new();
            for (player, &label) in labels.iter().enumerate() {
                match seen.iter().position(|&l| l == label) {
                    Some(g) => groups[g].push(player),
                    None => {
                        seen.push(label);
                        groups.push(vec![player]);
                    }
                }
            }
            let singletons = groups.iter().all(|g| g.len() == 1);
            let semantics = match (singletons, sem) {
                (true, _) => Semantics::Independent,
                (false, 0) => Semantics::Correlated,
                _ => Semantics::SharedParameter,
            };
            let groups = groups
                .into_iter()
                .map(|players| {
                    let name: String = players.iter().map(|&p| (b'A' + p as u8) as char).collect();
                    Group::new(name, players)
                })
                .collect();
            GameSpec::new(n, groups, semantics).expect("valid partition")
        })
}

fn scenario(
    engine: Engine,
    mode: WeightMode,
) -> impl Strategy<Value = (Scenario, StrategyProfile)> {
    game_spec().prop_flat_map(move |spec| {
        let n = spec.n_players();
        let k = spec.n_groups();
        let state = match engine {
            Engine::Cpo => probability_vector(1 << n)
                .prop_map(|x| x.iter().map(|v| v.sqrt()).collect())
                .boxed(),
            Engine::Qso => amplitudes(1 << n, mode == WeightMode::Paper).boxed(),
        };
        (Just(spec), state, prop::collection::vec(0.0f64..=1.0, k)).prop_map(
            move |(spec, amps, profile)| {
                let state = StateVector::renormalized(spec.n_players(), amps, 1e-9).unwrap();
                (
                    Scenario::new(spec, state, engine, mode).unwrap(),
                    StrategyProfile::new(profile).unwrap(),
                )
            },
        )
    })
}

/// Moves player `k`'s bit to player `perm[k]`'s position.
fn permute_outcome(i: usize, perm: &[usize], n: usize) -> usize {
    (0..n).fold(0, |acc, k| acc | (player_bit(i, k, n) << (n - 1 - perm[k])))
}

#[test]
fn every_outcome_is_zero_sum() {
    for n in 3..=8 {
        let table = minority_payoff_table(n).unwrap();
        for i in 0..table.n_outcomes() {
            assert_eq!(table.outcome(i).iter().sum::<i32>(), 0, "n={n} outcome {i}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cpo_agrees_with_oracle((sc, profile) in scenario(Engine::Cpo, WeightMode::Paper)) {
        let oracle = oracle_scenario_payoffs(&sc, &profile).unwrap();
        prop_assert!(oracle.max_deviation <= EXACT, "deviation {}", oracle.max_deviation);
        prop_assert!(oracle.payoffs.iter().sum::<f64>().abs() <= EXACT);
    }

    #[test]
    fn qso_agrees_with_oracle((sc, profile) in scenario(Engine::Qso, WeightMode::Paper)) {
        let oracle = oracle_scenario_payoffs(&sc, &profile).unwrap();
        prop_assert!(oracle.max_deviation <= EXACT, "deviation {}", oracle.max_deviation);
        prop_assert!(oracle.payoffs.iter().sum::<f64>().abs() <= EXACT);
    }

    #[test]
    fn normalized_qso_agrees_with_oracle((sc, profile) in scenario(Engine::Qso, WeightMode::Normalized)) {
        let oracle = oracle_scenario_payoffs(&sc, &profile).unwrap();
        prop_assert!(oracle.max_deviation <= EXACT, "deviation {}", oracle.max_deviation);
    }

    #[test]
    fn cpo_distribution_is_normalized(
        x in probability_vector(16),
        profile in prop::collection::vec(0.0f64..=1.0, 4),
    ) {
        let spec = GameSpec::independent(4).unwrap();
        let pi = flip_mask_weights(&spec, &StrategyProfile::new(profile).unwrap()).unwrap();
        let q = cpo_outcome_distribution(&x, &pi).unwrap();
        prop_assert!(q.values().iter().all(|&v| v >= 0.0));
        prop_assert!((q.values().iter().sum::<f64>() - 1.0).abs() <= EXACT);
    }

    #[test]
    fn qso_paper_weight_at_least_one((sc, profile) in scenario(Engine::Qso, WeightMode::Normalized)) {
        // nonnegative amplitudes: every cross term adds weight
        let total = apply_qso(&sc.spec, &sc.state, &profile).unwrap().total_weight();
        prop_assert!(total >= 1.0 - EXACT, "total {total}");
    }

    #[test]
    fn qso_weight_is_one_for_basis_states_and_pure_profiles(
        (sc, profile) in scenario(Engine::Qso, WeightMode::Paper),
        basis in 0usize..8,
        pure in prop::collection::vec(prop::bool::ANY, 4),
    ) {
        let n = sc.spec.n_players();
        let b = StateVector::basis(n, basis).unwrap();
        prop_assert!((apply_qso(&sc.spec, &b, &profile).unwrap().total_weight() - 1.0).abs() <= EXACT);
        let corner: Vec<f64> = (0..sc.spec.n_groups()).map(|g| if pure[g] { 1.0 } else { 0.0 }).collect();
        let corner = StrategyProfile::new(corner).unwrap();
        prop_assert!((apply_qso(&sc.spec, &sc.state, &corner).unwrap().total_weight() - 1.0).abs() <= EXACT);
    }

    #[test]
    fn weight_modes_differ_by_total((sc, profile) in scenario(Engine::Qso, WeightMode::Normalized)) {
        let out = apply_qso(&sc.spec, &sc.state, &profile).unwrap();
        let total = out.total_weight();
        let paper = Scenario { mode: WeightMode::Paper, ..sc.clone() }.evaluate(&profile).unwrap();
        let normalized = sc.evaluate(&profile).unwrap();
        for (p, q) in paper.payoffs.values().iter().zip(normalized.payoffs.values()) {
            prop_assert!((p / total - q).abs() <= EXACT);
        }
        let w = qso_outcome_weights(&out, WeightMode::Normalized).unwrap();
        prop_assert!((w.values().iter().sum::<f64>() - 1.0).abs() <= EXACT);
    }

    #[test]
    fn relabeling_players_permutes_payoffs(
        x in probability_vector(16),
        profile in prop::collection::vec(0.0f64..=1.0, 4),
        perm in Just(vec![0usize, 1, 2, 3]).prop_shuffle(),
    ) {
        let n = 4;
        let spec = GameSpec::independent(n).unwrap();
        let mut x2 = vec![0.0; 16];
        let mut profile2 = vec![0.0; n];
        for i in 0..16 {
            x2[permute_outcome(i, &perm, n)] = x[i];
        }
        for k in 0..n {
            profile2[perm[k]] = profile[k];
        }
        let before = cpo_payoffs(&spec, &x, &StrategyProfile::new(profile).unwrap()).unwrap();
        let after = cpo_payoffs(&spec, &x2, &StrategyProfile::new(profile2).unwrap()).unwrap();
        for k in 0..n {
            prop_assert!((before[k] - after[perm[k]]).abs() <= EXACT);
        }
    }

    #[test]
    fn qso_relabeling_permutes_payoffs(
        amps in amplitudes(8, true),
        profile in prop::collection::vec(0.0f64..=1.0, 3),
        perm in Just(vec![0usize, 1, 2]).prop_shuffle(),
    ) {
        let n = 3;
        let spec = GameSpec::independent(n).unwrap();
        let mut amps2 = vec![0.0; 8];
        let mut profile2 = vec![0.0; n];
        for i in 0..8 {
            amps2[permute_outcome(i, &perm, n)] = amps[i];
        }
        for k in 0..n {
            profile2[perm[k]] = profile[k];
        }
        let eval = |a: Vec<f64>, p: Vec<f64>| {
            let sc = Scenario::new(spec.clone(), StateVector::renormalized(n, a, 1e-9).unwrap(), Engine::Qso, WeightMode::Paper).unwrap();
            sc.payoffs(&StrategyProfile::new(p).unwrap()).unwrap()
        };
        let before = eval(amps, profile);
        let after = eval(amps2, profile2);
        for k in 0..n {
            prop_assert!((before[k] - after[perm[k]]).abs() <= EXACT);
        }
    }

    #[test]
    fn config_roundtrip_is_exact((sc, _) in scenario(Engine::Qso, WeightMode::Paper)) {
        let json = ScenarioConfig::from_scenario(&sc).to_json().unwrap();
        let back = ScenarioConfig::from_json(&json).unwrap().scenario().unwrap();
        prop_assert_eq!(back, sc);
    }

    #[test]
    fn cpo_config_roundtrip_is_exact((sc, _) in scenario(Engine::Cpo, WeightMode::Paper)) {
        let json = ScenarioConfig::from_scenario(&sc).to_json().unwrap();
        let back = ScenarioConfig::from_json(&json).unwrap().scenario().unwrap();
        prop_assert_eq!(back, sc);
    }
}
