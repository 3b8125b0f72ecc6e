//! Classical-probability-operator engine.
//!
//! Each group plays identity with probability `p` and a bit flip with
//! probability `1 - p`. Flips permute the computational basis, so only the
//! diagonal `x` of the initial state enters: `Q_j = Σ_k x_{j⊕k} Π_k`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::game::{expected_payoffs, GameSpec, OutcomeWeights, PayoffVector, StrategyProfile};
use crate::state::{probabilities, StateVector};
use crate::xor::{mask_weights, xor_convolve};

/// Probability of every joint flip mask (the Π vector).
pub fn flip_mask_weights(spec: &GameSpec, profile: &StrategyProfile) -> Result<Vec<f64>> {
    mask_weights(spec, profile, |p| (p, 1.0 - p))
}

/// The `2^n × 2^n` matrix with entry `(j, k) = x_{j⊕k}`.
pub fn lambda_matrix(x: &[f64]) -> Result<DMatrix<f64>> {
    if !x.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(x.len()));
    }
    let d = x.len();
    Ok(DMatrix::from_fn(d, d, |j, k| x[j ^ k]))
}

/// Outcome distribution `Q = Λ Π` by XOR convolution, without building Λ.
pub fn cpo_outcome_distribution(x: &[f64], flip_weights: &[f64]) -> Result<OutcomeWeights> {
    let mut q = xor_convolve(x, flip_weights)?;
    // Every term is a product of nonnegatives; anything below zero is
    // transform rounding.
    q.iter_mut().for_each(|v| *v = v.max(0.0));
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "outcome distribution sums to {total}; x and Π must both be probability vectors"
        )));
    }
    OutcomeWeights::normalized(q)
}

/// Expected payoffs for initial probabilities `x` under `profile`.
pub fn cpo_payoffs(spec: &GameSpec, x: &[f64], profile: &StrategyProfile) -> Result<PayoffVector> {
    if x.len() != spec.n_outcomes() {
        return Err(Error::Dimension {
            expected: spec.n_outcomes(),
            found: x.len(),
        });
    }
    let pi = flip_mask_weights(spec, profile)?;
    let q = cpo_outcome_distribution(x, &pi)?;
    expected_payoffs(spec.payoff_table(), &q)
}

/// [`cpo_payoffs`] starting from a pure state.
pub fn cpo_payoffs_for_state(
    spec: &GameSpec,
    state: &StateVector,
    profile: &StrategyProfile,
) -> Result<PayoffVector> {
    cpo_payoffs(spec, &probabilities(state), profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Semantics;

    fn profile(v: &[f64]) -> StrategyProfile {
        StrategyProfile::new(v.to_vec()).unwrap()
    }

    fn support(indices: &[usize]) -> Vec<f64> {
        let mut x = vec![0.0; 16];
        indices
            .iter()
            .for_each(|&i| x[i] = 1.0 / indices.len() as f64);
        x
    }

    #[test]
    fn pi_entries() {
        let spec = GameSpec::independent(4).unwrap();
        let (p, q, r, l) = (0.1, 0.3, 0.6, 0.8);
        let pi = flip_mask_weights(&spec, &profile(&[p, q, r, l])).unwrap();
        assert!((pi[0] - p * q * r * l).abs() < 1e-16);
        assert!((pi[1] - p * q * r * (1.0 - l)).abs() < 1e-16);
        assert!((pi[0b1010] - (1.0 - p) * q * (1.0 - r) * l).abs() < 1e-16);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let pi = flip_mask_weights(&spec, &profile(&[1.0; 4])).unwrap();
        assert_eq!(pi[0], 1.0);
        assert!(pi[1..].iter().all(|&w| w == 0.0));
    }

    #[test]
    fn correlated_group_never_splits() {
        let spec = GameSpec::ab_coalition(4, Semantics::Correlated).unwrap();
        let pi = flip_mask_weights(&spec, &profile(&[0.3, 0.5, 0.5])).unwrap();
        assert_eq!(pi[0b1000], 0.0);
        assert_eq!(pi[0b0100], 0.0);
        assert!((pi[0b1100] - 0.7 * 0.25).abs() < 1e-16);
        assert!((pi.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shared_parameter_flips_members_independently() {
        let spec = GameSpec::ab_coalition(3, Semantics::SharedParameter).unwrap();
        let pi = flip_mask_weights(&spec, &profile(&[0.3, 0.5])).unwrap();
        assert!((pi[0b100] - 0.3 * 0.7 * 0.5).abs() < 1e-16);
    }

    #[test]
    fn lambda_rows() {
        let x: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let lam = lambda_matrix(&x).unwrap();
        for k in 0..16 {
            assert_eq!(lam[(0, k)], x[k]);
        }
        let row1: Vec<f64> = (0..4).map(|k| lam[(1, k)]).collect();
        assert_eq!(row1, vec![1.0, 0.0, 3.0, 2.0]);
        assert_eq!(lam, lam.transpose());

        let mut e0 = vec![0.0; 16];
        e0[0] = 1.0;
        assert_eq!(lambda_matrix(&e0).unwrap(), DMatrix::identity(16, 16));
        assert!(lambda_matrix(&[0.5; 6]).is_err());
    }

    #[test]
    fn distribution_examples() {
        let x0 = support(&[0]);
        let mut pi = vec![0.0; 16];
        pi[7] = 1.0;
        let q = cpo_outcome_distribution(&x0, &pi).unwrap();
        assert_eq!(q.values()[7], 1.0);
        assert!((q.total() - 1.0).abs() < 1e-15);

        let uniform = vec![1.0 / 16.0; 16];
        let spec = GameSpec::independent(4).unwrap();
        let pi = flip_mask_weights(&spec, &profile(&[0.2, 0.9, 0.4, 0.7])).unwrap();
        let q = cpo_outcome_distribution(&uniform, &pi).unwrap();
        assert!(q.values().iter().all(|v| (v - 1.0 / 16.0).abs() < 1e-15));

        let pi = flip_mask_weights(&spec, &profile(&[1.0, 1.0, 0.5, 0.5])).unwrap();
        let q = cpo_outcome_distribution(&x0, &pi).unwrap();
        for (j, v) in q.values().iter().enumerate() {
            let expected = if j < 4 { 0.25 } else { 0.0 };
            assert!((v - expected).abs() < 1e-15, "Q_{j} = {v}");
        }
        assert!(cpo_outcome_distribution(&x0, &[1.0; 8]).is_err());
    }

    #[test]
    fn payoff_examples() {
        let spec = GameSpec::independent(4).unwrap();
        let u8 = support(&[0, 1, 2, 3, 12, 13, 14, 15]);
        for (r, l) in [(0.0, 0.0), (0.3, 0.9), (1.0, 0.4)] {
            for pq in [0.0, 1.0] {
                let pay = cpo_payoffs(&spec, &u8, &profile(&[pq, pq, r, l])).unwrap();
                assert!(pay.max_abs_diff(&[0.5, 0.5, -0.5, -0.5]) < 1e-12, "{pay:?}");
            }
        }

        let x0 = support(&[0]);
        for pq in [0.0, 1.0] {
            let pay = cpo_payoffs(&spec, &x0, &profile(&[pq, pq, 0.5, 0.5])).unwrap();
            assert!(pay.max_abs_diff(&[0.5, 0.5, -0.5, -0.5]) < 1e-12);
        }

        let null = support(&[0, 3, 5, 6, 9, 10, 12, 15]);
        let pay = cpo_payoffs(&spec, &null, &profile(&[0.1, 0.7, 0.35, 0.95])).unwrap();
        assert!(pay.max_abs_diff(&[0.0; 4]) < 1e-12);

        assert!(matches!(
            cpo_payoffs(&spec, &x0, &profile(&[0.5; 3])),
            Err(Error::ProfileMismatch { .. })
        ));
    }
}
