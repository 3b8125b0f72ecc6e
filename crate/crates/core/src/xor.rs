//! XOR convolution over bit-indexed vectors and the flip-mask weighting shared
//! by both engines.

use crate::error::{Error, Result};
use crate::game::{player_bit, GameSpec, Semantics, StrategyProfile};

/// In-place unnormalized Walsh-Hadamard transform. Applying it twice scales
/// by `xs.len()`.
pub fn fwht(xs: &mut [f64]) {
    debug_assert!(xs.len().is_power_of_two());
    let mut half = 1;
    while half < xs.len() {
        for block in xs.chunks_exact_mut(half * 2) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        half *= 2;
    }
}

/// `out[j] = Σ_k signal[j ^ k] · kernel[k]`, computed in the Walsh-Hadamard
/// domain.
pub fn xor_convolve(signal: &[f64], kernel: &[f64]) -> Result<Vec<f64>> {
    if !signal.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(signal.len()));
    }
    if kernel.len() != signal.len() {
        return Err(Error::Dimension {
            expected: signal.len(),
            found: kernel.len(),
        });
    }
    let mut s = signal.to_vec();
    let mut k = kernel.to_vec();
    fwht(&mut s);
    fwht(&mut k);
    s.iter_mut().zip(&k).for_each(|(a, b)| *a *= b);
    fwht(&mut s);
    let scale = 1.0 / signal.len() as f64;
    s.iter_mut().for_each(|v| *v *= scale);
    Ok(s)
}

/// Weight of every flip mask. `factors(param)` gives the (identity, flip)
/// weight of a single strategy group for its parameter.
pub(crate) fn mask_weights(
    spec: &GameSpec,
    profile: &StrategyProfile,
    factors: impl Fn(f64) -> (f64, f64),
) -> Result<Vec<f64>> {
    spec.check_profile(profile)?;
    let n = spec.n_players();
    let per_group: Vec<(f64, f64)> = profile.values().iter().map(|&v| factors(v)).collect();
    let weights = (0..spec.n_outcomes())
        .map(|mask| {
            spec.groups()
                .iter()
                .zip(&per_group)
                .fold(1.0, |w, (group, &(stay, flip))| {
                    if w == 0.0 {
                        return 0.0;
                    }
                    match spec.semantics() {
                        Semantics::Correlated => {
                            let gm = group.mask(n);
                            match mask & gm {
                                0 => w * stay,
                                m if m == gm => w * flip,
                                _ => 0.0,
                            }
                        }
                        Semantics::SharedParameter | Semantics::Independent => {
                            group.players.iter().fold(w, |acc, &p| {
                                acc * if player_bit(mask, p, n) == 0 {
                                    stay
                                } else {
                                    flip
                                }
                            })
                        }
                    }
                })
        })
        .collect();
    Ok(weights)
}
