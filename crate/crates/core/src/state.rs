//! Real-amplitude pure states over the computational basis.

use crate::error::{Error, Result};
use crate::game::MAX_PLAYERS;

const NORM_TOL: f64 = 1e-12;

/// n-qubit pure state with real (possibly signed) amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<f64>,
}

impl StateVector {
    /// Accepts amplitudes whose squared norm is 1 within 1e-12.
    pub fn new(n_qubits: usize, amplitudes: Vec<f64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Dimension {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        if let Some(a) = amplitudes.iter().find(|a| !a.is_finite()) {
            return Err(Error::Domain(format!("amplitude {a} is not finite")));
        }
        let norm2: f64 = amplitudes.iter().map(|a| a * a).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!(
                "state has squared norm {norm2}, expected 1"
            )));
        }
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    /// Accepts amplitudes whose squared norm is within `tol` of 1 and divides
    /// them by their norm. Amplitudes already normalized to within a few ulps
    /// are kept bit-for-bit.
    pub fn renormalized(n_qubits: usize, mut amplitudes: Vec<f64>, tol: f64) -> Result<Self> {
        let norm2: f64 = amplitudes.iter().map(|a| a * a).sum();
        if norm2.is_nan() || (norm2 - 1.0).abs() > tol {
            return Err(Error::Domain(format!(
                "state has squared norm {norm2}, more than {tol} away from 1"
            )));
        }
        if (norm2 - 1.0).abs() > 1e-14 {
            let norm = norm2.sqrt();
            amplitudes.iter_mut().for_each(|a| *a /= norm);
        }
        StateVector::new(n_qubits, amplitudes)
    }

    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        check_index(n_qubits, index)?;
        let mut amplitudes = vec![0.0; 1 << n_qubits];
        amplitudes[index] = 1.0;
        Ok(StateVector {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Indices with nonzero amplitude, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.amplitudes.len())
            .filter(|&i| self.amplitudes[i] != 0.0)
            .collect()
    }

    /// Recovers the two-component form when exactly two amplitudes are
    /// nonzero and both are nonnegative.
    pub fn as_two_component(&self) -> Option<TwoComponentState> {
        match self.support()[..] {
            [i, j] if self.amplitudes[i] > 0.0 && self.amplitudes[j] > 0.0 => {
                Some(TwoComponentState {
                    n_qubits: self.n_qubits,
                    basis_a: i,
                    basis_b: j,
                    c1: self.amplitudes[i],
                    c2: self.amplitudes[j],
                })
            }
            _ => None,
        }
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::InvalidSpec(
            "a state needs at least one qubit".into(),
        ));
    }
    if n_qubits > MAX_PLAYERS {
        return Err(Error::TooLarge {
            n: n_qubits,
            max: MAX_PLAYERS,
        });
    }
    Ok(())
}

fn check_index(n_qubits: usize, index: usize) -> Result<()> {
    if index >= 1 << n_qubits {
        return Err(Error::IndexOutOfRange { index, n_qubits });
    }
    Ok(())
}

/// `c1|basis_a⟩ + c2|basis_b⟩` with nonnegative coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoComponentState {
    n_qubits: usize,
    basis_a: usize,
    basis_b: usize,
    c1: f64,
    c2: f64,
}

impl TwoComponentState {
    pub fn new(n_qubits: usize, basis_a: usize, basis_b: usize, c1: f64) -> Result<Self> {
        check_qubits(n_qubits)?;
        check_index(n_qubits, basis_a)?;
        check_index(n_qubits, basis_b)?;
        if basis_a == basis_b {
            return Err(Error::InvalidSpec(format!(
                "two-component state needs distinct basis states, got {basis_a} twice"
            )));
        }
        if !(0.0..=1.0).contains(&c1) {
            return Err(Error::Domain(format!("c1 = {c1} is outside [0, 1]")));
        }
        let c2 = (1.0 - c1 * c1).sqrt();
        Ok(TwoComponentState {
            n_qubits,
            basis_a,
            basis_b,
            c1,
            c2,
        })
    }

    /// Picks `c1 ≥ c2 ≥ 0` with `c1·c2 = a`; requires `a ∈ [0, 1/2]`.
    pub fn with_entanglement(
        n_qubits: usize,
        basis_a: usize,
        basis_b: usize,
        a: f64,
    ) -> Result<Self> {
        if !(0.0..=0.5).contains(&a) {
            return Err(Error::Domain(format!(
                "entanglement coefficient a = {a} is outside [0, 0.5]"
            )));
        }
        // c1² and c2² are the roots of t² - t + a² = 0
        let disc = (1.0 - 4.0 * a * a).max(0.0).sqrt();
        let c1 = ((1.0 + disc) / 2.0).sqrt();
        TwoComponentState::new(n_qubits, basis_a, basis_b, c1)
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn basis_a(&self) -> usize {
        self.basis_a
    }

    pub fn basis_b(&self) -> usize {
        self.basis_b
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// a = c1·c2, in [0, 1/2].
    pub fn entanglement_coefficient(&self) -> f64 {
        self.c1 * self.c2
    }

    pub fn to_state(&self) -> StateVector {
        let mut amplitudes = vec![0.0; 1 << self.n_qubits];
        amplitudes[self.basis_a] = self.c1;
        amplitudes[self.basis_b] = self.c2;
        StateVector {
            n_qubits: self.n_qubits,
            amplitudes,
        }
    }
}

pub fn build_two_component(
    n: usize,
    basis_a: usize,
    basis_b: usize,
    c1: f64,
) -> Result<StateVector> {
    Ok(TwoComponentState::new(n, basis_a, basis_b, c1)?.to_state())
}

/// x_i = amplitude_i².
pub fn probabilities(state: &StateVector) -> Vec<f64> {
    state.amplitudes.iter().map(|a| a * a).collect()
}

pub fn entanglement_coefficient(state: &TwoComponentState) -> f64 {
    state.entanglement_coefficient()
}
