//! Gradients, stationary points, best-response audits and classification of
//! strategy profiles.
//!
//! Stationarity and the Nash property are reported separately: a profile
//! where every group's own partial derivative vanishes can still leave a
//! group a profitable unilateral deviation (a minimum along its own line).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::StrategyProfile;
use crate::scenario::Scenario;

/// Central-difference step for first derivatives.
pub const GRADIENT_STEP: f64 = 1e-6;
/// Step for second derivatives (Hessian and the Newton Jacobian).
pub const HESSIAN_STEP: f64 = 1e-4;
/// Parameters closer than this to 0 or 1 count as boundary.
pub const INTERIOR_MARGIN: f64 = 1e-6;
pub const STATIONARY_TOL: f64 = 1e-9;
pub const NASH_TOL: f64 = 1e-9;
pub const DEFAULT_AUDIT_GRID: usize = 1001;
/// Profiles closer than this (max-norm) are the same stationary point.
pub const DEDUP_RADIUS: f64 = 1e-6;
/// Hessian eigenvalues smaller than this in magnitude count as zero.
pub const CURVATURE_TOL: f64 = 1e-6;

fn is_interior(profile: &StrategyProfile, margin: f64) -> bool {
    profile
        .values()
        .iter()
        .all(|&v| v > margin && v < 1.0 - margin)
}

fn shifted(profile: &StrategyProfile, i: usize, delta: f64) -> Result<StrategyProfile> {
    profile.with(i, profile[i] + delta)
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `∂(payoff of player) / ∂(parameter)` for every player (rows) and
/// parameter (columns), by central differences.
pub fn payoff_jacobian(scenario: &Scenario, profile: &StrategyProfile) -> Result<Vec<Vec<f64>>> {
    scenario.spec.check_profile(profile)?;
    if !is_interior(profile, INTERIOR_MARGIN) {
        return Err(Error::BoundaryProfile(profile.values().to_vec()));
    }
    let n_players = scenario.spec.n_players();
    let mut jac = vec![vec![0.0; profile.len()]; n_players];
    for i in 0..profile.len() {
        let up = scenario.payoffs(&shifted(profile, i, GRADIENT_STEP)?)?;
        let down = scenario.payoffs(&shifted(profile, i, -GRADIENT_STEP)?)?;
        for (player, row) in jac.iter_mut().enumerate() {
            row[i] = (up[player] - down[player]) / (2.0 * GRADIENT_STEP);
        }
    }
    Ok(jac)
}

/// For each group, the derivative of its own payoff with respect to its own
/// parameter.
pub fn payoff_gradient(scenario: &Scenario, profile: &StrategyProfile) -> Result<Vec<f64>> {
    scenario.spec.check_profile(profile)?;
    if !is_interior(profile, INTERIOR_MARGIN) {
        return Err(Error::BoundaryProfile(profile.values().to_vec()));
    }
    (0..profile.len())
        .map(|g| {
            let up = scenario.group_payoff(&shifted(profile, g, GRADIENT_STEP)?, g)?;
            let down = scenario.group_payoff(&shifted(profile, g, -GRADIENT_STEP)?, g)?;
            Ok((up - down) / (2.0 * GRADIENT_STEP))
        })
        .collect()
}

/// Jacobian of the own-payoff gradient field, used by the Newton search.
fn gradient_jacobian(scenario: &Scenario, x: &[f64]) -> Result<DMatrix<f64>> {
    let k = x.len();
    let mut jac = DMatrix::zeros(k, k);
    for j in 0..k {
        let mut up = x.to_vec();
        let mut down = x.to_vec();
        up[j] += HESSIAN_STEP;
        down[j] -= HESSIAN_STEP;
        let gu = payoff_gradient(scenario, &StrategyProfile::new(up)?)?;
        let gd = payoff_gradient(scenario, &StrategyProfile::new(down)?)?;
        for i in 0..k {
            jac[(i, j)] = (gu[i] - gd[i]) / (2.0 * HESSIAN_STEP);
        }
    }
    Ok(jac)
}

/// Multi-start damped Newton on the own-payoff gradient field. Returns the
/// distinct interior profiles whose gradient max-norm is at most
/// [`STATIONARY_TOL`], sorted lexicographically.
pub fn stationary_profile_search(
    scenario: &Scenario,
    n_starts: usize,
    seed: u64,
) -> Result<Vec<StrategyProfile>> {
    const MAX_ITERS: usize = 200;
    // keeps Newton iterates clear of the Jacobian stencil's reach
    let lo = 2.0 * HESSIAN_STEP;
    let hi = 1.0 - lo;

    let k = scenario.n_params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut found: Vec<StrategyProfile> = Vec::new();

    for _ in 0..n_starts.max(1) {
        let mut x: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
        let mut g = payoff_gradient(scenario, &StrategyProfile::new(x.clone())?)?;
        for _ in 0..MAX_ITERS {
            if max_norm(&g) <= STATIONARY_TOL {
                break;
            }
            let jac = gradient_jacobian(scenario, &x)?;
            let rhs = -DVector::from_column_slice(&g);
            let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-10) else {
                break;
            };
            let mut alpha = 1.0;
            let mut accepted = false;
            while alpha > 1e-8 {
                let trial: Vec<f64> = x
                    .iter()
                    .zip(step.iter())
                    .map(|(xi, di)| (xi + alpha * di).clamp(lo, hi))
                    .collect();
                let gt = payoff_gradient(scenario, &StrategyProfile::new(trial.clone())?)?;
                if max_norm(&gt) < max_norm(&g) {
                    x = trial;
                    g = gt;
                    accepted = true;
                    break;
                }
                alpha /= 2.0;
            }
            if !accepted {
                break;
            }
        }
        if max_norm(&g) <= STATIONARY_TOL {
            let already = found.iter().any(|f| {
                f.values()
                    .iter()
                    .zip(&x)
                    .all(|(a, b)| (a - b).abs() <= DEDUP_RADIUS)
            });
            if !already {
                found.push(StrategyProfile::new(x)?);
            }
        }
    }
    found.sort_by(|a, b| {
        a.values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupImprovement {
    pub group: String,
    /// Group payoff at the audited profile.
    pub baseline: f64,
    /// Best group payoff over the unilateral scan.
    pub best: f64,
    /// Parameter value attaining `best`.
    pub best_value: f64,
    /// `max(0, best - baseline)`.
    pub improvement: f64,
}

/// Scans each group's own parameter over a uniform grid on `[0, 1]` with the
/// others held fixed and reports how much the group could gain.
pub fn best_response_audit(
    scenario: &Scenario,
    profile: &StrategyProfile,
    grid_points: usize,
) -> Result<Vec<GroupImprovement>> {
    if grid_points < 3 {
        return Err(Error::Config(format!(
            "audit grid needs at least 3 points, got {grid_points}"
        )));
    }
    scenario.spec.check_profile(profile)?;
    let step = 1.0 / (grid_points - 1) as f64;
    (0..profile.len())
        .map(|g| {
            let baseline = scenario.group_payoff(profile, g)?;
            let mut best = baseline;
            let mut best_value = profile[g];
            for i in 0..grid_points {
                let v = if i + 1 == grid_points {
                    1.0
                } else {
                    i as f64 * step
                };
                let payoff = scenario.group_payoff(&profile.with(g, v)?, g)?;
                if payoff > best {
                    best = payoff;
                    best_value = v;
                }
            }
            Ok(GroupImprovement {
                group: scenario.spec.groups()[g].name.clone(),
                baseline,
                best,
                best_value,
                improvement: (best - baseline).max(0.0),
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// Stationary; no best-response audit was run.
    Stationary,
    NashEquilibrium {
        tolerance: f64,
    },
    StationaryNotNash,
    NotStationary,
    /// Boundary profile (no gradient) that fails the audit.
    NotNash,
}

impl Classification {
    pub fn is_stationary(&self) -> bool {
        matches!(
            self,
            Classification::Stationary | Classification::StationaryNotNash
        )
    }

    pub fn is_nash(&self) -> bool {
        matches!(self, Classification::NashEquilibrium { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Classification::Stationary => "Stationary",
            Classification::NashEquilibrium { .. } => "NashEquilibrium",
            Classification::StationaryNotNash => "StationaryNotNash",
            Classification::NotStationary => "NotStationary",
            Classification::NotNash => "NotNash",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HessianShape {
    Saddle,
    Maximum,
    Minimum,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HessianReport {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    pub shape: HessianShape,
}

/// Finite-difference Hessian of player A's payoff for two-parameter games.
pub fn player_a_hessian(scenario: &Scenario, profile: &StrategyProfile) -> Result<HessianReport> {
    if profile.len() != 2 {
        return Err(Error::ProfileMismatch {
            expected: 2,
            found: profile.len(),
        });
    }
    if !is_interior(profile, 2.0 * HESSIAN_STEP) {
        return Err(Error::BoundaryProfile(profile.values().to_vec()));
    }
    let h = HESSIAN_STEP;
    let f = |dp: f64, dq: f64| -> Result<f64> {
        let pr = StrategyProfile::new(vec![profile[0] + dp, profile[1] + dq])?;
        Ok(scenario.payoffs(&pr)?[0])
    };
    let f0 = f(0.0, 0.0)?;
    let fpp = (f(h, 0.0)? - 2.0 * f0 + f(-h, 0.0)?) / (h * h);
    let fqq = (f(0.0, h)? - 2.0 * f0 + f(0.0, -h)?) / (h * h);
    let fpq = (f(h, h)? - f(h, -h)? - f(-h, h)? + f(-h, -h)?) / (4.0 * h * h);

    let mean = 0.5 * (fpp + fqq);
    let radius = (0.25 * (fpp - fqq).powi(2) + fpq * fpq).sqrt();
    let eigenvalues = [mean - radius, mean + radius];
    let sign = |l: f64| {
        if l > CURVATURE_TOL {
            1
        } else if l < -CURVATURE_TOL {
            -1
        } else {
            0
        }
    };
    let shape = match (sign(eigenvalues[0]), sign(eigenvalues[1])) {
        (-1, 1) => HessianShape::Saddle,
        (-1, -1) => HessianShape::Maximum,
        (1, 1) => HessianShape::Minimum,
        _ => HessianShape::Degenerate,
    };
    Ok(HessianReport {
        matrix: [[fpp, fpq], [fpq, fqq]],
        eigenvalues,
        shape,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub groups: Vec<String>,
    pub profile: Vec<f64>,
    pub payoffs: Vec<f64>,
    /// Own-payoff partials; absent for boundary profiles.
    pub gradient: Option<Vec<f64>>,
    pub gradient_norm: Option<f64>,
    pub improvements: Vec<GroupImprovement>,
    pub classification: Classification,
    pub hessian: Option<HessianReport>,
}

impl EquilibriumReport {
    pub fn max_improvement(&self) -> f64 {
        self.improvements
            .iter()
            .fold(0.0, |m, g| m.max(g.improvement))
    }

    pub fn improvement_for(&self, group: &str) -> Option<f64> {
        self.improvements
            .iter()
            .find(|g| g.group == group)
            .map(|g| g.improvement)
    }
}

/// Gradient, audit and (for two parameters) Hessian of a candidate profile.
/// `grid_points == 0` skips the audit.
pub fn classify_profile(
    scenario: &Scenario,
    profile: &StrategyProfile,
    tol: f64,
    grid_points: usize,
) -> Result<EquilibriumReport> {
    let payoffs = scenario.payoffs(profile)?.values().to_vec();
    let gradient = match payoff_gradient(scenario, profile) {
        Ok(g) => Some(g),
        Err(Error::BoundaryProfile(_)) => None,
        Err(e) => return Err(e),
    };
    let gradient_norm = gradient.as_deref().map(max_norm);
    let improvements = if grid_points == 0 {
        Vec::new()
    } else {
        best_response_audit(scenario, profile, grid_points)?
    };
    let no_gain = improvements.iter().all(|g| g.improvement <= tol);
    let stationary = gradient_norm.map(|n| n <= tol);

    let classification = match (stationary, grid_points == 0, no_gain) {
        (Some(false), _, _) => Classification::NotStationary,
        (Some(true), true, _) => Classification::Stationary,
        (Some(true), false, true) | (None, false, true) => {
            Classification::NashEquilibrium { tolerance: tol }
        }
        (Some(true), false, false) => Classification::StationaryNotNash,
        (None, false, false) => Classification::NotNash,
        (None, true, _) => Classification::NotStationary,
    };

    let hessian = if profile.len() == 2 && is_interior(profile, 2.0 * HESSIAN_STEP) {
        Some(player_a_hessian(scenario, profile)?)
    } else {
        None
    };

    Ok(EquilibriumReport {
        groups: scenario.group_names(),
        profile: profile.values().to_vec(),
        payoffs,
        gradient,
        gradient_norm,
        improvements,
        classification,
        hessian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameSpec, Semantics};
    use crate::qso::WeightMode;
    use crate::scenario::Engine;
    use crate::state::{StateVector, TwoComponentState};

    fn tcqg(a: f64, basis_a: usize, basis_b: usize) -> Scenario {
        let spec = GameSpec::ab_coalition(3, Semantics::Correlated).unwrap();
        let state = TwoComponentState::with_entanglement(3, basis_a, basis_b, a)
            .unwrap()
            .to_state();
        Scenario::new(spec, state, Engine::Qso, WeightMode::Paper).unwrap()
    }

    fn half(k: usize) -> StrategyProfile {
        StrategyProfile::uniform(k, 0.5).unwrap()
    }

    #[test]
    fn gradient_vanishes_at_center() {
        for a in [0.0, 0.2, 0.33, 0.5] {
            let g = payoff_gradient(&tcqg(a, 0, 7), &half(2)).unwrap();
            assert!(max_norm(&g) <= STATIONARY_TOL, "a = {a}: {g:?}");
        }
    }

    #[test]
    fn classical_partial_is_linear() {
        let sc = tcqg(0.0, 0, 7);
        for (p, q) in [(0.2, 0.3), (0.7, 0.9), (0.5, 0.1)] {
            let prof = StrategyProfile::new(vec![p, q]).unwrap();
            let jac = payoff_jacobian(&sc, &prof).unwrap();
            assert!((jac[0][0] - (1.0 - 2.0 * q)).abs() < 1e-8);
        }
    }

    #[test]
    fn boundary_profile_rejected() {
        let prof = StrategyProfile::new(vec![0.0, 0.5]).unwrap();
        assert!(matches!(
            payoff_gradient(&tcqg(0.2, 0, 7), &prof),
            Err(Error::BoundaryProfile(_))
        ));
    }

    #[test]
    fn audit_examples() {
        let at_zero = best_response_audit(&tcqg(0.0, 0, 7), &half(2), 101).unwrap();
        assert!(at_zero.iter().all(|g| g.improvement <= 1e-12));

        let maxed = best_response_audit(&tcqg(0.5, 0, 7), &half(2), 101).unwrap();
        assert!(maxed[0].improvement <= 1e-12);
        assert!((maxed[1].improvement - 1.0).abs() < 1e-12);
        assert!(maxed[1].best_value == 0.0 || maxed[1].best_value == 1.0);
        assert!((maxed[1].baseline + 2.0).abs() < 1e-12);
        assert!(best_response_audit(&tcqg(0.5, 0, 7), &half(2), 2).is_err());
    }

    #[test]
    fn classifications() {
        let r = classify_profile(&tcqg(0.0, 0, 7), &half(2), NASH_TOL, 201).unwrap();
        assert!(r.classification.is_nash());
        assert_eq!(r.hessian.as_ref().unwrap().shape, HessianShape::Saddle);

        let r = classify_profile(&tcqg(0.5, 0, 7), &half(2), NASH_TOL, 201).unwrap();
        assert_eq!(r.classification, Classification::StationaryNotNash);
        // the surface is flat along q = 1 - p at maximal entanglement
        assert_eq!(r.hessian.as_ref().unwrap().shape, HessianShape::Degenerate);

        let off = StrategyProfile::new(vec![0.3, 0.6]).unwrap();
        let r = classify_profile(&tcqg(0.2, 0, 7), &off, NASH_TOL, 0).unwrap();
        assert_eq!(r.classification, Classification::NotStationary);
        assert!(r.gradient_norm.unwrap() > NASH_TOL);

        let r = classify_profile(&tcqg(0.2, 0, 7), &half(2), NASH_TOL, 0).unwrap();
        assert_eq!(r.classification, Classification::Stationary);
    }

    #[test]
    fn boundary_classification_uses_audit() {
        let spec = GameSpec::independent(4).unwrap();
        let sc = Scenario::new(
            spec,
            StateVector::basis(4, 0).unwrap(),
            Engine::Cpo,
            WeightMode::Paper,
        )
        .unwrap();
        let prof = StrategyProfile::new(vec![0.0, 0.0, 0.5, 0.5]).unwrap();
        let r = classify_profile(&sc, &prof, NASH_TOL, 101).unwrap();
        assert!(r.gradient.is_none());
        assert_eq!(r.classification, Classification::NotNash);
        assert!(r.improvement_for("C").unwrap() > 0.5);
    }

    #[test]
    fn search_finds_center() {
        for (a, b) in [(0, 7), (1, 6)] {
            let found = stationary_profile_search(&tcqg(0.33, a, b), 6, 7).unwrap();
            assert!(
                found
                    .iter()
                    .any(|p| p.values().iter().all(|v| (v - 0.5).abs() < 1e-6)),
                "{found:?}"
            );
        }
    }

    #[test]
    fn search_is_deterministic() {
        let sc = tcqg(0.2, 0, 7);
        assert_eq!(
            stationary_profile_search(&sc, 4, 11).unwrap(),
            stationary_profile_search(&sc, 4, 11).unwrap()
        );
    }
}
