//! Agent best responses.
//!
//! With linear conversion the agent's total score is linear in each round's
//! effort with gradient `c_t` (see [`coefficient_vectors`]), so the joint
//! problem separates by round. Under the fixed budget the agent puts its
//! whole budget on an argmax of `c_t`; under quadratic cost the optimum is
//! `e_t = c_t`.

use crate::error::{Error, Result};
use crate::game::{
    coefficient_vectors, simulate_trajectory, AssessmentPolicy, CostModel, EffortPolicy, GameParams,
};
use crate::lattice::{for_each_tuple, power, simplex_point_count, subsimplex_points};

/// Two coefficients closer than this are treated as tied.
pub const TIE_TOL: f64 = 1e-9;

/// Upper limit on the number of joint grid points the brute-force oracles visit.
pub const ENUMERATION_GUARD: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct BestResponse {
    pub efforts: EffortPolicy,
    /// Per round, the actions attaining `max c_t` within [`TIE_TOL`].
    pub tie_sets: Vec<Vec<usize>>,
    pub is_unique: Vec<bool>,
    pub coefficients: Vec<Vec<f64>>,
}

impl BestResponse {
    /// The action played at each round.
    pub fn actions(&self) -> Vec<usize> {
        self.efforts
            .efforts
            .iter()
            .map(|e| e.iter().position(|&v| v > 0.5).unwrap_or(0))
            .collect()
    }
}

/// Indices whose value is within `tol` of the maximum.
pub fn tie_set(values: &[f64], tol: f64) -> Vec<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= max - tol)
        .map(|(j, _)| j)
        .collect()
}

/// Principal-favorable choice among tied actions: largest preference weight,
/// then lowest index.
pub fn favorable_choice(ties: &[usize], lambda: &[f64]) -> usize {
    let mut best = ties[0];
    for &j in &ties[1..] {
        if lambda[j] > lambda[best] {
            best = j;
        }
    }
    best
}

pub fn best_response_fixed_budget(params: &GameParams, policy: &AssessmentPolicy) -> Result<BestResponse> {
    params.require(CostModel::FixedBudget)?;
    best_response_with_tol(params, policy, TIE_TOL)
}

pub(crate) fn best_response_with_tol(
    params: &GameParams,
    policy: &AssessmentPolicy,
    tol: f64,
) -> Result<BestResponse> {
    let coefficients = coefficient_vectors(params, policy)?;
    let d = params.d();
    let mut tie_sets = Vec::with_capacity(params.horizon);
    let mut actions = Vec::with_capacity(params.horizon);
    for c in &coefficients {
        let ties = tie_set(c, tol);
        actions.push(favorable_choice(&ties, &params.lambda));
        tie_sets.push(ties);
    }
    Ok(BestResponse {
        efforts: EffortPolicy::pure(&actions, d),
        is_unique: tie_sets.iter().map(|t| t.len() == 1).collect(),
        tie_sets,
        coefficients,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticResponse {
    pub efforts: EffortPolicy,
    /// Set when a coefficient was negative and the effort was clamped at zero.
    pub clamped: bool,
}

/// `e*_t = Wᵀθ_t + (WΩ)ᵀ Σ_{i>t} θ_i`, clamped at zero.
pub fn best_response_quadratic(params: &GameParams, policy: &AssessmentPolicy) -> Result<QuadraticResponse> {
    params.require(CostModel::Quadratic)?;
    let mut clamped = false;
    let efforts = coefficient_vectors(params, policy)?
        .into_iter()
        .map(|c| {
            c.into_iter()
                .map(|v| {
                    if v < 0.0 {
                        clamped = true;
                        0.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    Ok(QuadraticResponse {
        efforts: EffortPolicy::new(efforts),
        clamped,
    })
}

/// Exhaustive grid search over effort policies, scored by forward simulation.
///
/// Under the fixed budget each round ranges over `{e ≥ 0, Σe ≤ 1}` at
/// spacing `1/grid_k`; under quadratic cost each coordinate ranges over
/// `[0, 2·ĉ]` in `grid_k` steps, where `ĉ` bounds every coefficient.
/// Ties keep the first maximizer in enumeration order.
pub fn agent_brute_force_oracle(
    params: &GameParams,
    policy: &AssessmentPolicy,
    grid_k: usize,
) -> Result<EffortPolicy> {
    if grid_k == 0 {
        return Err(Error::InvalidArgument("grid_k must be positive".into()));
    }
    let d = params.d();
    let round_points: Vec<Vec<f64>> = match params.cost_model {
        CostModel::FixedBudget => subsimplex_points(d, grid_k),
        CostModel::Quadratic => box_points(d, grid_k, quadratic_box(params, policy)),
    };
    let per_round = match params.cost_model {
        CostModel::FixedBudget => simplex_point_count(d + 1, grid_k),
        CostModel::Quadratic => power(grid_k as u128 + 1, d),
    };
    let count = power(per_round, params.horizon);
    if count > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            count,
            limit: ENUMERATION_GUARD,
        });
    }

    let mut best: Option<(f64, EffortPolicy)> = None;
    let mut err = None;
    for_each_tuple(round_points.len(), params.horizon, |idx| {
        if err.is_some() {
            return;
        }
        let efforts = EffortPolicy::new(idx.iter().map(|&i| round_points[i].clone()).collect());
        match simulate_trajectory(params, policy, &efforts) {
            Ok(tr) => {
                if best.as_ref().is_none_or(|(u, _)| tr.agent_utility > *u + 1e-12) {
                    best = Some((tr.agent_utility, efforts));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(best.map(|(_, e)| e).expect("grid is never empty"))
}

fn quadratic_box(params: &GameParams, policy: &AssessmentPolicy) -> f64 {
    let rule_mass = policy
        .rules
        .iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let w_max = params.w.as_slice().iter().copied().fold(0.0_f64, f64::max);
    let om_max = params.omega.iter().copied().fold(0.0_f64, f64::max);
    let bound = rule_mass * w_max * (1.0 + (params.horizon as f64 - 1.0) * om_max);
    2.0 * bound.max(f64::MIN_POSITIVE)
}

fn box_points(d: usize, k: usize, top: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for_each_tuple(k + 1, d, |idx| {
        out.push(idx.iter().map(|&i| top * i as f64 / k as f64).collect());
    });
    out
}
