use crate::agent::{best_response_quadratic, tie_set, TIE_TOL};
use crate::error::Result;
use crate::game::{principal_utility, AssessmentPolicy, CostModel, EffortPolicy, GameParams};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticSolution {
    pub policy: AssessmentPolicy,
    pub efforts: EffortPolicy,
    pub value: f64,
    /// Feature scored at each round.
    pub chosen: Vec<usize>,
}

/// `v_t[k] = Σ_j λ_j (1 + (t−1) Ω_j) W_kj`: the principal's marginal value of
/// putting round `t`'s weight on feature `k` (rounds are 1-based in `t`).
pub fn quadratic_rule_scores(params: &GameParams, t: usize) -> Vec<f64> {
    let carried = t.saturating_sub(1) as f64;
    (0..params.n())
        .map(|k| {
            (0..params.d())
                .map(|j| params.lambda[j] * (1.0 + carried * params.omega[j]) * params.w[(k, j)])
                .sum()
        })
        .collect()
}

/// Each round scores the single feature with the largest `v_t` (lowest index on ties).
pub fn solve_quadratic(params: &GameParams) -> Result<QuadraticSolution> {
    params.require(CostModel::Quadratic)?;
    let n = params.n();
    let chosen: Vec<usize> = (1..=params.horizon)
        .map(|t| tie_set(&quadratic_rule_scores(params, t), TIE_TOL)[0])
        .collect();
    let policy = AssessmentPolicy {
        rules: chosen
            .iter()
            .map(|&k| {
                let mut rule = vec![0.0; n];
                rule[k] = 1.0;
                rule
            })
            .collect(),
        unnormalized: false,
    };
    let efforts = best_response_quadratic(params, &policy)?.efforts;
    Ok(QuadraticSolution {
        value: principal_utility(params, &efforts),
        policy,
        efforts,
        chosen,
    })
}
