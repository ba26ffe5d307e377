use super::{Diagnostics, SolveMethod, SolveResult};
use crate::agent::{best_response_fixed_budget, ENUMERATION_GUARD};
use crate::error::{Error, Result};
use crate::game::{principal_utility, AssessmentPolicy, CostModel, GameParams};
use crate::incentives::recover_assessment;
use crate::lattice::{for_each_tuple, power, simplex_point_count, simplex_points};

/// Every assessment policy whose rules lie on the simplex grid of step
/// `1/grid_k`, answered by the agent's principal-favorable best response.
///
/// Policies leaving some round with no positive coefficient are skipped (the
/// agent is indifferent between all actions there). The first policy in
/// enumeration order attaining the best value wins.
pub fn solve_fixed_budget_grid(params: &GameParams, grid_k: usize) -> Result<SolveResult> {
    params.require(CostModel::FixedBudget)?;
    params.validated()?;
    if grid_k == 0 {
        return Err(Error::InvalidArgument("grid_k must be positive".into()));
    }
    let n = params.n();
    let count = power(simplex_point_count(n, grid_k), params.horizon);
    if count > ENUMERATION_GUARD {
        return Err(Error::GuardExceeded {
            count,
            limit: ENUMERATION_GUARD,
        });
    }
    let points = simplex_points(n, grid_k);

    let mut best: Option<(f64, Vec<usize>, crate::game::EffortPolicy)> = None;
    let mut err = None;
    for_each_tuple(points.len(), params.horizon, |idx| {
        if err.is_some() {
            return;
        }
        let policy = AssessmentPolicy {
            rules: idx.iter().map(|&i| points[i].clone()).collect(),
            unnormalized: false,
        };
        match best_response_fixed_budget(params, &policy) {
            Ok(br) => {
                if br.coefficients.iter().any(|c| c.iter().all(|&v| v <= 0.0)) {
                    return;
                }
                let value = principal_utility(params, &br.efforts);
                if best.as_ref().is_none_or(|(v, _, _)| value > *v + 1e-12) {
                    best = Some((value, idx.to_vec(), br.efforts));
                }
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let Some((value, idx, efforts)) = best else {
        return Err(Error::InvalidArgument(
            "no gridded assessment policy gives a positive incentive every round".into(),
        ));
    };
    let assessment = recover_assessment(params, &efforts)?;
    Ok(SolveResult {
        diagnostics: Diagnostics {
            oracle_calls: 1 + assessment.perturbations,
            policies_enumerated: count,
            ..Diagnostics::default()
        },
        grid_policy: Some(AssessmentPolicy {
            rules: idx.iter().map(|&i| points[i].clone()).collect(),
            unnormalized: false,
        }),
        value,
        efforts,
        assessment,
        method: SolveMethod::Grid,
    })
}
