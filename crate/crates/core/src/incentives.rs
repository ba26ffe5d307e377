//! Which effort policies can a linear assessment policy incentivize?
//!
//! An effort policy is incentivizable iff no cheaper policy produces at least
//! the same observable features every round. The domination LP measures the
//! cheapest such policy; its value equals `T` exactly for incentivizable
//! policies, and its duals on the dominance rows form an assessment policy
//! that incentivizes the target.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::agent::tie_set;
use crate::error::{Error, Result};
use crate::game::{coefficient_vectors, in_simplex, AssessmentPolicy, CostModel, EffortPolicy, GameParams};
use crate::lp::{solve_lp, LpProblem, LpSolution, LpStatus, Sense};

pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-6;

/// Allowed shortfall of a supported action's coefficient below the round max.
pub const RECOVERY_TOL: f64 = 1e-7;

/// Effort below this is treated as outside the support.
const SUPPORT_TOL: f64 = 1e-9;

const PERTURBATION: f64 = 1e-9;
const PERTURBATION_SEED: u64 = 0x1d0_5eed;
pub(crate) const PERTURBED_ATTEMPTS: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipVerdict {
    /// Optimal value of the domination LP.
    pub kappa: f64,
    pub incentivizable: bool,
    /// A cheaper dominating policy, when one exists.
    pub witness: Option<EffortPolicy>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveredAssessment {
    /// Raw dominance-row duals `λ_t`, one rule per round.
    pub policy: AssessmentPolicy,
    /// `policy` divided by `maxₜ ‖λ_t‖₁`; incentivizes the same efforts.
    pub rescaled: AssessmentPolicy,
    /// Budget-row duals `γ_t ≥ 0`.
    pub gamma: Vec<f64>,
    pub validated: bool,
    /// Largest shortfall of a supported action below its round's max coefficient.
    pub max_violation: f64,
    /// Set when some rescaled rule is not a probability vector.
    pub simplex_violation: bool,
    /// Number of objective perturbations needed before validation succeeded.
    pub perturbations: usize,
}

fn var(t: usize, j: usize, d: usize) -> usize {
    t * d + j
}

/// `min Σ_t ‖a_t‖₁` subject to `W(ΩΣ_{i<t}a_i + a_t) ≥ W(ΩΣ_{i<t}e_i + e_t)`,
/// `a ≥ 0`, `Σ_j a_tj ≤ 1`.
///
/// Variables are round-major (`t·d + j`). Rows are the `T·n` dominance rows
/// (round-major) followed by the `T` budget rows. The initial state cancels
/// on both sides and does not appear.
pub fn domination_lp(params: &GameParams, efforts: &EffortPolicy) -> Result<LpProblem> {
    efforts.check_dims(params)?;
    let (n, d, horizon) = (params.n(), params.d(), params.horizon);
    let mut lp = LpProblem::new(vec![1.0; horizon * d]);

    // Accumulated carried-over effort Ω Σ_{i<t} e_i.
    let mut carried = vec![0.0; d];
    for t in 0..horizon {
        let input: Vec<f64> = carried.iter().zip(&efforts.efforts[t]).map(|(c, e)| c + e).collect();
        let rhs = params.w.mul_vec(&input);
        for (k, &b) in rhs.iter().enumerate() {
            let mut row = vec![0.0; horizon * d];
            for j in 0..d {
                let w = params.w[(k, j)];
                for i in 0..t {
                    row[var(i, j, d)] = w * params.omega[j];
                }
                row[var(t, j, d)] = w;
            }
            lp.add_row(row, Sense::Ge, b);
        }
        for (c, (&e, &om)) in carried.iter_mut().zip(efforts.efforts[t].iter().zip(&params.omega)) {
            *c += om * e;
        }
    }
    for t in 0..horizon {
        let mut row = vec![0.0; horizon * d];
        row[var(t, 0, d)..var(t, 0, d) + d].fill(1.0);
        lp.add_row(row, Sense::Le, 1.0);
    }
    debug_assert_eq!(lp.num_rows(), horizon * (n + 1));
    Ok(lp)
}

fn solve_domination(params: &GameParams, efforts: &EffortPolicy) -> Result<(LpProblem, LpSolution)> {
    params.require(CostModel::FixedBudget)?;
    efforts.check_feasible(params)?;
    let lp = domination_lp(params, efforts)?;
    let sol = solve_lp(&lp)?;
    // `a = e` is always feasible and the objective is bounded below by 0.
    if sol.status != LpStatus::Optimal {
        return Err(Error::MembershipOracleFailure(format!(
            "domination LP reported {:?}",
            sol.status
        )));
    }
    Ok((lp, sol))
}

pub fn membership(params: &GameParams, efforts: &EffortPolicy, tol: f64) -> Result<MembershipVerdict> {
    let (_, sol) = solve_domination(params, efforts)?;
    let horizon = params.horizon as f64;
    let kappa = sol.objective_value;
    let incentivizable = kappa >= horizon - tol;
    Ok(MembershipVerdict {
        kappa,
        incentivizable,
        witness: (!incentivizable).then(|| EffortPolicy::from_flat(&sol.primal, params.d())),
    })
}

/// Reads an assessment policy off the domination LP's duals and checks that
/// it incentivizes `efforts`.
///
/// If the first dual vertex fails validation the LP is re-solved with the
/// objective perturbed by `1e-9·u` (`u` uniform, fixed seed), up to three
/// times, before giving up with [`Error::ValidationFailed`].
pub fn recover_assessment(params: &GameParams, efforts: &EffortPolicy) -> Result<RecoveredAssessment> {
    let (mut lp, sol) = solve_domination(params, efforts)?;
    let horizon = params.horizon;
    if sol.objective_value < horizon as f64 - DEFAULT_MEMBERSHIP_TOL {
        return Err(Error::NotIncentivizable {
            kappa: sol.objective_value,
            horizon,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(PERTURBATION_SEED);
    let base = lp.objective.clone();
    let mut attempt = from_duals(params, efforts, &sol, 0)?;
    let mut worst = attempt.max_violation;
    for k in 1..=PERTURBED_ATTEMPTS {
        if attempt.validated {
            break;
        }
        lp.objective = base.iter().map(|c| c + PERTURBATION * rng.random::<f64>()).collect();
        let sol = solve_lp(&lp)?;
        if sol.status != LpStatus::Optimal {
            continue;
        }
        attempt = from_duals(params, efforts, &sol, k)?;
        worst = worst.min(attempt.max_violation);
    }
    if attempt.validated {
        Ok(attempt)
    } else {
        Err(Error::ValidationFailed { violation: worst })
    }
}

fn from_duals(
    params: &GameParams,
    efforts: &EffortPolicy,
    sol: &LpSolution,
    perturbations: usize,
) -> Result<RecoveredAssessment> {
    let (n, horizon) = (params.n(), params.horizon);
    let rules: Vec<Vec<f64>> = (0..horizon)
        .map(|t| sol.dual[t * n..(t + 1) * n].iter().map(|&y| y.max(0.0)).collect())
        .collect();
    let gamma: Vec<f64> = sol.dual[horizon * n..].iter().map(|&y| (-y).max(0.0)).collect();
    let policy = AssessmentPolicy::unnormalized(rules);

    let max_violation = support_violation(params, &policy, efforts)?;
    let scale = policy
        .rules
        .iter()
        .map(|r| r.iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    let rescaled = AssessmentPolicy::unnormalized(
        policy
            .rules
            .iter()
            .map(|r| r.iter().map(|v| if scale > 0.0 { v / scale } else { *v }).collect())
            .collect(),
    );
    let simplex_violation = !rescaled.rules.iter().all(|r| in_simplex(r));
    Ok(RecoveredAssessment {
        validated: max_violation <= RECOVERY_TOL,
        policy,
        rescaled,
        gamma,
        max_violation,
        simplex_violation,
        perturbations,
    })
}

/// Largest relative amount by which an action played in `efforts` falls
/// short of its round's best coefficient under `policy`.
pub fn support_violation(params: &GameParams, policy: &AssessmentPolicy, efforts: &EffortPolicy) -> Result<f64> {
    let coefficients = coefficient_vectors(params, policy)?;
    let mut worst = 0.0_f64;
    for (c, e) in coefficients.iter().zip(&efforts.efforts) {
        let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let scale = max.abs().max(1.0);
        for (j, &v) in e.iter().enumerate() {
            if v > SUPPORT_TOL {
                worst = worst.max((max - c[j]) / scale);
            }
        }
    }
    Ok(worst)
}

/// Per round, the actions tied for the best coefficient at [`RECOVERY_TOL`].
pub fn recovered_tie_sets(params: &GameParams, policy: &AssessmentPolicy) -> Result<Vec<Vec<usize>>> {
    Ok(coefficient_vectors(params, policy)?
        .iter()
        .map(|c| {
            let scale = c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            tie_set(c, RECOVERY_TOL * scale)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Matrix;

    fn pure(actions: &[usize]) -> EffortPolicy {
        EffortPolicy::pure(actions, 3)
    }

    #[test]
    fn lp_shape() {
        let p = GameParams::classroom(3);
        let lp = domination_lp(&p, &pure(&[1, 1, 0])).unwrap();
        assert_eq!(lp.num_vars(), 9);
        assert_eq!(lp.num_rows(), 9);
        assert_eq!(lp.row_senses().filter(|s| *s == Sense::Ge).count(), 6);
        assert_eq!(lp.row_senses().filter(|s| *s == Sense::Le).count(), 3);
        let one = domination_lp(&GameParams::classroom(1), &pure(&[0])).unwrap();
        assert_eq!(one.row_senses().filter(|s| *s == Sense::Le).count(), 1);
    }

    #[test]
    fn zero_efforts_zero_rhs() {
        let p = GameParams::classroom(2).with_s0(vec![5.0, 5.0, 5.0]);
        let lp = domination_lp(&p, &EffortPolicy::zeros(2, 3)).unwrap();
        assert!(lp.constraints[..4].iter().all(|c| c.rhs == 0.0));
    }

    #[test]
    fn carried_effort_enters_rhs() {
        let p = GameParams::classroom(2);
        let lp = domination_lp(&p, &pure(&[1, 1])).unwrap();
        // Round 2 input: Ω·e_1 + e_2 = 2 units of study.
        assert_eq!(lp.constraints[2].rhs, 2.0);
        assert_eq!(lp.constraints[2].coeffs, vec![0.0, 1.0, 0.0, 3.0, 1.0, 0.0]);
    }

    #[test]
    fn classroom_verdicts() {
        let p = GameParams::classroom(3);
        let yes = membership(&p, &pure(&[1, 1, 0]), DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert!(yes.incentivizable);
        assert!((yes.kappa - 3.0).abs() < 1e-9);
        assert!(yes.witness.is_none());

        let no = membership(&p, &pure(&[1, 1, 1]), DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert!(!no.incentivizable);
        assert!(no.kappa < 3.0 - 1e-3);
        assert!(no.witness.is_some());
    }

    #[test]
    fn underspending_round() {
        let p = GameParams::classroom(2);
        let e = EffortPolicy::new(vec![vec![0.0, 0.5, 0.0], vec![1.0, 0.0, 0.0]]);
        let v = membership(&p, &e, DEFAULT_MEMBERSHIP_TOL).unwrap();
        assert!(v.kappa <= 1.5 + 1e-9);
        assert!(!v.incentivizable);
    }

    #[test]
    fn recovery_classroom() {
        let p = GameParams::classroom(3);
        let e = pure(&[1, 1, 0]);
        let rec = recover_assessment(&p, &e).unwrap();
        assert!(rec.validated);
        let ties = recovered_tie_sets(&p, &rec.policy).unwrap();
        assert!(ties[0].contains(&1) && ties[1].contains(&1) && ties[2].contains(&0));
        assert_eq!(recovered_tie_sets(&p, &rec.rescaled).unwrap(), ties);
        assert!(rec.gamma.iter().all(|&g| g >= 0.0));
    }

    #[test]
    fn recovery_single_action() {
        let p = GameParams::new(Matrix::from_rows(&[[1.0]]), vec![0.0], vec![1.0], 1, CostModel::FixedBudget);
        let rec = recover_assessment(&p, &EffortPolicy::new(vec![vec![1.0]])).unwrap();
        assert!(rec.validated);
        let lambda = rec.policy.rules[0][0];
        assert!(lambda > 0.0);
        assert!((lambda - (1.0 + rec.gamma[0])).abs() < 1e-9);
    }

    #[test]
    fn recovery_requires_membership() {
        let p = GameParams::classroom(3);
        assert!(matches!(
            recover_assessment(&p, &pure(&[1, 1, 1])),
            Err(Error::NotIncentivizable { .. })
        ));
    }

    #[test]
    fn quadratic_model_rejected() {
        let p = GameParams::classroom(1).with_cost_model(CostModel::Quadratic);
        assert!(matches!(
            membership(&p, &pure(&[0]), DEFAULT_MEMBERSHIP_TOL),
            Err(Error::WrongCostModel { .. })
        ));
    }

    #[test]
    fn over_budget_rejected() {
        let p = GameParams::classroom(1);
        let e = EffortPolicy::new(vec![vec![1.0, 1.0, 0.0]]);
        assert!(matches!(
            membership(&p, &e, DEFAULT_MEMBERSHIP_TOL),
            Err(Error::InvalidArgument(_))
        ));
    }
}
