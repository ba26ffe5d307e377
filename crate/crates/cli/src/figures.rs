//! Datasets behind the classroom figures.

use std::collections::BTreeMap;

use stratreg_core::agent::ENUMERATION_GUARD;
use stratreg_core::lattice::{for_each_tuple, power, simplex_point_count, simplex_points};
use stratreg_core::{
    best_response_fixed_budget, best_response_quadratic, implementability_horizon, membership,
    simulate_trajectory, AssessmentPolicy, CostModel, EffortPolicy, Error, GameParams, Result,
    DEFAULT_MEMBERSHIP_TOL,
};

use crate::table::{fmt_flag, fmt_float, FigureDataset};

pub const REGIONS_HEADERS: [&str; 4] = ["T", "avg_study", "avg_cheat_total", "incentivizable"];
pub const OMEGA_SWEEP_HEADERS: [&str; 2] = ["omega_s", "gap"];

/// Average effort profiles, one row per distinct profile, each checked for
/// membership. Profiles come from best responses to every policy on the
/// `1/grid_k` simplex grid, plus the targets "study in the first `k` rounds,
/// then spend the budget on the first other action" for `k = 0..=T`.
/// "Study" is `action`; every other action counts as cheating.
pub fn regions(params: &GameParams, horizons: &[usize], grid_k: usize, action: usize) -> Result<FigureDataset> {
    if grid_k == 0 {
        return Err(Error::InvalidArgument("grid_k must be positive".into()));
    }
    if action >= params.d() {
        return Err(Error::InvalidArgument(format!("action index {action} out of range")));
    }
    let points = simplex_points(params.n(), grid_k);
    let mut data = FigureDataset::new(REGIONS_HEADERS);
    for &horizon in horizons {
        let p = params.clone().with_horizon(horizon);
        p.validated()?;
        let count = power(simplex_point_count(p.n(), grid_k), horizon);
        if count > ENUMERATION_GUARD {
            return Err(Error::GuardExceeded {
                count,
                limit: ENUMERATION_GUARD,
            });
        }

        // Keys are bit patterns of nonnegative sums, which order like the sums.
        let mut profiles: BTreeMap<(u64, u64), EffortPolicy> = BTreeMap::new();
        let mut err = None;
        for_each_tuple(points.len(), horizon, |idx| {
            if err.is_some() {
                return;
            }
            let policy = AssessmentPolicy {
                rules: idx.iter().map(|&i| points[i].clone()).collect(),
                unnormalized: false,
            };
            match best_response_fixed_budget(&p, &policy) {
                Ok(br) => {
                    let total = br.efforts.cumulative();
                    let study = total[action];
                    let other: f64 = total.iter().enumerate().filter(|&(j, _)| j != action).map(|(_, v)| v).sum();
                    profiles.entry((study.to_bits(), other.to_bits())).or_insert(br.efforts);
                }
                Err(e) => err = Some(e),
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(other) = (0..p.d()).find(|&j| j != action) {
            for k in 0..=horizon {
                let actions: Vec<usize> = (0..horizon).map(|t| if t < k { action } else { other }).collect();
                let key = ((k as f64).to_bits(), ((horizon - k) as f64).to_bits());
                profiles.entry(key).or_insert_with(|| EffortPolicy::pure(&actions, p.d()));
            }
        }

        let t = horizon as f64;
        for ((study, other), efforts) in profiles {
            let verdict = membership(&p, &efforts, DEFAULT_MEMBERSHIP_TOL)?;
            data.push(vec![
                horizon.to_string(),
                fmt_float(f64::from_bits(study) / t),
                fmt_float(f64::from_bits(other) / t),
                fmt_flag(verdict.incentivizable),
            ]);
        }
    }
    Ok(data)
}

/// `T − t` from the implementability bound at `Ω_action = i/steps`, `i = 1..=steps`.
/// Infeasible settings leave the gap empty.
pub fn omega_sweep(params: &GameParams, action: usize, t: usize, steps: usize) -> Result<FigureDataset> {
    if action >= params.d() {
        return Err(Error::InvalidArgument(format!("action index {action} out of range")));
    }
    let mut data = FigureDataset::new(OMEGA_SWEEP_HEADERS);
    for i in 1..=steps {
        let omega = i as f64 / steps as f64;
        let bound = implementability_horizon(&params.clone().with_omega(action, omega), action, t)?;
        let gap = bound.gap(t).map(|g| g.to_string()).unwrap_or_default();
        data.push(vec![fmt_float(omega), gap]);
    }
    Ok(data)
}

/// Per-round walk-through of the agent's best response to `policy`.
pub fn trajectory(params: &GameParams, policy: &AssessmentPolicy) -> Result<FigureDataset> {
    let efforts = match params.cost_model {
        CostModel::FixedBudget => best_response_fixed_budget(params, policy)?.efforts,
        CostModel::Quadratic => best_response_quadratic(params, policy)?.efforts,
    };
    let traj = simulate_trajectory(params, policy, &efforts)?;

    let mut headers = vec!["round".to_string()];
    headers.extend(params.feature_names.iter().map(|f| format!("theta_{f}")));
    headers.extend(params.action_names.iter().map(|a| format!("e_{a}")));
    headers.extend(params.action_names.iter().map(|a| format!("s_{a}")));
    headers.extend(params.feature_names.iter().map(|f| format!("o_{f}")));
    headers.push("score".into());
    let mut data = FigureDataset::new(headers);
    for t in 0..params.horizon {
        let mut row = vec![(t + 1).to_string()];
        row.extend(policy.rules[t].iter().map(|&v| fmt_float(v)));
        row.extend(efforts.efforts[t].iter().map(|&v| fmt_float(v)));
        row.extend(traj.states[t].iter().map(|&v| fmt_float(v)));
        row.extend(traj.observables[t].iter().map(|&v| fmt_float(v)));
        row.push(fmt_float(traj.scores[t]));
        data.push(row);
    }
    Ok(data)
}
