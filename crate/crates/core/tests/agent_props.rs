mod common;

use common::{coordinate_ascent, random_fixed_budget_game, random_policy, rng};
use stratreg_core::{
    agent_brute_force_oracle, best_response_fixed_budget, best_response_quadratic, coefficient_vectors,
    simulate_trajectory, solve_lp, CostModel, LpProblem, Sense,
};

#[test]
fn fixed_budget_beats_brute_force() {
    let mut rng = rng(21);
    let mut checked = 0;
    while checked < 150 {
        let p = random_fixed_budget_game(&mut rng, 3, 3, 3);
        let policy = random_policy(&mut rng, p.n(), p.horizon);
        let Ok(grid) = agent_brute_force_oracle(&p, &policy, 4) else {
            continue;
        };
        let br = best_response_fixed_budget(&p, &policy).unwrap();
        let u_br = simulate_trajectory(&p, &policy, &br.efforts).unwrap().agent_utility;
        let u_grid = simulate_trajectory(&p, &policy, &grid).unwrap().agent_utility;
        assert!(u_br >= u_grid - 1e-9, "{u_br} < {u_grid}");
        for (e, ties) in br.efforts.efforts.iter().zip(&br.tie_sets) {
            for (j, &v) in e.iter().enumerate() {
                assert!(v == 0.0 || ties.contains(&j));
            }
        }
        checked += 1;
    }
}

#[test]
fn joint_lp_equals_per_round_argmax() {
    let mut rng = rng(22);
    for _ in 0..200 {
        let p = random_fixed_budget_game(&mut rng, 4, 4, 5);
        let policy = random_policy(&mut rng, p.n(), p.horizon);
        let c = coefficient_vectors(&p, &policy).unwrap();
        let (d, horizon) = (p.d(), p.horizon);
        let mut lp = LpProblem::new(c.iter().flatten().map(|v| -v).collect());
        for t in 0..horizon {
            let mut row = vec![0.0; horizon * d];
            row[t * d..(t + 1) * d].fill(1.0);
            lp.add_row(row, Sense::Eq, 1.0);
        }
        let joint = -solve_lp(&lp).unwrap().objective_value;
        let br = best_response_fixed_budget(&p, &policy).unwrap();
        let per_round: f64 = c
            .iter()
            .zip(&br.efforts.efforts)
            .map(|(c, e)| c.iter().zip(e).map(|(a, b)| a * b).sum::<f64>())
            .sum();
        assert!((joint - per_round).abs() <= 1e-9 * (1.0 + joint.abs()));
    }
}

#[test]
fn quadratic_matches_coordinate_ascent_and_is_stationary() {
    let mut rng = rng(23);
    for _ in 0..60 {
        let p = random_fixed_budget_game(&mut rng, 3, 3, 4).with_cost_model(CostModel::Quadratic);
        let policy = random_policy(&mut rng, p.n(), p.horizon);
        let qr = best_response_quadratic(&p, &policy).unwrap();
        assert!(!qr.clamped);
        let ascent = coordinate_ascent(&p, &policy, 50);
        for (a, b) in qr.efforts.efforts.iter().flatten().zip(ascent.efforts.iter().flatten()) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
        let u = |e: &stratreg_core::EffortPolicy| simulate_trajectory(&p, &policy, e).unwrap().agent_utility;
        let h = 1e-6;
        for t in 0..p.horizon {
            for j in 0..p.d() {
                if qr.efforts.efforts[t][j] <= 0.0 {
                    continue;
                }
                let mut plus = qr.efforts.clone();
                let mut minus = qr.efforts.clone();
                plus.efforts[t][j] += h;
                minus.efforts[t][j] -= h;
                let grad = (u(&plus) - u(&minus)) / (2.0 * h);
                assert!(grad.abs() <= 1e-6, "gradient {grad}");
            }
        }
    }
}

#[test]
fn quadratic_brute_force_is_close() {
    let mut rng = rng(24);
    for _ in 0..20 {
        let mut p = random_fixed_budget_game(&mut rng, 2, 2, 1).with_cost_model(CostModel::Quadratic);
        p.horizon = 1;
        let policy = random_policy(&mut rng, p.n(), 1);
        let grid = agent_brute_force_oracle(&p, &policy, 200).unwrap();
        let exact = best_response_quadratic(&p, &policy).unwrap().efforts;
        let u = |e| simulate_trajectory(&p, &policy, e).unwrap().agent_utility;
        assert!(u(&exact) >= u(&grid) - 1e-12);
        assert!(u(&exact) - u(&grid) < 1e-3);
    }
}
