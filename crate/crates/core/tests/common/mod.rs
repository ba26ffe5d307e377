//! Independent oracles shared by the integration and acceptance suites.
//!
//! Nothing here calls into the simplex code, the best-response code or the
//! domination LP; each oracle recomputes its answer from first principles.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratreg_core::{
    simulate_trajectory, AssessmentPolicy, CostModel, EffortPolicy, GameParams, LpProblem, Matrix, Sense,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------------------
// LP by vertex enumeration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Enumerated {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

/// Solves `A x = b` by Gaussian elimination; `None` when (numerically) singular.
pub fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))?;
        if a[p][c].abs() < 1e-9 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn combinations(n: usize, k: usize, visit: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), visit);
}

/// Rows `(coeffs, sense, rhs)` including the nonnegativity bounds.
fn all_constraints(p: &LpProblem) -> Vec<(Vec<f64>, Sense, f64)> {
    let n = p.num_vars();
    let mut rows: Vec<(Vec<f64>, Sense, f64)> =
        p.constraints.iter().map(|c| (c.coeffs.clone(), c.sense, c.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push((e, Sense::Ge, 0.0));
    }
    rows
}

fn satisfied(rows: &[(Vec<f64>, Sense, f64)], x: &[f64], tol: f64) -> bool {
    rows.iter().all(|(a, s, b)| {
        let v: f64 = a.iter().zip(x).map(|(a, x)| a * x).sum();
        match s {
            Sense::Le => v <= b + tol,
            Sense::Ge => v >= b - tol,
            Sense::Eq => (v - b).abs() <= tol,
        }
    })
}

/// Optimum of an LP over `x ≥ 0` by enumerating basic solutions of the
/// feasible region and of its normalized recession cone.
pub fn enumerate_lp(p: &LpProblem) -> Enumerated {
    assert!(p.lower.iter().all(|&l| l == 0.0) && p.upper.iter().all(|u| u.is_infinite()));
    let n = p.num_vars();
    let rows = all_constraints(p);

    let mut best: Option<f64> = None;
    combinations(rows.len(), n, &mut |subset| {
        let a: Vec<Vec<f64>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<f64> = subset.iter().map(|&i| rows[i].2).collect();
        if let Some(x) = solve_square(a, b) {
            if satisfied(&rows, &x, 1e-9) {
                let v: f64 = p.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
    });
    let Some(best) = best else {
        return Enumerated::Infeasible;
    };

    // Recession cone {d ≥ 0, A d (sense) 0} cut by Σd = 1.
    let mut cone: Vec<(Vec<f64>, Sense, f64)> = rows.iter().map(|(a, s, _)| (a.clone(), *s, 0.0)).collect();
    let normal = (vec![1.0; n], Sense::Eq, 1.0);
    let mut unbounded = false;
    if n == 1 {
        let d = [1.0];
        unbounded = satisfied(&cone, &d, 1e-9) && p.objective[0] < -1e-9;
    } else {
        combinations(cone.len(), n - 1, &mut |subset| {
            if unbounded {
                return;
            }
            let mut a: Vec<Vec<f64>> = subset.iter().map(|&i| cone[i].0.clone()).collect();
            let mut b: Vec<f64> = vec![0.0; n - 1];
            a.push(normal.0.clone());
            b.push(1.0);
            if let Some(d) = solve_square(a, b) {
                if satisfied(&cone, &d, 1e-9) {
                    let v: f64 = p.objective.iter().zip(&d).map(|(c, d)| c * d).sum();
                    if v < -1e-9 {
                        unbounded = true;
                    }
                }
            }
        });
    }
    cone.clear();
    if unbounded {
        Enumerated::Unbounded
    } else {
        Enumerated::Optimal(best)
    }
}

/// Random LP with integer data in `[-5, 5]`; most instances are feasible
/// because the right-hand sides are built around a random nonnegative point.
pub fn random_lp(rng: &mut impl Rng) -> LpProblem {
    let n = rng.random_range(1..=8);
    let m = rng.random_range(1..=8);
    let bounded_cost = rng.random_bool(0.5);
    let objective: Vec<f64> = (0..n)
        .map(|_| {
            if bounded_cost {
                rng.random_range(0..=5) as f64
            } else {
                rng.random_range(-5..=5) as f64
            }
        })
        .collect();
    let anchor: Vec<f64> = (0..n).map(|_| rng.random_range(0..=2) as f64).collect();
    let mut lp = LpProblem::new(objective);
    for _ in 0..m {
        let a: Vec<f64> = (0..n).map(|_| rng.random_range(-5..=5) as f64).collect();
        let at: f64 = a.iter().zip(&anchor).map(|(a, x)| a * x).sum();
        let sense = match rng.random_range(0..5) {
            0 | 1 => Sense::Le,
            2 | 3 => Sense::Ge,
            _ => Sense::Eq,
        };
        let slack = rng.random_range(0..=3) as f64;
        let flip = rng.random_bool(0.1);
        let rhs = match sense {
            Sense::Le => at + if flip { -slack - 1.0 } else { slack },
            Sense::Ge => at - if flip { -slack - 1.0 } else { slack },
            Sense::Eq => at,
        };
        lp.add_row(a, sense, rhs.clamp(-5.0, 5.0));
    }
    lp
}

// ---------------------------------------------------------------------------
// Game oracles
// ---------------------------------------------------------------------------

pub fn random_fixed_budget_game(rng: &mut impl Rng, max_n: usize, max_d: usize, max_t: usize) -> GameParams {
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    let horizon = rng.random_range(1..=max_t);
    let mut w = Matrix::zeros(n, d);
    for j in 0..d {
        for k in 0..n {
            if rng.random_bool(0.7) {
                w[(k, j)] = (rng.random_range(1..=12) as f64) / 4.0;
            }
        }
        if !(0..n).any(|k| w[(k, j)] > 0.0) {
            let k = rng.random_range(0..n);
            w[(k, j)] = 1.0;
        }
    }
    let omega = (0..d)
        .map(|_| if rng.random_bool(0.4) { 0.0 } else { rng.random_range(1..=4) as f64 / 4.0 })
        .collect();
    let lambda = (0..d).map(|_| rng.random_range(0..=2) as f64).collect();
    GameParams::new(w, omega, lambda, horizon, CostModel::FixedBudget)
}

pub fn random_simplex(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn random_policy(rng: &mut impl Rng, n: usize, horizon: usize) -> AssessmentPolicy {
    AssessmentPolicy::new((0..horizon).map(|_| random_simplex(rng, n)).collect()).unwrap()
}

/// Gradient of total score w.r.t. `e_t`, by unrolling the score sum term
/// by term (no suffix sums).
pub fn naive_coefficients(params: &GameParams, policy: &AssessmentPolicy) -> Vec<Vec<f64>> {
    let (n, d, horizon) = (params.n(), params.d(), params.horizon);
    let mut out = vec![vec![0.0; d]; horizon];
    for (t, c) in out.iter_mut().enumerate() {
        for j in 0..d {
            let mut g = 0.0;
            for i in t..horizon {
                let carry = if i == t { 1.0 } else { params.omega[j] };
                for k in 0..n {
                    g += policy.rules[i][k] * params.w[(k, j)] * carry;
                }
            }
            c[j] = g;
        }
    }
    out
}

/// Which per-round rules a brute-force oracle enumerates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Rules {
    /// `θ ≥ 0, Σθ = 1`.
    Simplex,
    /// `θ ≥ 0, Σθ ≤ 1`: every nonnegative policy up to one common scale.
    Capped,
}

pub fn rule_grid(n: usize, step_k: usize, rules: Rules) -> Vec<Vec<f64>> {
    match rules {
        Rules::Simplex => stratreg_core::lattice::simplex_points(n, step_k),
        Rules::Capped => stratreg_core::lattice::subsimplex_points(n, step_k),
    }
}

/// Brute-force incentivizability: every assessment policy on a per-round
/// grid, with every tie-breaking of the agent's best response.
///
/// Policies leaving some round with no positive coefficient are skipped.
/// Stores the distinct per-round tie-set tuples (as action bitmasks); an
/// effort policy is admitted when it spends the full budget and its support
/// lies inside some recorded tuple.
pub struct ThetaGridOracle {
    pub tuples: Vec<Vec<u32>>,
}

impl ThetaGridOracle {
    pub fn new(params: &GameParams, step_k: usize, rules: Rules) -> Self {
        assert!(params.d() <= 32);
        let points = rule_grid(params.n(), step_k, rules);
        let mut seen = std::collections::HashSet::new();
        stratreg_core::lattice::for_each_tuple(points.len(), params.horizon, |idx| {
            let policy = AssessmentPolicy::unnormalized(idx.iter().map(|&i| points[i].clone()).collect());
            let coefficients = naive_coefficients(params, &policy);
            // A round whose best coefficient is not positive gives no incentive at all.
            if coefficients.iter().any(|c| c.iter().all(|&v| v <= 1e-12)) {
                return;
            }
            let masks: Vec<u32> = coefficients
                .iter()
                .map(|c| {
                    let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    c.iter()
                        .enumerate()
                        .filter(|(_, &v)| v >= max - 1e-9)
                        .fold(0u32, |m, (j, _)| m | (1 << j))
                })
                .collect();
            seen.insert(masks);
        });
        let mut tuples: Vec<Vec<u32>> = seen.into_iter().collect();
        tuples.sort();
        ThetaGridOracle { tuples }
    }

    pub fn admits(&self, efforts: &EffortPolicy) -> bool {
        if efforts.round_sums().iter().any(|s| (s - 1.0).abs() > 1e-9) {
            return false;
        }
        let support: Vec<u32> = efforts
            .efforts
            .iter()
            .map(|e| e.iter().enumerate().filter(|(_, &v)| v > 1e-12).fold(0u32, |m, (j, _)| m | (1 << j)))
            .collect();
        self.tuples
            .iter()
            .any(|masks| masks.iter().zip(&support).all(|(m, s)| s & !m == 0))
    }
}

/// Smallest, over grid policies, of the worst shortfall of a supported
/// action below its round's best coefficient.
pub fn theta_grid_min_shortfall(params: &GameParams, efforts: &EffortPolicy, step_k: usize, rules: Rules) -> f64 {
    let points = rule_grid(params.n(), step_k, rules);
    let mut best = f64::INFINITY;
    stratreg_core::lattice::for_each_tuple(points.len(), params.horizon, |idx| {
        let policy = AssessmentPolicy::unnormalized(idx.iter().map(|&i| points[i].clone()).collect());
        let coefficients = naive_coefficients(params, &policy);
        if coefficients.iter().any(|c| c.iter().all(|&v| v <= 1e-12)) {
            return;
        }
        let mut worst = 0.0_f64;
        for (c, e) in coefficients.iter().zip(&efforts.efforts) {
            let max = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            for (j, &v) in e.iter().enumerate() {
                if v > 1e-12 {
                    worst = worst.max(max - c[j]);
                }
            }
        }
        best = best.min(worst);
    });
    best
}

/// Bound on how much any coefficient moves when every rule moves by one
/// grid step in ℓ₁: `(2/k)·max|W|·(1 + (T−1)·maxΩ)`.
pub fn theta_grid_resolution(params: &GameParams, step_k: usize) -> f64 {
    let w = params.w.as_slice().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let om = params.omega.iter().copied().fold(0.0_f64, f64::max);
    2.0 / step_k as f64 * w * (1.0 + (params.horizon as f64 - 1.0) * om)
}

/// Whether some policy on the θ-grid induces effort on `action` at any round
/// (under any tie-breaking).
pub fn theta_grid_ever_plays(params: &GameParams, action: usize, step_k: usize) -> bool {
    ThetaGridOracle::new(params, step_k, Rules::Simplex)
        .tuples
        .iter()
        .any(|masks| masks.iter().any(|m| m & (1 << action) != 0))
}

/// Maximizes the quadratic-cost agent utility by cyclic coordinate ascent,
/// with utilities evaluated through forward simulation.
pub fn coordinate_ascent(params: &GameParams, policy: &AssessmentPolicy, sweeps: usize) -> EffortPolicy {
    assert_eq!(params.cost_model, CostModel::Quadratic);
    let (d, horizon) = (params.d(), params.horizon);
    let mut e = EffortPolicy::zeros(horizon, d);
    let utility = |e: &EffortPolicy| simulate_trajectory(params, policy, e).unwrap().agent_utility;
    for _ in 0..sweeps {
        let mut moved = 0.0_f64;
        for t in 0..horizon {
            for j in 0..d {
                // The objective is an exact concave parabola in one coordinate
                // with curvature -1; recover its slope from two evaluations.
                let x0 = e.efforts[t][j];
                let u0 = utility(&e);
                e.efforts[t][j] = x0 + 1.0;
                let u1 = utility(&e);
                let slope_at_x0 = u1 - u0 + 0.5;
                let target = (x0 + slope_at_x0).max(0.0);
                e.efforts[t][j] = target;
                moved = moved.max((target - x0).abs());
            }
        }
        if moved < 1e-13 {
            break;
        }
    }
    e
}
