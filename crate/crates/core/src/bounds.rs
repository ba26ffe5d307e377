//! Horizon bounds for incentivizing effort on a single action, and
//! reachability of effort vectors under quadratic cost.

use crate::agent::{best_response_fixed_budget, best_response_quadratic};
use crate::error::{Error, Result};
use crate::game::{AssessmentPolicy, CostModel, GameParams};
use crate::lp::{solve_lp, LpProblem, LpStatus, Sense};

/// Raw values this close to an integer are treated as that integer before rounding up.
const SNAP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct HorizonBound {
    pub feasible: bool,
    /// Sufficient horizon (`0` when infeasible).
    pub horizon: usize,
    /// Feature scored by the static single-feature policy.
    pub chosen_feature: Option<usize>,
    /// Competing action that determines the gap.
    pub binding_competitor: Option<usize>,
    /// Value before rounding up.
    pub raw_gap: f64,
    /// Whether simulation at `horizon` confirms the bound.
    pub verified: bool,
}

impl HorizonBound {
    fn infeasible() -> Self {
        HorizonBound {
            feasible: false,
            horizon: 0,
            chosen_feature: None,
            binding_competitor: None,
            raw_gap: f64::INFINITY,
            verified: false,
        }
    }

    /// `horizon − t` for implementability bounds.
    pub fn gap(&self, t: usize) -> Option<usize> {
        self.feasible.then(|| self.horizon - t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum QuantifierOrder {
    /// One feature `m` that beats every competitor: `min_m max_c`, with `m`
    /// restricted to features whose carry-over advantage is positive against
    /// all competitors.
    #[default]
    SingleFeature,
    /// `max_c min_m`, each competitor allowed its own feature. Not adjusted
    /// after simulation; `verified` reports whether some single-feature
    /// policy achieves it.
    PerCompetitor,
}

fn snap_ceil(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOL {
        r
    } else {
        x.ceil()
    }
}

/// Gap contributed by competitor `c` when scoring feature `m`, or `None`
/// when `m`'s carry-over advantage of `j` over `c` is not positive.
fn competitor_gap(params: &GameParams, j: usize, c: usize, m: usize) -> Option<f64> {
    let (w, om) = (&params.w, &params.omega);
    let den = om[j] * w[(m, j)] - om[c] * w[(m, c)];
    (den > 0.0).then(|| (w[(m, c)] - w[(m, j)]).max(0.0) / den)
}

/// Smallest horizon `T` such that scoring a single feature every round makes
/// action `j` a best response at rounds `1..=t` (1-based).
pub fn implementability_horizon(params: &GameParams, j: usize, t: usize) -> Result<HorizonBound> {
    implementability_horizon_with(params, j, t, QuantifierOrder::default())
}

pub fn implementability_horizon_with(
    params: &GameParams,
    j: usize,
    t: usize,
    order: QuantifierOrder,
) -> Result<HorizonBound> {
    params.require(CostModel::FixedBudget)?;
    params.validated()?;
    let (n, d) = (params.n(), params.d());
    if j >= d {
        return Err(Error::InvalidArgument(format!("action index {j} out of range")));
    }
    if t == 0 {
        return Err(Error::InvalidArgument("round t must be at least 1".into()));
    }
    let competitors: Vec<usize> = (0..d).filter(|&c| c != j).collect();

    match order {
        QuantifierOrder::SingleFeature => {
            let mut best: Option<(f64, usize, Option<usize>)> = None;
            for m in (0..n).filter(|&m| params.w[(m, j)] > 0.0) {
                let mut worst: (f64, Option<usize>) = (0.0, None);
                let mut valid = true;
                for &c in &competitors {
                    match competitor_gap(params, j, c, m) {
                        Some(g) => {
                            if worst.1.is_none() || g > worst.0 {
                                worst = (g, Some(c));
                            }
                        }
                        None => {
                            valid = false;
                            break;
                        }
                    }
                }
                if valid && best.as_ref().is_none_or(|b| worst.0 < b.0) {
                    best = Some((worst.0, m, worst.1));
                }
            }
            let Some((gap, m, c)) = best else {
                return Ok(HorizonBound::infeasible());
            };
            let mut horizon = t + snap_ceil(gap) as usize;
            let mut verified = plays_through(params, j, t, m, horizon)?;
            if !verified && plays_through(params, j, t, m, horizon + 1)? {
                horizon += 1;
                verified = true;
            }
            Ok(HorizonBound {
                feasible: true,
                horizon,
                chosen_feature: Some(m),
                binding_competitor: c,
                raw_gap: gap,
                verified,
            })
        }
        QuantifierOrder::PerCompetitor => {
            let mut gap = 0.0_f64;
            let mut binding = None;
            for &c in &competitors {
                let inner = (0..n)
                    .filter_map(|m| competitor_gap(params, j, c, m))
                    .fold(f64::INFINITY, f64::min);
                if inner.is_infinite() {
                    return Ok(HorizonBound::infeasible());
                }
                if binding.is_none() || inner > gap {
                    gap = inner;
                    binding = Some(c);
                }
            }
            let horizon = t + snap_ceil(gap) as usize;
            let mut verified = false;
            for m in 0..n {
                verified |= plays_through(params, j, t, m, horizon)?;
            }
            Ok(HorizonBound {
                feasible: true,
                horizon,
                chosen_feature: None,
                binding_competitor: binding,
                raw_gap: gap,
                verified,
            })
        }
    }
}

/// Whether scoring feature `m` every round of a `horizon`-round game makes
/// the agent play `j` at rounds `1..=t`.
fn plays_through(params: &GameParams, j: usize, t: usize, m: usize, horizon: usize) -> Result<bool> {
    if horizon < t {
        return Ok(false);
    }
    let p = params.clone().with_horizon(horizon);
    let br = best_response_fixed_budget(&p, &AssessmentPolicy::basis(p.n(), m, horizon))?;
    Ok(br.actions()[..t].iter().all(|&a| a == j))
}

/// Smallest horizon at which scoring the feature with the largest
/// `W_mj` every round makes cumulative quadratic-cost effort on `j` reach `effort`.
pub fn effort_level_horizon(params: &GameParams, j: usize, effort: f64) -> Result<HorizonBound> {
    params.require(CostModel::Quadratic)?;
    params.validated()?;
    if j >= params.d() {
        return Err(Error::InvalidArgument(format!("action index {j} out of range")));
    }
    if !(effort > 0.0) {
        return Err(Error::InvalidArgument("effort level must be positive".into()));
    }
    let om = params.omega[j];
    if om == 0.0 {
        return Err(Error::InfeasibleCarryOver { action: j });
    }
    let m = (0..params.n())
        .fold(0, |best, k| if params.w[(k, j)] > params.w[(best, j)] { k } else { best });
    let w = params.w[(m, j)];
    let raw = 0.5 - 1.0 / om + 0.5 * ((2.0 / om - 1.0).powi(2) + 8.0 * effort / (om * w)).sqrt();
    let horizon = (snap_ceil(raw) as usize).max(1);
    let verified = cumulative_effort(params, j, m, horizon)? >= effort - SNAP_TOL * effort.max(1.0);
    Ok(HorizonBound {
        feasible: true,
        horizon,
        chosen_feature: Some(m),
        binding_competitor: None,
        raw_gap: raw,
        verified,
    })
}

/// `Σ_t e*_{t,j}` under quadratic cost when feature `m` is scored every round.
pub fn cumulative_effort(params: &GameParams, j: usize, m: usize, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Ok(0.0);
    }
    let p = params.clone().with_horizon(horizon);
    let qr = best_response_quadratic(&p, &AssessmentPolicy::basis(p.n(), m, horizon))?;
    Ok(qr.efforts.efforts.iter().map(|e| e[j]).sum())
}

/// Which scoring rules a reachability query may use.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RuleDomain {
    /// `θ ≥ 0, Σθ = 1`.
    Simplex,
    /// `θ ≥ 0, Σθ ≤ 1`: a round may carry less than full weight.
    #[default]
    Capped,
}

/// Whether some rules `θ_t, …, θ_horizon` make `e` the quadratic-cost best
/// response at round `t` (1-based), under capped rules.
pub fn quadratic_reachable(params: &GameParams, t: usize, horizon: usize, e: &[f64]) -> Result<bool> {
    quadratic_reachable_in(params, t, horizon, e, RuleDomain::default())
}

/// Feasibility LP in the rules: `Wᵀθ_t + Ω Wᵀ Σ_{i>t} θ_i = e` plus one
/// weight row per rule.
pub fn quadratic_reachable_in(
    params: &GameParams,
    t: usize,
    horizon: usize,
    e: &[f64],
    domain: RuleDomain,
) -> Result<bool> {
    params.require(CostModel::Quadratic)?;
    let (n, d) = (params.n(), params.d());
    if t == 0 || t > horizon {
        return Err(Error::InvalidArgument(format!("need 1 <= t <= horizon, got t={t}, horizon={horizon}")));
    }
    if e.len() != d {
        return Err(Error::DimensionMismatch(format!("effort vector has {} entries, expected {d}", e.len())));
    }
    let rules = horizon - t + 1;
    let mut lp = LpProblem::new(vec![0.0; rules * n]);
    for (j, &target) in e.iter().enumerate() {
        let mut row = vec![0.0; rules * n];
        for i in 0..rules {
            let carry = if i == 0 { 1.0 } else { params.omega[j] };
            for k in 0..n {
                row[i * n + k] = carry * params.w[(k, j)];
            }
        }
        lp.add_row(row, Sense::Eq, target);
    }
    let sense = match domain {
        RuleDomain::Simplex => Sense::Eq,
        RuleDomain::Capped => Sense::Le,
    };
    for i in 0..rules {
        let mut row = vec![0.0; rules * n];
        row[i * n..(i + 1) * n].fill(1.0);
        lp.add_row(row, sense, 1.0);
    }
    Ok(solve_lp(&lp)?.status == LpStatus::Optimal)
}
