//! The principal's side: choosing the assessment policy.
//!
//! Under the fixed budget the principal's problem is a linear objective over
//! the convex set of incentivizable effort policies, accessible only through
//! the membership LP. [`solve_fixed_budget_anneal`] optimizes it by simulated
//! annealing with hit-and-run steps and then recovers a policy from the LP
//! duals; [`solve_fixed_budget_grid`] is an exhaustive baseline over gridded
//! assessment policies. Under quadratic cost the problem separates by round
//! and [`solve_quadratic`] solves it in closed form.

mod anneal;
mod grid;
mod quadratic;

pub use anneal::{solve_fixed_budget_anneal, AnnealConfig};
pub use grid::solve_fixed_budget_grid;
pub use quadratic::{quadratic_rule_scores, solve_quadratic, QuadraticSolution};

use crate::agent::best_response_fixed_budget;
use crate::error::Result;
use crate::game::{AssessmentPolicy, EffortPolicy, GameParams};
use crate::incentives::RecoveredAssessment;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveMethod {
    Anneal,
    Grid,
}

impl SolveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMethod::Anneal => "anneal",
            SolveMethod::Grid => "grid",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub phases: usize,
    /// Domination-LP solves, including those inside recovery.
    pub oracle_calls: usize,
    /// Dimension of the affine subspace the walk moved in.
    pub subspace_dim: usize,
    /// Pure incentivizable policies found while building the start point.
    pub vertices_found: usize,
    /// Set when some phase produced only zero-length chords.
    pub no_progress: bool,
    /// Weight of the start point mixed into the final answer to make it recoverable.
    pub shrink: f64,
    /// Assessment policies enumerated (grid method).
    pub policies_enumerated: u128,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub efforts: EffortPolicy,
    pub assessment: RecoveredAssessment,
    /// The gridded assessment policy that produced `efforts` (grid method).
    pub grid_policy: Option<AssessmentPolicy>,
    /// Principal utility `‖Λ Σ e_t‖₁` of `efforts`.
    pub value: f64,
    pub method: SolveMethod,
    pub diagnostics: Diagnostics,
}

/// The agent's best response to `seed_policy`; incentivizable by construction.
pub fn initial_point(params: &GameParams, seed_policy: &AssessmentPolicy) -> Result<EffortPolicy> {
    Ok(best_response_fixed_budget(params, seed_policy)?.efforts)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterRadius {
    /// Distance from the product of simplex centroids to any product of vertices.
    pub safe: f64,
    /// `sqrt(T(d−1) / (2(T(d−1)+1)))`, reported for comparison only.
    pub formula: f64,
}

/// Radius of a ball around the centroid containing every full-budget policy.
pub fn outer_radius(horizon: usize, d: usize) -> OuterRadius {
    if d <= 1 {
        return OuterRadius { safe: 0.0, formula: 0.0 };
    }
    let n = (horizon * (d - 1)) as f64;
    OuterRadius {
        safe: (horizon as f64 * (d as f64 - 1.0) / d as f64).sqrt(),
        formula: (n / (2.0 * (n + 1.0))).sqrt(),
    }
}
