//! Stackelberg equilibria of the stateful strategic-regression game.
//!
//! A principal announces one linear scoring rule per round; an agent answers
//! with effort that partly accumulates into an internal state. This crate
//! computes agent best responses, decides which effort policies a linear
//! assessment policy can incentivize (and recovers such a policy from LP
//! duals), searches for the principal's optimal policy, and evaluates
//! closed-form horizon bounds.

pub mod agent;
pub mod bounds;
pub mod error;
pub mod game;
pub mod incentives;
pub mod lattice;
pub mod lp;
pub mod matrix;
pub mod principal;

pub use agent::{
    agent_brute_force_oracle, best_response_fixed_budget, best_response_quadratic, BestResponse,
    QuadraticResponse, TIE_TOL,
};
pub use bounds::{
    effort_level_horizon, implementability_horizon, implementability_horizon_with, quadratic_reachable,
    quadratic_reachable_in, HorizonBound, QuantifierOrder, RuleDomain,
};
pub use error::{Error, Result};
pub use game::{
    coefficient_vectors, principal_utility, simulate_trajectory, validate_params, AssessmentPolicy,
    CostModel, EffortPolicy, GameParams, Trajectory, ValidationReport, Violation, FEASIBILITY_TOL,
};
pub use incentives::{
    domination_lp, membership, recover_assessment, MembershipVerdict, RecoveredAssessment,
    DEFAULT_MEMBERSHIP_TOL,
};
pub use lp::{solve_lp, Constraint, LpError, LpProblem, LpSolution, LpStatus, Sense};
pub use matrix::Matrix;
pub use principal::{
    initial_point, outer_radius, solve_fixed_budget_anneal, solve_fixed_budget_grid, solve_quadratic,
    AnnealConfig, Diagnostics, OuterRadius, QuadraticSolution, SolveMethod, SolveResult,
};
