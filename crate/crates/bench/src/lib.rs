//! Fixtures shared by the solver benchmarks.

use stratreg_core::{AssessmentPolicy, CostModel, EffortPolicy, GameParams, Matrix};

/// Classroom game with `horizon` rounds.
pub fn classroom(horizon: usize) -> GameParams {
    GameParams::classroom(horizon)
}

/// Study in every round but the last, then cheat on the test.
pub fn classroom_target(horizon: usize) -> EffortPolicy {
    let actions: Vec<usize> = (0..horizon).map(|t| if t + 1 < horizon { 1 } else { 0 }).collect();
    EffortPolicy::pure(&actions, 3)
}

/// Two-feature quadratic game whose optimal policy switches rules once.
pub fn switching(horizon: usize) -> GameParams {
    GameParams::new(
        Matrix::diag(&[0.25, 1.0 / 9.0]),
        vec![1.0 / 800.0, 1.0 / 400.0],
        vec![1.0 / 800.0, 1.0 / 400.0],
        horizon,
        CostModel::Quadratic,
    )
}

pub fn uniform(params: &GameParams) -> AssessmentPolicy {
    AssessmentPolicy::uniform(params.n(), params.horizon)
}
