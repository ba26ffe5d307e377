//! Game instances, strategies and forward simulation.
//!
//! Effort enters the observable features through a linear conversion
//! matrix `W` (features × actions). A diagonal carry-over `Ω` accumulates
//! effort into an internal state, so the features observed at round `t` are
//! `o_t = W (s_t + e_t)` with `s_{t+1} = s_t + Ω e_t`.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};

/// Tolerance for simplex membership and budget feasibility.
pub const FEASIBILITY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CostModel {
    /// Per-round effort budget of one unit (ℓ1).
    FixedBudget,
    /// No budget; the agent pays `½‖e_t‖²` every round.
    Quadratic,
}

impl CostModel {
    pub fn as_str(self) -> &'static str {
        match self {
            CostModel::FixedBudget => "fixed_budget",
            CostModel::Quadratic => "quadratic",
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameParams {
    /// Effort conversion matrix, `n` features × `d` actions.
    pub w: Matrix,
    /// Diagonal of the carry-over matrix, one entry per action.
    pub omega: Vec<f64>,
    /// Diagonal of the principal's preference matrix, one entry per action.
    pub lambda: Vec<f64>,
    /// Initial internal state (effort units).
    pub s0: Vec<f64>,
    /// Additive offset on every round's features (`o_0` when `s0 = 0`).
    pub feature_offset: Vec<f64>,
    pub horizon: usize,
    pub cost_model: CostModel,
    pub feature_names: Vec<String>,
    pub action_names: Vec<String>,
}

impl GameParams {
    /// Zero initial state, zero feature offset, generic labels.
    pub fn new(
        w: Matrix,
        omega: Vec<f64>,
        lambda: Vec<f64>,
        horizon: usize,
        cost_model: CostModel,
    ) -> Self {
        let (n, d) = (w.rows(), w.cols());
        GameParams {
            w,
            omega,
            lambda,
            s0: vec![0.0; d],
            feature_offset: vec![0.0; n],
            horizon,
            cost_model,
            feature_names: (0..n).map(|k| format!("f{k}")).collect(),
            action_names: (0..d).map(|j| format!("a{j}")).collect(),
        }
    }

    /// The teacher/student example: features (test, homework), actions
    /// (cheat-test, study, cheat-homework); only studying carries over and
    /// only studying is valued by the principal.
    pub fn classroom(horizon: usize) -> Self {
        GameParams::new(
            Matrix::from_rows(&[[3.0, 1.0, 0.0], [0.0, 1.0, 3.0]]),
            vec![0.0, 1.0, 0.0],
            vec![0.0, 1.0, 0.0],
            horizon,
            CostModel::FixedBudget,
        )
        .with_names(&["TE", "HW"], &["cheat_test", "study", "cheat_homework"])
    }

    pub fn with_names(mut self, features: &[&str], actions: &[&str]) -> Self {
        self.feature_names = features.iter().map(|s| s.to_string()).collect();
        self.action_names = actions.iter().map(|s| s.to_string()).collect();
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_cost_model(mut self, cost_model: CostModel) -> Self {
        self.cost_model = cost_model;
        self
    }

    pub fn with_s0(mut self, s0: Vec<f64>) -> Self {
        self.s0 = s0;
        self
    }

    pub fn with_omega(mut self, action: usize, value: f64) -> Self {
        self.omega[action] = value;
        self
    }

    pub fn with_lambda(mut self, lambda: Vec<f64>) -> Self {
        self.lambda = lambda;
        self
    }

    /// Number of observable features.
    pub fn n(&self) -> usize {
        self.w.rows()
    }

    /// Number of effort actions.
    pub fn d(&self) -> usize {
        self.w.cols()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_names.iter().position(|a| a == name)
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.feature_names.iter().position(|f| f == name)
    }

    pub(crate) fn require(&self, model: CostModel) -> Result<()> {
        if self.cost_model == model {
            Ok(())
        } else {
            Err(Error::WrongCostModel {
                expected: model.as_str(),
            })
        }
    }

    /// Validates and returns an error carrying the report on failure.
    pub fn validated(&self) -> Result<()> {
        let report = validate_params(self);
        if report.is_ok() {
            Ok(())
        } else {
            Err(Error::InvalidParams(report))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.message.contains(needle))
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

pub fn validate_params(params: &GameParams) -> ValidationReport {
    let mut report = ValidationReport::default();
    let (n, d) = (params.n(), params.d());

    if n == 0 {
        report.push("W", "no features (n must be at least 1)");
    }
    if d == 0 {
        report.push("W", "no actions (d must be at least 1)");
    }
    if params.horizon == 0 {
        report.push("T", "horizon must be at least 1");
    }

    for k in 0..n {
        for j in 0..d {
            let v = params.w[(k, j)];
            if !v.is_finite() {
                report.push(format!("W[{k}][{j}]"), "non-finite conversion rate");
            } else if v < 0.0 {
                report.push(format!("W[{k}][{j}]"), "negative conversion rate");
            }
        }
    }
    for j in 0..d {
        if !params.w.column(j).any(|v| v > 0.0) {
            report.push(format!("W[*][{j}]"), "non-monotone column (no positive entry)");
        }
    }

    let lengths: [(&str, usize, usize); 6] = [
        ("omega_diag", params.omega.len(), d),
        ("lambda_diag", params.lambda.len(), d),
        ("s0", params.s0.len(), d),
        ("feature_offset", params.feature_offset.len(), n),
        ("features", params.feature_names.len(), n),
        ("actions", params.action_names.len(), d),
    ];
    for (path, got, want) in lengths {
        if got != want {
            report.push(path, format!("length {got}, expected {want}"));
        }
    }

    for (j, &o) in params.omega.iter().enumerate() {
        if !(0.0..=1.0).contains(&o) {
            report.push(format!("omega_diag[{j}]"), "carry-over outside [0,1]");
        }
    }
    for (j, &l) in params.lambda.iter().enumerate() {
        if !(l >= 0.0 && l.is_finite()) {
            report.push(format!("lambda_diag[{j}]"), "preference weight must be finite and >= 0");
        }
    }
    for (j, &s) in params.s0.iter().enumerate() {
        if !s.is_finite() {
            report.push(format!("s0[{j}]"), "non-finite initial state");
        }
    }
    for (k, &o) in params.feature_offset.iter().enumerate() {
        if !o.is_finite() {
            report.push(format!("feature_offset[{k}]"), "non-finite feature offset");
        }
    }
    report
}

/// The principal's strategy: one scoring rule per round.
#[derive(Clone, Debug, PartialEq)]
pub struct AssessmentPolicy {
    pub rules: Vec<Vec<f64>>,
    /// Set for rules that need not lie in the probability simplex (dual-recovered).
    pub unnormalized: bool,
}

impl AssessmentPolicy {
    /// Rules must lie in the probability simplex.
    pub fn new(rules: Vec<Vec<f64>>) -> Result<Self> {
        for (t, rule) in rules.iter().enumerate() {
            if !in_simplex(rule) {
                return Err(Error::InvalidArgument(format!(
                    "assessment rule for round {} is not in the probability simplex",
                    t + 1
                )));
            }
        }
        Ok(AssessmentPolicy {
            rules,
            unnormalized: false,
        })
    }

    pub fn unnormalized(rules: Vec<Vec<f64>>) -> Self {
        AssessmentPolicy {
            rules,
            unnormalized: true,
        }
    }

    pub fn constant(rule: Vec<f64>, horizon: usize) -> Result<Self> {
        AssessmentPolicy::new(vec![rule; horizon])
    }

    pub fn uniform(n: usize, horizon: usize) -> Self {
        AssessmentPolicy {
            rules: vec![vec![1.0 / n as f64; n]; horizon],
            unnormalized: false,
        }
    }

    /// Every round scores feature `k` only.
    pub fn basis(n: usize, k: usize, horizon: usize) -> Self {
        let mut rule = vec![0.0; n];
        rule[k] = 1.0;
        AssessmentPolicy {
            rules: vec![rule; horizon],
            unnormalized: false,
        }
    }

    pub fn horizon(&self) -> usize {
        self.rules.len()
    }

    fn check_dims(&self, params: &GameParams) -> Result<()> {
        if self.rules.len() != params.horizon {
            return Err(Error::DimensionMismatch(format!(
                "assessment policy has {} rounds, game horizon is {}",
                self.rules.len(),
                params.horizon
            )));
        }
        if let Some(t) = self.rules.iter().position(|r| r.len() != params.n()) {
            return Err(Error::DimensionMismatch(format!(
                "assessment rule for round {} has {} weights, expected {}",
                t + 1,
                self.rules[t].len(),
                params.n()
            )));
        }
        Ok(())
    }
}

pub(crate) fn in_simplex(v: &[f64]) -> bool {
    v.iter().all(|&x| x >= -FEASIBILITY_TOL && x.is_finite())
        && (v.iter().sum::<f64>() - 1.0).abs() <= FEASIBILITY_TOL
}

/// The agent's strategy: one effort vector per round.
#[derive(Clone, Debug, PartialEq)]
pub struct EffortPolicy {
    pub efforts: Vec<Vec<f64>>,
}

impl EffortPolicy {
    pub fn new(efforts: Vec<Vec<f64>>) -> Self {
        EffortPolicy { efforts }
    }

    pub fn zeros(horizon: usize, d: usize) -> Self {
        EffortPolicy {
            efforts: vec![vec![0.0; d]; horizon],
        }
    }

    /// Full budget on `actions[t]` at round `t`.
    pub fn pure(actions: &[usize], d: usize) -> Self {
        EffortPolicy {
            efforts: actions
                .iter()
                .map(|&j| {
                    let mut e = vec![0.0; d];
                    e[j] = 1.0;
                    e
                })
                .collect(),
        }
    }

    /// Inverse of [`EffortPolicy::flatten`].
    pub fn from_flat(x: &[f64], d: usize) -> Self {
        EffortPolicy {
            efforts: x.chunks(d).map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.efforts.len()
    }

    /// Round-major concatenation of all effort vectors.
    pub fn flatten(&self) -> Vec<f64> {
        self.efforts.concat()
    }

    pub fn round_sums(&self) -> Vec<f64> {
        self.efforts.iter().map(|e| e.iter().sum()).collect()
    }

    /// Componentwise total `Σ_t e_t`.
    pub fn cumulative(&self) -> Vec<f64> {
        let d = self.efforts.first().map_or(0, Vec::len);
        let mut total = vec![0.0; d];
        for e in &self.efforts {
            for (s, &v) in total.iter_mut().zip(e) {
                *s += v;
            }
        }
        total
    }

    pub(crate) fn check_dims(&self, params: &GameParams) -> Result<()> {
        if self.efforts.len() != params.horizon {
            return Err(Error::DimensionMismatch(format!(
                "effort policy has {} rounds, game horizon is {}",
                self.efforts.len(),
                params.horizon
            )));
        }
        if let Some(t) = self.efforts.iter().position(|e| e.len() != params.d()) {
            return Err(Error::DimensionMismatch(format!(
                "effort vector for round {} has {} entries, expected {}",
                t + 1,
                self.efforts[t].len(),
                params.d()
            )));
        }
        Ok(())
    }

    /// Dimensions, nonnegativity and (fixed budget) the per-round budget.
    pub fn check_feasible(&self, params: &GameParams) -> Result<()> {
        self.check_dims(params)?;
        for (t, e) in self.efforts.iter().enumerate() {
            if e.iter().any(|&v| !(v >= -FEASIBILITY_TOL && v.is_finite())) {
                return Err(Error::InvalidArgument(format!(
                    "effort vector for round {} has a negative or non-finite entry",
                    t + 1
                )));
            }
            if params.cost_model == CostModel::FixedBudget
                && e.iter().sum::<f64>() > 1.0 + FEASIBILITY_TOL
            {
                return Err(Error::InvalidArgument(format!(
                    "effort vector for round {} exceeds the unit budget",
                    t + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `s_t` for each round (effort units); `states[0] = s0`.
    pub states: Vec<Vec<f64>>,
    /// `o_t` for each round (feature units).
    pub observables: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
    pub agent_utility: f64,
    pub principal_utility: f64,
}

/// Principal utility `‖Λ Σ_t e_t‖₁`.
pub fn principal_utility(params: &GameParams, efforts: &EffortPolicy) -> f64 {
    efforts
        .cumulative()
        .iter()
        .zip(&params.lambda)
        .map(|(e, l)| (l * e).abs())
        .sum()
}

pub fn simulate_trajectory(
    params: &GameParams,
    policy: &AssessmentPolicy,
    efforts: &EffortPolicy,
) -> Result<Trajectory> {
    policy.check_dims(params)?;
    efforts.check_dims(params)?;

    let horizon = params.horizon;
    let mut states = Vec::with_capacity(horizon);
    let mut observables = Vec::with_capacity(horizon);
    let mut scores = Vec::with_capacity(horizon);
    let mut state = params.s0.clone();
    let mut cost = 0.0;

    for (rule, e) in policy.rules.iter().zip(&efforts.efforts) {
        let input: Vec<f64> = state.iter().zip(e).map(|(s, e)| s + e).collect();
        let mut o = params.w.mul_vec(&input);
        for (o, off) in o.iter_mut().zip(&params.feature_offset) {
            *o += off;
        }
        scores.push(dot(rule, &o));
        observables.push(o);
        states.push(state.clone());
        cost += 0.5 * dot(e, e);
        for ((s, &e), &om) in state.iter_mut().zip(e).zip(&params.omega) {
            *s += om * e;
        }
    }

    let total: f64 = scores.iter().sum();
    let agent_utility = match params.cost_model {
        CostModel::FixedBudget => total,
        CostModel::Quadratic => total - cost,
    };
    Ok(Trajectory {
        states,
        observables,
        scores,
        agent_utility,
        principal_utility: principal_utility(params, efforts),
    })
}

/// Gradient of the agent's total score with respect to each round's effort:
/// `c_t = Wᵀθ_t + Ω Wᵀ Σ_{i>t} θ_i`.
pub fn coefficient_vectors(params: &GameParams, policy: &AssessmentPolicy) -> Result<Vec<Vec<f64>>> {
    policy.check_dims(params)?;
    let horizon = params.horizon;
    let mut out = vec![Vec::new(); horizon];
    // Σ_{i>t} θ_i, built from the last round backwards.
    let mut future = vec![0.0; params.n()];
    for t in (0..horizon).rev() {
        let now = params.w.tr_mul_vec(&policy.rules[t]);
        let later = params.w.tr_mul_vec(&future);
        out[t] = now
            .iter()
            .zip(&later)
            .zip(&params.omega)
            .map(|((a, b), om)| a + om * b)
            .collect();
        for (f, r) in future.iter_mut().zip(&policy.rules[t]) {
            *f += r;
        }
    }
    Ok(out)
}
