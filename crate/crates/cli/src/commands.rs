//! Command implementations. Each writes a human-readable report to `out`
//! and optionally a CSV file.

use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use stratreg_core::{
    best_response_fixed_budget, best_response_quadratic, effort_level_horizon, implementability_horizon_with,
    membership, recover_assessment, solve_fixed_budget_anneal, solve_fixed_budget_grid, solve_quadratic,
    AssessmentPolicy, CostModel, EffortPolicy, Error, GameParams, QuantifierOrder, DEFAULT_MEMBERSHIP_TOL,
};

use crate::figures;
use crate::scenario::{parse_scenario, ScenarioError, SolverSettings};
use crate::table::{fmt_flag, fmt_float, FigureDataset};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionMismatch(_)
            | Error::InvalidParams(_)
            | Error::WrongCostModel { .. }
            | Error::InvalidArgument(_)
            | Error::GuardExceeded { .. } => CliError::Input(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

fn read_matrix(path: &Path, what: &str) -> CliResult<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {what} file {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Input(format!(
            "{what} file {} must be a JSON array of per-round arrays: {e}",
            path.display()
        ))
    })
}

pub fn read_policy(path: &Path, params: &GameParams) -> CliResult<AssessmentPolicy> {
    let policy = AssessmentPolicy::new(read_matrix(path, "policy")?)?;
    if policy.horizon() != params.horizon || policy.rules.iter().any(|r| r.len() != params.n()) {
        return Err(CliError::Input(format!(
            "policy must have {} rules of {} weights",
            params.horizon,
            params.n()
        )));
    }
    Ok(policy)
}

pub fn read_efforts(path: &Path) -> CliResult<EffortPolicy> {
    Ok(EffortPolicy::new(read_matrix(path, "efforts")?))
}

/// Accepts an action name or a zero-based index.
pub fn resolve_action(params: &GameParams, action: &str) -> CliResult<usize> {
    params
        .action_index(action)
        .or_else(|| action.parse().ok().filter(|&j: &usize| j < params.d()))
        .ok_or_else(|| CliError::Input(format!("unknown action {action:?}")))
}

fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_float(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn validate(scenario: &Path, out: &mut dyn Write) -> CliResult {
    let (params, file) = parse_scenario(scenario)?;
    writeln!(
        out,
        "ok: {} ({} features, {} actions, T = {}, {})",
        file.name,
        params.n(),
        params.d(),
        params.horizon,
        params.cost_model.as_str()
    )?;
    Ok(())
}

pub fn best_response(scenario: &Path, policy: &Path, csv: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let policy = read_policy(policy, &params)?;
    let data = figures::trajectory(&params, &policy)?;
    match params.cost_model {
        CostModel::FixedBudget => {
            let br = best_response_fixed_budget(&params, &policy)?;
            writeln!(out, "round\taction\tcoefficients\ttied")?;
            for (t, a) in br.actions().into_iter().enumerate() {
                let tied: Vec<&str> = br.tie_sets[t].iter().map(|&j| params.action_names[j].as_str()).collect();
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    t + 1,
                    params.action_names[a],
                    fmt_vec(&br.coefficients[t]),
                    tied.join("|")
                )?;
            }
            writeln!(out, "unique: {}", br.is_unique.iter().all(|&u| u))?;
        }
        CostModel::Quadratic => {
            let qr = best_response_quadratic(&params, &policy)?;
            writeln!(out, "round\tefforts")?;
            for (t, e) in qr.efforts.efforts.iter().enumerate() {
                writeln!(out, "{}\t{}", t + 1, fmt_vec(e))?;
            }
            if qr.clamped {
                writeln!(out, "note: negative coefficients clamped to zero effort")?;
            }
        }
    }
    if let Some(path) = csv {
        data.write_file(path)?;
    }
    Ok(())
}

pub fn membership_cmd(scenario: &Path, efforts: &Path, out: &mut dyn Write) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let efforts = read_efforts(efforts)?;
    let verdict = membership(&params, &efforts, DEFAULT_MEMBERSHIP_TOL)?;
    writeln!(out, "kappa: {}", fmt_float(verdict.kappa))?;
    writeln!(out, "T: {}", params.horizon)?;
    writeln!(out, "incentivizable: {}", verdict.incentivizable)?;
    Ok(())
}

fn policy_rows(params: &GameParams, policy: &AssessmentPolicy, efforts: &EffortPolicy) -> FigureDataset {
    let mut headers = vec!["round".to_string(), "basis_index".to_string()];
    headers.extend(params.feature_names.iter().map(|f| format!("theta_{f}")));
    headers.extend(params.action_names.iter().map(|a| format!("e_{a}")));
    let mut data = FigureDataset::new(headers);
    for t in 0..params.horizon {
        let rule = &policy.rules[t];
        let basis = (0..rule.len()).find(|&k| rule[k] == 1.0 && rule.iter().filter(|&&v| v != 0.0).count() == 1);
        let mut row = vec![(t + 1).to_string(), basis.map(|k| k.to_string()).unwrap_or_default()];
        row.extend(rule.iter().map(|&v| fmt_float(v)));
        row.extend(efforts.efforts[t].iter().map(|&v| fmt_float(v)));
        data.push(row);
    }
    data
}

fn append_constant(data: &mut FigureDataset, columns: &[(&str, String)]) {
    for (name, _) in columns {
        data.headers.push((*name).to_string());
    }
    for row in &mut data.rows {
        row.extend(columns.iter().map(|(_, v)| v.clone()));
    }
}

pub fn recover(scenario: &Path, efforts: &Path, csv: Option<&Path>, out: &mut dyn Write) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let efforts = read_efforts(efforts)?;
    let rec = recover_assessment(&params, &efforts)?;
    writeln!(out, "round\ttheta\tgamma")?;
    for t in 0..params.horizon {
        writeln!(out, "{}\t{}\t{}", t + 1, fmt_vec(&rec.rescaled.rules[t]), fmt_float(rec.gamma[t]))?;
    }
    writeln!(out, "validated: {}", rec.validated)?;
    writeln!(out, "max_violation: {}", fmt_float(rec.max_violation))?;
    if rec.simplex_violation {
        writeln!(out, "note: some recovered rules are not on the simplex")?;
    }
    if let Some(path) = csv {
        let mut data = policy_rows(&params, &rec.rescaled, &efforts);
        data.headers.push("gamma".into());
        for (row, g) in data.rows.iter_mut().zip(&rec.gamma) {
            row.push(fmt_float(*g));
        }
        data.write_file(path)?;
    }
    if !rec.validated {
        return Err(CliError::Solver(format!(
            "recovered policy does not incentivize the efforts (worst violation {})",
            fmt_float(rec.max_violation)
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Anneal,
    Grid,
    Quadratic,
}

#[derive(Clone, Debug, Default)]
pub struct SolveOptions {
    /// Defaults by cost model: anneal for fixed budget, quadratic otherwise.
    pub method: Option<Method>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    /// Raw `STRAT_SEED` value; overrides `seed` when present.
    pub env_seed: Option<String>,
    pub r: Option<f64>,
    pub samples_per_phase: Option<usize>,
    pub walk_steps: Option<usize>,
    pub grid_k: usize,
    pub out: Option<PathBuf>,
}

pub fn solve(scenario: &Path, opts: &SolveOptions, out: &mut dyn Write) -> CliResult {
    let (params, file) = parse_scenario(scenario)?;
    let method = opts.method.unwrap_or(match params.cost_model {
        CostModel::FixedBudget => Method::Anneal,
        CostModel::Quadratic => Method::Quadratic,
    });

    let (data, value) = match method {
        Method::Quadratic => {
            let sol = solve_quadratic(&params)?;
            let mut data = policy_rows(&params, &sol.policy, &sol.efforts);
            append_constant(
                &mut data,
                &[("value", fmt_float(sol.value)), ("method", "quadratic".into())],
            );
            writeln!(out, "method: quadratic")?;
            let names: Vec<&str> = sol.chosen.iter().map(|&k| params.feature_names[k].as_str()).collect();
            writeln!(out, "rules: {}", run_lengths(&names))?;
            (data, sol.value)
        }
        Method::Anneal | Method::Grid => {
            let result = if method == Method::Grid {
                solve_fixed_budget_grid(&params, opts.grid_k)?
            } else {
                let mut config = file.anneal_config();
                SolverSettings {
                    eps: opts.eps,
                    delta: opts.delta,
                    seed: opts.seed,
                    r: opts.r,
                    samples_per_phase: opts.samples_per_phase,
                    walk_steps: opts.walk_steps,
                }
                .apply(&mut config);
                if let Some(raw) = &opts.env_seed {
                    config.seed = raw
                        .trim()
                        .parse()
                        .map_err(|_| CliError::Input(format!("STRAT_SEED must be an unsigned integer, got {raw:?}")))?;
                }
                writeln!(out, "seed: {}", config.seed)?;
                solve_fixed_budget_anneal(&params, &config)?
            };
            let policy = result.grid_policy.as_ref().unwrap_or(&result.assessment.rescaled);
            let diag = &result.diagnostics;
            let mut data = policy_rows(&params, policy, &result.efforts);
            append_constant(
                &mut data,
                &[
                    ("value", fmt_float(result.value)),
                    ("method", result.method.as_str().into()),
                    ("phases", diag.phases.to_string()),
                    ("oracle_calls", diag.oracle_calls.to_string()),
                    ("validated", fmt_flag(result.assessment.validated)),
                    ("no_progress", fmt_flag(diag.no_progress)),
                ],
            );
            writeln!(out, "method: {}", result.method.as_str())?;
            writeln!(out, "phases: {}", diag.phases)?;
            writeln!(out, "oracle_calls: {}", diag.oracle_calls)?;
            if method == Method::Grid {
                writeln!(out, "policies_enumerated: {}", diag.policies_enumerated)?;
            } else {
                writeln!(out, "subspace_dim: {}", diag.subspace_dim)?;
                writeln!(out, "shrink: {}", fmt_float(diag.shrink))?;
            }
            writeln!(out, "validated: {}", result.assessment.validated)?;
            if diag.no_progress {
                writeln!(out, "warning: no_progress (some phase produced only zero-length chords)")?;
            }
            (data, result.value)
        }
    };

    writeln!(out, "round\ttheta\tefforts")?;
    let theta_cols: Vec<usize> = (0..params.n()).map(|k| 2 + k).collect();
    let effort_cols: Vec<usize> = (0..params.d()).map(|j| 2 + params.n() + j).collect();
    for row in &data.rows {
        let theta: Vec<&str> = theta_cols.iter().map(|&c| row[c].as_str()).collect();
        let e: Vec<&str> = effort_cols.iter().map(|&c| row[c].as_str()).collect();
        writeln!(out, "{}\t[{}]\t[{}]", row[0], theta.join(", "), e.join(", "))?;
    }
    writeln!(out, "value: {}", fmt_float(value))?;
    if let Some(path) = &opts.out {
        data.write_file(path)?;
    }
    Ok(())
}

/// `A×3, B×2` style summary of a rule sequence.
fn run_lengths(names: &[&str]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < names.len() {
        let j = (i..names.len()).find(|&j| names[j] != names[i]).unwrap_or(names.len());
        parts.push(format!("{}x{} (rounds {}-{})", names[i], j - i, i + 1, j));
        i = j;
    }
    parts.join(", ")
}

pub fn bounds_implementability(
    scenario: &Path,
    action: &str,
    t: usize,
    statement_order: bool,
    out: &mut dyn Write,
) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let j = resolve_action(&params, action)?;
    let order = if statement_order {
        QuantifierOrder::PerCompetitor
    } else {
        QuantifierOrder::SingleFeature
    };
    let b = implementability_horizon_with(&params, j, t, order)?;
    if !b.feasible {
        writeln!(out, "feasible: false")?;
        return Ok(());
    }
    writeln!(out, "feasible: true")?;
    writeln!(out, "horizon: {}", b.horizon)?;
    writeln!(out, "gap: {}", b.horizon - t)?;
    writeln!(out, "raw_gap: {}", fmt_float(b.raw_gap))?;
    if let Some(m) = b.chosen_feature {
        writeln!(out, "feature: {}", params.feature_names[m])?;
    }
    if let Some(c) = b.binding_competitor {
        writeln!(out, "binding_competitor: {}", params.action_names[c])?;
    }
    writeln!(out, "verified: {}", b.verified)?;
    Ok(())
}

pub fn bounds_effort_level(scenario: &Path, action: &str, effort: f64, out: &mut dyn Write) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let j = resolve_action(&params, action)?;
    let b = effort_level_horizon(&params, j, effort)?;
    writeln!(out, "horizon: {}", b.horizon)?;
    writeln!(out, "raw: {}", fmt_float(b.raw_gap))?;
    if let Some(m) = b.chosen_feature {
        writeln!(out, "feature: {}", params.feature_names[m])?;
    }
    writeln!(out, "verified: {}", b.verified)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FigureKind {
    Regions,
    OmegaSweep,
    Classroom,
}

impl FigureKind {
    pub fn file_name(self) -> &'static str {
        match self {
            FigureKind::Regions => "regions.csv",
            FigureKind::OmegaSweep => "omega_sweep.csv",
            FigureKind::Classroom => "classroom.csv",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FigureOptions {
    pub out_dir: PathBuf,
    pub horizons: Vec<usize>,
    pub grid_k: usize,
    pub action: String,
    pub t: usize,
    pub omega_steps: usize,
}

pub fn figures(kind: FigureKind, scenario: &Path, opts: &FigureOptions, out: &mut dyn Write) -> CliResult {
    let (params, _) = parse_scenario(scenario)?;
    let data = match kind {
        FigureKind::Regions => {
            let j = resolve_action(&params, &opts.action)?;
            figures::regions(&params, &opts.horizons, opts.grid_k, j)?
        }
        FigureKind::OmegaSweep => {
            let j = resolve_action(&params, &opts.action)?;
            figures::omega_sweep(&params, j, opts.t, opts.omega_steps)?
        }
        FigureKind::Classroom => figures::trajectory(&params, &AssessmentPolicy::uniform(params.n(), params.horizon))?,
    };
    std::fs::create_dir_all(&opts.out_dir)?;
    let path = opts.out_dir.join(kind.file_name());
    data.write_file(&path)?;
    writeln!(out, "wrote {} ({} rows)", path.display(), data.rows.len())?;
    Ok(())
}
