//! JSON scenario files.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stratreg_core::{validate_params, AnnealConfig, CostModel, GameParams, Matrix, ValidationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostModelName {
    FixedBudget,
    Quadratic,
}

impl From<CostModelName> for CostModel {
    fn from(c: CostModelName) -> Self {
        match c {
            CostModelName::FixedBudget => CostModel::FixedBudget,
            CostModelName::Quadratic => CostModel::Quadratic,
        }
    }
}

impl From<CostModel> for CostModelName {
    fn from(c: CostModel) -> Self {
        match c {
            CostModel::FixedBudget => CostModelName::FixedBudget,
            CostModel::Quadratic => CostModelName::Quadratic,
        }
    }
}

/// Optional annealing settings; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Inner radius.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_phase: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk_steps: Option<usize>,
}

impl SolverSettings {
    pub fn apply(&self, config: &mut AnnealConfig) {
        if let Some(v) = self.eps {
            config.epsilon = v;
        }
        if let Some(v) = self.delta {
            config.delta = v;
        }
        if let Some(v) = self.seed {
            config.seed = v;
        }
        if let Some(v) = self.r {
            config.inner_radius = v;
        }
        if self.samples_per_phase.is_some() {
            config.samples_per_phase = self.samples_per_phase;
        }
        if self.walk_steps.is_some() {
            config.walk_steps = self.walk_steps;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub features: Vec<String>,
    pub actions: Vec<String>,
    #[serde(rename = "W")]
    pub w: Vec<Vec<f64>>,
    pub omega_diag: Vec<f64>,
    pub lambda_diag: Vec<f64>,
    pub s0: Vec<f64>,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub cost_model: CostModelName,
    /// Constant added to every round's features; zeros when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_offset: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSettings>,
}

#[derive(Debug)]
pub enum ScenarioError {
    Io { path: String, message: String },
    Parse { line: usize, column: usize, message: String },
    Validation(ValidationReport),
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioError::Io { path, message } => write!(f, "cannot read {path}: {message}"),
            ScenarioError::Parse { line, column, message } => {
                write!(f, "parse error at line {line}, column {column}: {message}")
            }
            ScenarioError::Validation(report) => write!(f, "invalid scenario:\n{report}"),
        }
    }
}

impl std::error::Error for ScenarioError {}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn from_params(name: &str, params: &GameParams) -> Self {
        let offset = &params.feature_offset;
        ScenarioFile {
            name: name.to_string(),
            features: params.feature_names.clone(),
            actions: params.action_names.clone(),
            w: params.w.to_rows(),
            omega_diag: params.omega.clone(),
            lambda_diag: params.lambda.clone(),
            s0: params.s0.clone(),
            horizon: params.horizon,
            cost_model: params.cost_model.into(),
            feature_offset: offset.iter().any(|&o| o != 0.0).then(|| offset.clone()),
            solver: None,
        }
    }

    /// Builds and validates the game.
    pub fn to_params(&self) -> Result<GameParams, ScenarioError> {
        let Some(w) = Matrix::try_from_rows(&self.w) else {
            let mut report = ValidationReport::default();
            report.violations.push(stratreg_core::Violation {
                path: "W".into(),
                message: "rows must be non-empty and of equal length".into(),
            });
            return Err(ScenarioError::Validation(report));
        };
        let n = w.rows();
        let params = GameParams {
            w,
            omega: self.omega_diag.clone(),
            lambda: self.lambda_diag.clone(),
            s0: self.s0.clone(),
            feature_offset: self.feature_offset.clone().unwrap_or_else(|| vec![0.0; n]),
            horizon: self.horizon,
            cost_model: self.cost_model.into(),
            feature_names: self.features.clone(),
            action_names: self.actions.clone(),
        };
        let report = validate_params(&params);
        if report.is_ok() {
            Ok(params)
        } else {
            Err(ScenarioError::Validation(report))
        }
    }

    pub fn anneal_config(&self) -> AnnealConfig {
        let mut config = AnnealConfig::default();
        if let Some(s) = &self.solver {
            s.apply(&mut config);
        }
        config
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioFile, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ScenarioFile::from_json(&text)
}

/// Reads, parses and validates a scenario.
pub fn parse_scenario(path: &Path) -> Result<(GameParams, ScenarioFile), ScenarioError> {
    let file = load_scenario(path)?;
    Ok((file.to_params()?, file))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSROOM: &str = include_str!("../../../scenarios/classroom.json");

    #[test]
    fn bundled_classroom() {
        let file = ScenarioFile::from_json(CLASSROOM).unwrap();
        assert_eq!(file.to_params().unwrap(), GameParams::classroom(3));
    }

    #[test]
    fn zero_horizon_is_a_validation_error() {
        let text = CLASSROOM.replace("\"T\": 3", "\"T\": 0");
        let err = ScenarioFile::from_json(&text).unwrap().to_params().unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(r) if r.violations[0].path == "T"));
    }

    #[test]
    fn unknown_field_is_a_parse_error() {
        let text = CLASSROOM.replacen('{', "{\n  \"foo\": 1,", 1);
        let err = ScenarioFile::from_json(&text).unwrap_err();
        assert!(matches!(err, ScenarioError::Parse { line: 2, .. }), "{err}");
        let text = CLASSROOM.replace("\"seed\": 7", "\"seed\": 7, \"foo\": 1");
        assert!(ScenarioFile::from_json(&text).is_err());
    }

    #[test]
    fn ragged_matrix() {
        let text = CLASSROOM.replace("[0, 1, 3]", "[0, 1]");
        assert!(matches!(
            ScenarioFile::from_json(&text).unwrap().to_params(),
            Err(ScenarioError::Validation(_))
        ));
    }

    #[test]
    fn solver_block() {
        let file = ScenarioFile::from_json(CLASSROOM).unwrap();
        let config = file.anneal_config();
        assert_eq!((config.epsilon, config.delta, config.seed), (0.05, 0.2, 7));
    }
}
