//! Scenario files, CSV export and command implementations for the
//! `stratreg` binary.

pub mod commands;
pub mod figures;
pub mod scenario;
pub mod table;

pub use commands::{CliError, EXIT_INPUT, EXIT_OK, EXIT_SOLVER};
pub use scenario::{load_scenario, parse_scenario, ScenarioError, ScenarioFile, SolverSettings};
pub use table::{fmt_float, FigureDataset};
