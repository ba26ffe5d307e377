use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use stratreg_cli::commands::{self, FigureKind, FigureOptions, Method, SolveOptions};
use stratreg_cli::CliError;

/// Stackelberg solver for the stateful strategic-regression game.
#[derive(Parser)]
#[command(name = "stratreg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a scenario file.
    Validate { scenario: PathBuf },
    /// Agent best response to an assessment policy (JSON array of per-round rules).
    BestResponse {
        scenario: PathBuf,
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Domination-LP membership test for an effort policy (JSON array of per-round efforts).
    Membership {
        scenario: PathBuf,
        #[arg(long)]
        efforts: PathBuf,
    },
    /// Recover an assessment policy that incentivizes an effort policy.
    Recover {
        scenario: PathBuf,
        #[arg(long)]
        efforts: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve for the principal's optimal assessment policy.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Overridden by STRAT_SEED when set.
        #[arg(long)]
        seed: Option<u64>,
        /// Inner radius for the annealing walk.
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        samples_per_phase: Option<usize>,
        #[arg(long)]
        walk_steps: Option<usize>,
        #[arg(long, default_value_t = 20)]
        grid_k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form horizon bounds.
    Bounds {
        #[command(subcommand)]
        kind: BoundsCommand,
    },
    /// Write figure datasets as CSV.
    Figures {
        #[arg(value_enum)]
        kind: FigureArg,
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Horizons for the regions figure.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        horizons: Vec<usize>,
        /// Rules are enumerated on the simplex grid of step 1/grid_k.
        #[arg(long, default_value_t = 10)]
        grid_k: usize,
        #[arg(long, default_value = "study")]
        action: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// The sweep uses omega = i/omega_steps for i = 1..=omega_steps.
        #[arg(long, default_value_t = 10)]
        omega_steps: usize,
    },
}

#[derive(Subcommand)]
enum BoundsCommand {
    /// Horizon that makes `action` the best response through round `t`.
    Implementability {
        scenario: PathBuf,
        #[arg(long)]
        action: String,
        #[arg(long, default_value_t = 1)]
        t: usize,
        /// Let each competitor use its own feature (no simulation adjustment).
        #[arg(long)]
        statement_order: bool,
    },
    /// Horizon that accumulates `effort` units of `action` under quadratic cost.
    EffortLevel {
        scenario: PathBuf,
        #[arg(long)]
        action: String,
        #[arg(long)]
        effort: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Anneal,
    Grid,
    Quadratic,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Regions,
    OmegaSweep,
    Classroom,
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { scenario } => commands::validate(&scenario, out),
        Command::BestResponse { scenario, policy, csv } => {
            commands::best_response(&scenario, &policy, csv.as_deref(), out)
        }
        Command::Membership { scenario, efforts } => commands::membership_cmd(&scenario, &efforts, out),
        Command::Recover { scenario, efforts, csv } => commands::recover(&scenario, &efforts, csv.as_deref(), out),
        Command::Solve {
            scenario,
            method,
            eps,
            delta,
            seed,
            r,
            samples_per_phase,
            walk_steps,
            grid_k,
            out: csv,
        } => {
            let opts = SolveOptions {
                method: method.map(|m| match m {
                    MethodArg::Anneal => Method::Anneal,
                    MethodArg::Grid => Method::Grid,
                    MethodArg::Quadratic => Method::Quadratic,
                }),
                eps,
                delta,
                seed,
                env_seed: std::env::var("STRAT_SEED").ok(),
                r,
                samples_per_phase,
                walk_steps,
                grid_k,
                out: csv,
            };
            commands::solve(&scenario, &opts, out)
        }
        Command::Bounds { kind } => match kind {
            BoundsCommand::Implementability {
                scenario,
                action,
                t,
                statement_order,
            } => commands::bounds_implementability(&scenario, &action, t, statement_order, out),
            BoundsCommand::EffortLevel { scenario, action, effort } => {
                commands::bounds_effort_level(&scenario, &action, effort, out)
            }
        },
        Command::Figures {
            kind,
            scenario,
            out: out_dir,
            horizons,
            grid_k,
            action,
            t,
            omega_steps,
        } => {
            let kind = match kind {
                FigureArg::Regions => FigureKind::Regions,
                FigureArg::OmegaSweep => FigureKind::OmegaSweep,
                FigureArg::Classroom => FigureKind::Classroom,
            };
            let opts = FigureOptions {
                out_dir,
                horizons,
                grid_k,
                action,
                t,
                omega_steps,
            };
            commands::figures(kind, &scenario, &opts, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
