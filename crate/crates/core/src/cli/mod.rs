//! Command-line front end: `simulate`, `analyze`, `threshold` and `sweep`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 model-regime error (mosquito collapse, no disease-free equilibrium).

pub mod output;
pub mod report;
pub mod scenario;
pub mod svg;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::equilibria;
use crate::integrator::integrate;
use crate::model::{mosquito_viability, ControlLevel};
use crate::stability;
use crate::threshold::{self, ControlOutcome};

pub use report::AnalysisReport;
pub use scenario::{Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dengue", version, about = "Dengue host-vector model with adulticide control")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (`key = value` lines).
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub scenario: Option<PathBuf>,

    /// Built-in scenario name (capeverde2009).
    #[arg(long, global = true)]
    pub builtin: Option<String>,

    /// Output directory for CSV, SVG and report files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Also write an SVG chart (simulate only; needs --out).
    #[arg(long, global = true)]
    pub svg: bool,

    /// Bracket tolerance for the control threshold, 1/day.
    #[arg(long, global = true, default_value_t = threshold::DEFAULT_TOLERANCE)]
    pub tol: f64,

    /// Simulation horizon in days.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<f64>,

    /// Constant insecticide level c (overrides the scenario).
    #[arg(long, global = true)]
    pub control: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the model and export the trajectory.
    Simulate,
    /// Report viability, R0, equilibria, stability and the control threshold.
    Analyze,
    /// Minimum constant control with R0 < 1.
    Threshold,
    /// R0 and disease-free stability over a grid of control levels.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long = "c-min", default_value_t = 0.0)]
    pub c_min: f64,
    #[arg(long = "c-max", default_value_t = 0.3)]
    pub c_max: f64,
    #[arg(long = "c-step", default_value_t = 0.05)]
    pub c_step: f64,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Scenario(ScenarioError),
    Model(crate::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Scenario(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Model(e) => e.exit_code(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Scenario(e) => write!(f, "scenario error: {e}"),
            CliError::Model(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<ScenarioError> for CliError {
    fn from(e: ScenarioError) -> Self {
        CliError::Scenario(e)
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::Model(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Parses `args` (including the program name) and runs the command, writing
/// normal output to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn load_scenario(cli: &Cli) -> Result<Scenario, CliError> {
    let mut s = match (&cli.scenario, &cli.builtin) {
        (Some(path), None) => Scenario::from_file(path)?,
        (None, Some(name)) => Scenario::builtin(name)?,
        (None, None) => {
            return Err(CliError::Usage(
                "one of --scenario <path> or --builtin <name> is required".into(),
            ))
        }
        (Some(_), Some(_)) => return Err(CliError::Usage("--scenario and --builtin are exclusive".into())),
    };
    if let Some(c) = cli.control {
        s.control = ControlLevel::new(c)?;
    }
    if let Some(t_end) = cli.t_end {
        s.solver.t_end = t_end;
    }
    s.validate()?;
    Ok(s)
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let scenario = load_scenario(cli)?;
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
    }
    match &cli.command {
        Command::Simulate => simulate(cli, &scenario, out, err),
        Command::Analyze => analyze(cli, &scenario, out),
        Command::Threshold => threshold_cmd(cli, &scenario, out),
        Command::Sweep(args) => sweep(cli, &scenario, args, out),
    }
}

fn simulate(cli: &Cli, s: &Scenario, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    if cli.svg && cli.out.is_none() {
        return Err(CliError::Usage("--svg needs --out <dir>".into()));
    }
    let tr = integrate(&s.params, s.control, &s.initial, &s.solver)?;
    let csv = output::render_trajectory(&tr);
    match &cli.out {
        Some(dir) => {
            let path = dir.join("trajectory.csv");
            output::write_atomic(&path, &csv)?;
            writeln!(err, "wrote {}", path.display())?;
            if cli.svg {
                let title = format!("{} (c = {})", s.name, s.control.value());
                let path = dir.join("trajectory.svg");
                output::write_atomic(&path, &svg::render_trajectory_svg(&tr, &title))?;
                writeln!(err, "wrote {}", path.display())?;
            }
        }
        None => out.write_all(csv.as_bytes())?,
    }
    writeln!(
        err,
        "{} accepted / {} rejected steps",
        tr.step_stats.accepted, tr.step_stats.rejected
    )?;
    Ok(())
}

fn analyze(cli: &Cli, s: &Scenario, out: &mut dyn Write) -> Result<(), CliError> {
    let report = AnalysisReport::build(&s.name, &s.params, s.control, cli.tol)?;
    let text = report.render_text();
    out.write_all(text.as_bytes())?;
    if let Some(dir) = &cli.out {
        output::write_atomic(&dir.join("analysis.txt"), &text)?;
        output::write_atomic(&dir.join("analysis.json"), &report.to_json())?;
    }
    Ok(())
}

fn threshold_cmd(cli: &Cli, s: &Scenario, out: &mut dyn Write) -> Result<(), CliError> {
    let text = match threshold::min_control(&s.params, cli.tol)? {
        ControlOutcome::Threshold(t) => format!(
            "c* = {:.6}\nR0(c*) = {}\nbracket = [{}, {}] (width {:e})\niterations = {}\ncollapse bound = {}\n",
            t.c_star,
            t.r0_at_c_star,
            t.bracket.0,
            t.bracket.1,
            t.bracket.1 - t.bracket.0,
            t.iterations,
            t.collapse_bound
        ),
        ControlOutcome::NoControlNeeded { r0_uncontrolled } => match r0_uncontrolled {
            Some(r0) => format!("no control needed (R0 = {r0} < 1 without control)\n"),
            None => "no control needed (mosquito population collapses without control)\n".to_string(),
        },
        ControlOutcome::Unattainable { collapse_bound } => {
            format!("unattainable: R0 >= 1 for every c below the collapse bound {collapse_bound}\n")
        }
    };
    emit(cli, "threshold.txt", &text, out)
}

pub const SWEEP_HEADER: &str = "c,R0,stable";

fn sweep(cli: &Cli, s: &Scenario, args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let grid = threshold::uniform_grid(args.c_min, args.c_max, args.c_step)?;
    let profile = threshold::r0_profile(&s.params, &grid)?;
    let mut csv = format!("{SWEEP_HEADER}\n");
    for point in profile {
        let c = ControlLevel::new(point.c)?;
        match point.r0 {
            Some(r0) if mosquito_viability(&s.params, c) > 0.0 => {
                let eq = equilibria::brdfe(&s.params, c)?;
                let report = stability::classify(&s.params, c, &eq)?;
                let label = match report.classification {
                    stability::Classification::AsymptoticallyStable => "stable",
                    stability::Classification::Unstable => "unstable",
                    stability::Classification::Marginal => "marginal",
                };
                csv.push_str(&format!("{},{},{}\n", point.c, r0, label));
            }
            _ => csv.push_str(&format!("{},NA,collapse\n", point.c)),
        }
    }
    emit(cli, "sweep.csv", &csv, out)
}

fn emit(cli: &Cli, file: &str, text: &str, out: &mut dyn Write) -> Result<(), CliError> {
    out.write_all(text.as_bytes())?;
    if let Some(dir) = &cli.out {
        output::write_atomic(&Path::new(dir).join(file), text)?;
    }
    Ok(())
}
