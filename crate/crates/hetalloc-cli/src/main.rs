//! `hetalloc` — command-line front end for the area-allocation solvers.
//!
//! Subcommands cover single solves, sweeps over the constant-power
//! fraction, two-unit energy curves, the large-power limit check, the
//! facility-level sweep, and an exhaustive-oracle cross-check. Results
//! land as CSV tables (and optionally SVG figures) in `--out`.
//!
//! Exit codes: 0 success, 2 config/validation error, 3 solver
//! non-convergence or a failed correctness check, 4 I/O error.

mod config;
mod csvout;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use hetalloc::{
    curve_energy_vs_allocation, datacenter_sweep, default_s_grid, delay_objective,
    energy_objective, kkt_residual, limit_check, solve, sweep_psys, verify, ObjectiveKind,
    ObjectiveSpec, OracleMode, Scenario, SolverError, SolverSettings,
};

use csvout::fmt12;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    CheckFailed(String),
}

impl From<hetalloc::ObjectiveError> for AppError {
    fn from(e: hetalloc::ObjectiveError) -> Self {
        AppError::Solver(SolverError::Objective(e))
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 2,
            AppError::Solver(SolverError::NoConvergence { .. }) => 3,
            AppError::Solver(_) => 2,
            AppError::Io { .. } => 4,
            AppError::CheckFailed(_) => 3,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "hetalloc",
    version,
    about = "Delay- and energy-optimal allocation of a shared area budget \
             among heterogeneous computational units"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario for one objective and write the result row.
    Solve(SolveArgs),
    /// Sweep the energy-optimal allocation over constant-power fractions.
    Sweep(SweepArgs),
    /// Sample normalized energy-vs-allocation curves (two-unit systems).
    Curve(CurveArgs),
    /// Check convergence to the delay optimum as constant power grows.
    LimitCheck(LimitCheckArgs),
    /// Sweep the facility-level optimum over constant power draws.
    Datacenter(DatacenterArgs),
    /// Solve, then cross-check against the brute-force grid oracle.
    OracleCheck(OracleCheckArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArgs {
    /// Built-in scenario: "hpc" or "multi-accel".
    #[arg(long)]
    preset: Option<String>,
    /// Path to a JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, AppError> {
        config::load_scenario(self.preset.as_deref(), self.config.as_deref())
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory for tables and figures (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write the SVG figure for this command.
    #[arg(long)]
    plot: bool,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ObjectiveArg {
    Delay,
    Energy,
    Datacenter,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Objective to minimize (default: the scenario's own setting).
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Constant-power fraction s in [0, 1).
    #[arg(long)]
    s: Option<f64>,
    /// Absolute constant power (alternative to --s).
    #[arg(long, conflicts_with = "s")]
    psys: Option<f64>,
    /// Constant facility power draw (datacenter objective).
    #[arg(long, conflicts_with_all = ["s", "psys"])]
    pconst: Option<f64>,
    /// Dynamic-power weight w >= 1 (datacenter objective).
    #[arg(long)]
    w: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated constant-power fractions in [0, 1), ascending
    /// (default: 33 log-spaced values plus the landmark fractions).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    s: Vec<f64>,
}

#[derive(Args)]
struct CurveArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated constant-power fractions in [0, 1), ascending.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.02, 0.1, 0.4, 0.95])]
    s: Vec<f64>,
    /// Samples per curve (at least 16).
    #[arg(long, default_value_t = 256)]
    points: usize,
}

#[derive(Args)]
struct LimitCheckArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Comma-separated increasing ladder of constant power values.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![10.0, 100.0, 1000.0, 10000.0])]
    psys: Vec<f64>,
}

#[derive(Args)]
struct DatacenterArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Dynamic-power weight w >= 1.
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    /// Comma-separated constant power draws, ascending.
    #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0])]
    pconst: Vec<f64>,
}

#[derive(Args)]
struct OracleCheckArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Objective to check (default: the scenario's own setting).
    #[arg(long, value_enum)]
    objective: Option<ObjectiveArg>,
    /// Constant-power fraction s in [0, 1).
    #[arg(long)]
    s: Option<f64>,
    /// Absolute constant power (alternative to --s).
    #[arg(long, conflicts_with = "s")]
    psys: Option<f64>,
    /// Constant facility power draw (datacenter objective).
    #[arg(long, conflicts_with_all = ["s", "psys"])]
    pconst: Option<f64>,
    /// Dynamic-power weight w >= 1 (datacenter objective).
    #[arg(long)]
    w: Option<f64>,
    /// Oracle grid step (default: budget / 200).
    #[arg(long)]
    grid_step: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<String, AppError> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Curve(args) => cmd_curve(args),
        Command::LimitCheck(args) => cmd_limit_check(args),
        Command::Datacenter(args) => cmd_datacenter(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<PathBuf, AppError> {
    std::fs::create_dir_all(dir).map_err(|source| AppError::Io {
        context: format!("creating output directory {}", dir.display()),
        source,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|source| AppError::Io {
        context: format!("writing {}", path.display()),
        source,
    })?;
    Ok(path)
}

fn unit_names(scenario: &Scenario) -> Vec<String> {
    scenario.units.iter().map(|u| u.name.clone()).collect()
}

fn fraction_to_power(scenario: &Scenario, s: f64) -> Result<f64, AppError> {
    if !(0.0..1.0).contains(&s) {
        return Err(AppError::Config(format!("--s {s} is outside [0, 1)")));
    }
    Ok(s / (1.0 - s) * scenario.reference_power())
}

/// Resolve the objective and its constant-power parameter from the flags,
/// falling back to the scenario's own objective and system-power setting.
fn resolve_objective(
    scenario: &Scenario,
    objective: Option<ObjectiveArg>,
    s: Option<f64>,
    psys: Option<f64>,
    pconst: Option<f64>,
) -> Result<ObjectiveSpec, AppError> {
    let kind = objective.unwrap_or(match scenario.objective {
        ObjectiveKind::Delay => ObjectiveArg::Delay,
        ObjectiveKind::Energy => ObjectiveArg::Energy,
        ObjectiveKind::Datacenter => ObjectiveArg::Datacenter,
    });
    match kind {
        ObjectiveArg::Delay => {
            if s.is_some() || psys.is_some() || pconst.is_some() {
                return Err(AppError::Config(
                    "--s/--psys/--pconst do not apply to the delay objective".into(),
                ));
            }
            Ok(ObjectiveSpec::Delay)
        }
        ObjectiveArg::Energy => {
            if pconst.is_some() {
                return Err(AppError::Config(
                    "--pconst applies to the datacenter objective; use --s or --psys".into(),
                ));
            }
            let p = match (s, psys) {
                (Some(s), _) => fraction_to_power(scenario, s)?,
                (None, Some(p)) => p,
                (None, None) => scenario.p_sys(),
            };
            if p < 0.0 || p.is_nan() {
                return Err(AppError::Config(format!(
                    "constant power {p} must be nonnegative"
                )));
            }
            Ok(ObjectiveSpec::Energy { p_sys: p })
        }
        ObjectiveArg::Datacenter => {
            let p = match (pconst, s) {
                (Some(p), _) => p,
                (None, Some(s)) => fraction_to_power(scenario, s)?,
                (None, None) => match psys {
                    Some(p) => p,
                    None => scenario.p_sys(),
                },
            };
            if p < 0.0 || p.is_nan() {
                return Err(AppError::Config(format!(
                    "constant power {p} must be nonnegative"
                )));
            }
            Ok(ObjectiveSpec::Datacenter { p_const: p })
        }
    }
}

fn spec_label(spec: &ObjectiveSpec) -> &'static str {
    match spec {
        ObjectiveSpec::Delay => "delay",
        ObjectiveSpec::Energy { .. } => "energy",
        ObjectiveSpec::Datacenter { .. } => "datacenter",
    }
}

/// `(s, p_sys)` columns for a spec: the delay objective has no power
/// parameter, shown as `inf` like the sweep tables' reference row.
fn spec_columns(scenario: &Scenario, spec: &ObjectiveSpec) -> (f64, f64) {
    match *spec {
        ObjectiveSpec::Delay => (f64::INFINITY, f64::INFINITY),
        ObjectiveSpec::Energy { p_sys: p } | ObjectiveSpec::Datacenter { p_const: p } => {
            (p / (p + scenario.reference_power()), p)
        }
    }
}

fn cmd_solve(args: SolveArgs) -> Result<String, AppError> {
    let mut scenario = args.scenario.load()?;
    if let Some(w) = args.w {
        scenario.dynamic_weight = w;
    }
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let spec = resolve_objective(&scenario, args.objective, args.s, args.psys, args.pconst)?;
    let result = solve(&scenario, &spec, &settings)?;
    let (s_col, p_col) = spec_columns(&scenario, &spec);
    let csv = csvout::solve_csv(
        &unit_names(&scenario),
        s_col,
        p_col,
        &result.areas,
        result.objective_value,
        result.max_marginal_residual,
    );
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(&args.output.out, "solve.csv", &csv)?;
    Ok(format!(
        "solve [{}] {} objective = {} | residual = {} | {}",
        scenario_label(&scenario),
        spec_label(&spec),
        fmt12(result.objective_value),
        fmt12(result.max_marginal_residual),
        path.display()
    ))
}

fn scenario_label(scenario: &Scenario) -> String {
    unit_names(scenario).join("+")
}

fn report_failures(failures: &[hetalloc::SweepFailure]) {
    for f in failures {
        eprintln!(
            "warning: point s={} (p={}) failed: {}",
            f.s, f.p_sys, f.message
        );
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<String, AppError> {
    let scenario = args.scenario.load()?;
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let grid = if args.s.is_empty() {
        default_s_grid()
    } else {
        args.s.clone()
    };
    let table = sweep_psys(&scenario, &grid, &settings)?;
    report_failures(&table.failures);
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(&args.output.out, "sweep.csv", &csvout::sweep_csv(&table))?;
    let mut written = format!("{}", path.display());
    if args.output.plot {
        let (name, body) = if scenario.unit_count() == 2 {
            ("fig4.svg", svg::fig4_lines(&table))
        } else {
            ("fig6.svg", svg::fig6_stacked(&table))
        };
        let fig = write_out(&args.output.out, name, &body)?;
        written.push_str(&format!(", {}", fig.display()));
    }
    Ok(format!(
        "sweep [{}] {} rows ({} failed) | {}",
        table.scenario_label,
        table.rows.len(),
        table.failures.len(),
        written
    ))
}

fn cmd_curve(args: CurveArgs) -> Result<String, AppError> {
    let scenario = args.scenario.load()?;
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let table = curve_energy_vs_allocation(&scenario, &args.s, args.points, &settings)?;
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(&args.output.out, "curve.csv", &csvout::curve_csv(&table))?;
    let mut written = format!("{}", path.display());
    if args.output.plot {
        let fig = write_out(&args.output.out, "fig3.svg", &svg::fig3_curves(&table))?;
        written.push_str(&format!(", {}", fig.display()));
    }
    let argmins: Vec<String> = table
        .curves
        .iter()
        .map(|c| format!("s={} -> {}", fmt12(c.s), fmt12(c.argmin_area)))
        .collect();
    Ok(format!(
        "curve [{}] argmin {}: {} | {}",
        table.scenario_label,
        table.x_name,
        argmins.join(", "),
        written
    ))
}

fn cmd_limit_check(args: LimitCheckArgs) -> Result<String, AppError> {
    let scenario = args.scenario.load()?;
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let report = limit_check(&scenario, &args.psys, &settings)?;
    // The library report carries areas and gaps; recompute the rows'
    // objective values and residuals for the table.
    let mut objectives = Vec::with_capacity(report.rungs.len());
    for rung in &report.rungs {
        let spec = ObjectiveSpec::Energy { p_sys: rung.p_sys };
        let objective = energy_objective(&scenario, &rung.areas, rung.p_sys)?;
        let residual = kkt_residual(&scenario, &rung.areas, &spec)?;
        objectives.push((objective, residual));
    }
    let delay_row = (
        delay_objective(&scenario, &report.delay_areas)?,
        kkt_residual(&scenario, &report.delay_areas, &ObjectiveSpec::Delay)?,
    );
    let csv = csvout::limit_csv(
        &unit_names(&scenario),
        &report,
        scenario.reference_power(),
        &objectives,
        delay_row,
    );
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(&args.output.out, "limit_check.csv", &csv)?;
    let verdict = format!(
        "limit-check [{}] {}: final gap = {} ({} rungs, nonincreasing: {}) | {}",
        scenario_label(&scenario),
        if report.pass { "PASS" } else { "FAIL" },
        fmt12(report.final_gap),
        report.rungs.len(),
        report.nonincreasing,
        path.display()
    );
    if report.pass {
        Ok(verdict)
    } else {
        Err(AppError::CheckFailed(verdict))
    }
}

fn cmd_datacenter(args: DatacenterArgs) -> Result<String, AppError> {
    let scenario = args.scenario.load()?;
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let table = datacenter_sweep(&scenario, args.w, &args.pconst, &settings)?;
    report_failures(&table.failures);
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(
        &args.output.out,
        "datacenter.csv",
        &csvout::sweep_csv(&table),
    )?;
    let mut written = format!("{}", path.display());
    if args.output.plot {
        let (name, body) = if scenario.unit_count() == 2 {
            ("fig4.svg", svg::fig4_lines(&table))
        } else {
            ("fig6.svg", svg::fig6_stacked(&table))
        };
        let fig = write_out(&args.output.out, name, &body)?;
        written.push_str(&format!(", {}", fig.display()));
    }
    Ok(format!(
        "datacenter [{}] w={} {} rows ({} failed) | {}",
        table.scenario_label,
        args.w,
        table.rows.len(),
        table.failures.len(),
        written
    ))
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<String, AppError> {
    let mut scenario = args.scenario.load()?;
    if let Some(w) = args.w {
        scenario.dynamic_weight = w;
    }
    let settings = SolverSettings::for_budget(scenario.area_budget);
    let spec = resolve_objective(&scenario, args.objective, args.s, args.psys, args.pconst)?;
    let step = args.grid_step.unwrap_or(settings.oracle_grid_step);
    let result = solve(&scenario, &spec, &settings)?;
    let report = verify(&scenario, &result, &spec, OracleMode::Step(step), &settings)?;
    let oracle = report
        .oracle
        .as_ref()
        .expect("oracle mode Step always produces a report");
    let oracle_residual = kkt_residual(&scenario, &oracle.best_areas, &spec)?;
    let (s_col, p_col) = spec_columns(&scenario, &spec);
    let csv = csvout::oracle_csv(
        &unit_names(&scenario),
        s_col,
        p_col,
        (
            &result.areas,
            result.objective_value,
            result.max_marginal_residual,
        ),
        (&oracle.best_areas, oracle.best_value, oracle_residual),
    );
    config::dump_to(&args.output.out, &scenario)?;
    let path = write_out(&args.output.out, "oracle_check.csv", &csv)?;
    let verdict = format!(
        "oracle-check [{}] {} objective = {} | oracle best = {} | gap = {} (slack {}) | \
         max coord gap = {} (step {}) | {} | {}",
        scenario_label(&scenario),
        spec_label(&spec),
        fmt12(result.objective_value),
        fmt12(oracle.best_value),
        fmt12(oracle.gap),
        fmt12(oracle.slack),
        fmt12(oracle.max_coordinate_gap),
        fmt12(oracle.grid_step),
        if report.ok { "OK" } else { "MISMATCH" },
        path.display()
    );
    if report.ok {
        Ok(verdict)
    } else {
        Err(AppError::CheckFailed(verdict))
    }
}
