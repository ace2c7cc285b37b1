//! The `gridplan` command line.
//!
//! Exit codes: 0 success, 1 I/O failure while writing outputs, 2 invalid
//! input, 3 solver failure, 4 study finished with failed cases.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gridplan_core::data::{Availability, SystemSpec, TechClass};
use gridplan_core::lp::SolveOptions;
use gridplan_core::model::{build, BuildOptions, ModelArtifacts};
use gridplan_core::solution::solve_plan;
use thiserror::Error;

use crate::config::{format_co2, load_system_with, parse_co2, write_system, ConfigError, LoadOptions};
use crate::dataset::default_system;
use crate::io::{export_mps_named, write_atomic};
use crate::manifest::RunManifest;
use crate::results::{summary_csv, ScenarioResult};
use crate::scenario::{run_study, StudyError, StudyKind, StudyPlan};

#[derive(Debug, Parser)]
#[command(name = "gridplan", version, about = "Capacity expansion planning with hourly dispatch")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and check a system, then print its technologies.
    Validate(SystemArgs),
    /// Build and solve one planning model.
    Run(RunArgs),
    /// Run a batch study.
    Study(StudyArgs),
    /// Write a system, including its time series, as config and CSV files.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// System config file; the bundled reference system when omitted.
    #[arg(long, env = "GRIDPLAN_CONFIG")]
    pub config: Option<PathBuf>,
    /// Replace the configured years by this many synthetic years.
    #[arg(long)]
    pub synthetic_years: Option<usize>,
    /// Seed for --synthetic-years.
    #[arg(long, default_value_t = 2050)]
    pub seed: u64,
    /// Model only this many consecutive hours of each year.
    #[arg(long)]
    pub hours: Option<usize>,
    /// First hour of the modeled window.
    #[arg(long, default_value_t = 0)]
    pub start_hour: usize,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    /// Simplex iteration limit per LP.
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl SolverArgs {
    pub fn options(&self) -> SolveOptions {
        let mut o = SolveOptions::default();
        if let Some(n) = self.max_iterations {
            o.max_iterations = n;
        }
        o
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Plan for a single year.
    #[arg(long, conflicts_with = "all_years")]
    pub year: Option<String>,
    /// Plan over every year at its configured weight (the default).
    #[arg(long)]
    pub all_years: bool,
    /// CO2 policy: `none`, `total=T` (t/yr) or `intensity=I` (g/kWh).
    #[arg(long)]
    pub co2: Option<String>,
    /// Directory for result.json, summary.csv and manifest.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the LP as MPS to this file and exit without solving.
    #[arg(long)]
    pub export_mps: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, value_enum)]
    pub study: StudyKind,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Comma-separated year labels; all years when omitted.
    #[arg(long, value_delimiter = ',')]
    pub years: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Solve(String),
    #[error("{0}")]
    Output(String),
    #[error("{failed} of {total} cases failed, see {}", path.display())]
    Partial {
        failed: usize,
        total: usize,
        path: PathBuf,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output(_) => 1,
            CliError::Config(ConfigError::Io { .. }) | CliError::Config(_) | CliError::Invalid(_) => 2,
            CliError::Solve(_) => 3,
            CliError::Partial { .. } => 4,
        }
    }
}

impl From<StudyError> for CliError {
    fn from(e: StudyError) -> Self {
        match e {
            StudyError::Invalid(m) => CliError::Invalid(m),
            e @ StudyError::Io { .. } => CliError::Output(e.to_string()),
        }
    }
}

fn output_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("{}: {e}", path.display()))
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let command_line = std::env::args().collect::<Vec<_>>().join(" ");
    match execute(&cli.command, &command_line) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs `command` and returns what it prints on success.
pub fn execute(command: &Command, command_line: &str) -> Result<String, CliError> {
    match command {
        Command::Validate(a) => validate(a),
        Command::Run(a) => run(a, command_line),
        Command::Study(a) => study(a, command_line),
        Command::Synth(a) => synth(a),
    }
}

/// Loads the system and applies the hour window.
pub fn load(a: &SystemArgs) -> Result<SystemSpec, CliError> {
    let opts = LoadOptions {
        synthetic_years: a.synthetic_years.map(|n| (n, a.seed)),
    };
    if a.synthetic_years == Some(0) {
        return Err(CliError::Invalid("--synthetic-years must be >= 1".into()));
    }
    let spec = match &a.config {
        Some(p) => load_system_with(p, opts)?,
        None => default_system(opts)?,
    };
    let full = spec.hours();
    match a.hours {
        None if a.start_hour == 0 => Ok(spec),
        hours => {
            let hours = hours.unwrap_or(full - a.start_hour.min(full));
            if hours == 0 || a.start_hour + hours > full {
                return Err(CliError::Invalid(format!(
                    "hour window {}..{} outside the {full} modeled hours",
                    a.start_hour,
                    a.start_hour + hours
                )));
            }
            Ok(spec.window(a.start_hour, hours))
        }
    }
}

fn class_name(c: TechClass) -> &'static str {
    match c {
        TechClass::Thermal => "thermal",
        TechClass::Vre => "vre",
        TechClass::HydroReservoir => "hydro_reservoir",
        TechClass::Storage => "storage",
    }
}

fn validate(a: &SystemArgs) -> Result<String, CliError> {
    let spec = load(a)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:<16} {:>12} {:>12} {:>10}",
        "technology", "class", "existing_mw", "max_mw", "avail"
    );
    for t in &spec.technologies {
        let max = t.max_capacity.map_or_else(|| "-".to_string(), |m| format!("{m:.0}"));
        let avail = match t.availability {
            Availability::Constant(v) => format!("{v:.3}"),
            Availability::Hourly => {
                let mean = spec
                    .years
                    .iter()
                    .filter_map(|y| y.availability.get(&t.name))
                    .map(|p| p.values.iter().sum::<f64>() / p.values.len().max(1) as f64)
                    .sum::<f64>()
                    / spec.years.len() as f64;
                format!("{mean:.3}h")
            }
        };
        let _ = writeln!(
            out,
            "{:<28} {:<16} {:>12.0} {:>12} {:>10}",
            t.name,
            class_name(t.class),
            t.existing_capacity,
            max,
            avail
        );
    }
    let _ = writeln!(
        out,
        "{} technologies, {} demand years, {} hours, co2 {}",
        spec.technologies.len(),
        spec.years.len(),
        spec.hours(),
        format_co2(spec.co2_policy)
    );
    Ok(out)
}

fn build_run(spec: &SystemSpec, a: &RunArgs) -> Result<(ModelArtifacts, String), CliError> {
    let (years, case) = match &a.year {
        Some(label) => {
            let y = spec
                .year_index(label)
                .ok_or_else(|| CliError::Invalid(format!("unknown year `{label}`")))?;
            (vec![(y, 1.0)], label.clone())
        }
        None => {
            let years: Vec<(usize, f64)> =
                spec.years.iter().enumerate().map(|(y, d)| (y, d.weight)).collect();
            (years, "all_years".to_string())
        }
    };
    let model = build(spec, &years, &BuildOptions::default())
        .map_err(|e| CliError::Invalid(e.to_string()))?;
    Ok((model, case))
}

fn run(a: &RunArgs, command_line: &str) -> Result<String, CliError> {
    let mut spec = load(&a.system)?;
    if let Some(c) = &a.co2 {
        spec.co2_policy = parse_co2(c)?;
    }
    let (model, case) = build_run(&spec, a)?;
    if let Some(path) = &a.export_mps {
        export_mps_named(&model.lp, &model.vars.names, &model.row_names, path)
            .map_err(|e| CliError::Output(e.to_string()))?;
        return Ok(format!(
            "wrote {} ({} rows, {} columns)\n",
            path.display(),
            model.lp.num_rows(),
            model.lp.num_vars()
        ));
    }
    let opts = a.solver.options();
    let sol = solve_plan(&model, &opts).map_err(|e| CliError::Solve(e.to_string()))?;
    let result = ScenarioResult::from_solution("run", &case, &spec, &sol)
        .map_err(|e| CliError::Solve(e.to_string()))?;
    if let Some(dir) = &a.out {
        result.write(dir).map_err(output_err(dir))?;
        let summary = dir.join("summary.csv");
        write_atomic(&summary, &summary_csv(std::slice::from_ref(&result), &spec))
            .map_err(output_err(&summary))?;
        RunManifest::new(&spec, command_line, vec![case.clone()], &opts, 1)
            .write(dir)
            .map_err(output_err(dir))?;
    }
    Ok(report(&result, &spec))
}

fn report(r: &ScenarioResult, spec: &SystemSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "case {}: {:?}, {} iterations", r.case_id, r.status, r.iterations);
    let _ = writeln!(out, "objective {}", r.objective);
    let _ = writeln!(out, "{:<28} {:>14} {:>10}", "technology", "capacity_mw", "share");
    for t in &spec.technologies {
        let _ = writeln!(
            out,
            "{:<28} {:>14.1} {:>10.4}",
            t.name, r.net_capacity[&t.name], r.energy_shares[&t.name]
        );
    }
    let c = &r.cost;
    let _ = writeln!(
        out,
        "total cost {:.1} (investment {:.1}, fixed O&M {:.1}, operating {:.1})",
        c.total,
        c.investment,
        c.fixed_om,
        c.operating()
    );
    let _ = writeln!(out, "average energy cost {:.3} per MWh", c.average_energy_cost);
    let _ = writeln!(
        out,
        "emissions {:.1} t, {:.2} g/kWh",
        r.emissions.total, r.emissions.intensity
    );
    let _ = writeln!(out, "energy not served {:.3} MWh", r.ens_mwh);
    out
}

fn study(a: &StudyArgs, command_line: &str) -> Result<String, CliError> {
    let spec = load(&a.system)?;
    let mut plan = StudyPlan::new(a.study, &a.out);
    plan.jobs = a.jobs;
    plan.years = a.years.clone();
    plan.command = command_line.to_string();
    plan.solve = a.solver.options();
    let out = run_study(&spec, &plan)?;
    if !out.failures.is_empty() {
        return Err(CliError::Partial {
            failed: out.failures.len(),
            total: out.failures.len() + out.results.len(),
            path: out.dir.join("failures.json"),
        });
    }
    Ok(format!(
        "{} cases written to {}\n",
        out.results.len(),
        out.dir.display()
    ))
}

fn synth(a: &SynthArgs) -> Result<String, CliError> {
    let spec = load(&a.system)?;
    let path = write_system(&spec, &a.out).map_err(|e| match e {
        ConfigError::Io { .. } => CliError::Output(e.to_string()),
        e => CliError::Config(e),
    })?;
    Ok(format!("wrote {}\n", path.display()))
}
