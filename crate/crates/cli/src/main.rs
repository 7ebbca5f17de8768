use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rust_decimal::Decimal;

use slice_sla::availability::ObservationWindow;
use slice_sla::contract::{validate_contract, QosCatalog, SlaContract};
use slice_sla::evaluate::{evaluate, EvaluationOptions};
use slice_sla::io::{
    parse_contract, parse_report, parse_scenario, parse_trace, render_report, sample_curve, write_curve, write_report,
    write_trace,
};
use slice_sla::penalty::{
    compile_linear_schedule, reference_nonlinear_schedule, LinearScheduleParams, ScheduleEvaluation,
};
use slice_sla::simulator::{generate_trace, monte_carlo, run_seed, ExposureSummary};
use slice_sla::time::{parse_timestamp, Timestamp};

#[derive(Parser)]
#[command(
    name = "slicesla",
    version,
    about = "Evaluate network slice SLAs: availability, penalties and economics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a contract against its invariants and the QoS catalog.
    Validate {
        contract: PathBuf,
        /// Replacement QoS catalog (TOML).
        #[arg(long)]
        catalog: Option<PathBuf>,
        /// Write the validation report as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a contract against an event trace.
    Evaluate {
        contract: PathBuf,
        trace: PathBuf,
        #[arg(long, value_parser = timestamp)]
        window_start: Option<Timestamp>,
        #[arg(long, value_parser = timestamp)]
        window_end: Option<Timestamp>,
        /// End assumed for incidents that are still open.
        #[arg(long, value_parser = timestamp)]
        now: Option<Timestamp>,
        /// Write the machine-readable report (JSON).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Sample a penalty schedule as `availability_percent,penalty_percent`.
    Curve {
        /// Contract whose schedule to sample.
        contract: Option<PathBuf>,
        /// Built-in schedule instead of a contract.
        #[arg(long, value_enum, conflicts_with = "contract")]
        schedule: Option<Builtin>,
        /// Step between samples, in percentage points.
        #[arg(long, default_value = "0.1")]
        resolution: Decimal,
        /// Interpolate between breakpoints instead of stepping.
        #[arg(long)]
        interpolated: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo penalty exposure for a contract under a scenario.
    Simulate {
        contract: PathBuf,
        scenario: PathBuf,
        #[arg(long, default_value_t = 1000)]
        runs: u64,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the summary as JSON.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Write the trace of the first run as CSV.
        #[arg(long)]
        emit_trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Render a saved evaluation report.
    Report {
        report: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    ReferenceLinear,
    ReferenceNonlinear,
}

fn timestamp(s: &str) -> Result<Timestamp, String> {
    parse_timestamp(s).map_err(|e| format!("expected an RFC 3339 UTC timestamp: {e}"))
}

/// Failure classes, each with its own exit code.
enum Failure {
    Invalid,
    Parse(anyhow::Error),
    Evaluation(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invalid => 1,
            Failure::Parse(_) => 2,
            Failure::Evaluation(_) => 3,
        }
    }
}

fn parse_err(e: anyhow::Error) -> Failure {
    Failure::Parse(e)
}

fn eval_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Evaluation(e.into())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(parse_err)
}

fn load_contract(path: &Path) -> Result<SlaContract, Failure> {
    let text = read(path)?;
    parse_contract(&text)
        .map_err(|e| anyhow!("{}: {e}", path.display()))
        .map_err(parse_err)
}

fn write_output(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(eval_err)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match output {
        Some(path) => write_output(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate {
            contract,
            catalog,
            output,
        } => {
            let c = load_contract(&contract)?;
            let catalog = match catalog {
                Some(path) => QosCatalog::from_toml_str(&read(&path)?)
                    .map_err(|e| anyhow!("{}: {e}", path.display()))
                    .map_err(parse_err)?,
                None => QosCatalog::reference(),
            };
            let report = validate_contract(&c, &catalog);
            if let Some(path) = output {
                let json = serde_json::to_string_pretty(&report).map_err(eval_err)?;
                write_output(&path, &(json + "\n"))?;
            }
            if report.is_valid() {
                println!("{}: valid", c.id);
                Ok(())
            } else {
                for v in &report.violations {
                    println!("{v}");
                }
                println!("{}: {} violation(s)", c.id, report.len());
                Err(Failure::Invalid)
            }
        }
        Command::Evaluate {
            contract,
            trace,
            window_start,
            window_end,
            now,
            output,
            format,
        } => {
            let c = load_contract(&contract)?;
            let events = parse_trace(&read(&trace)?)
                .map_err(|e| anyhow!("{}: {e}", trace.display()))
                .map_err(parse_err)?;
            let window = match (window_start, window_end) {
                (None, None) => None,
                (start, end) => Some(
                    ObservationWindow::new(start.unwrap_or(c.lifetime.start), end.unwrap_or(c.lifetime.end))
                        .map_err(eval_err)?,
                ),
            };
            let report = evaluate(&c, &events, &EvaluationOptions { window, now }).map_err(eval_err)?;
            let json = write_report(&report);
            if let Some(path) = &output {
                write_output(path, &json)?;
            }
            match format {
                Format::Text => print!("{}", render_report(&report)),
                Format::Json if output.is_none() => print!("{json}"),
                Format::Json => {}
            }
            Ok(())
        }
        Command::Curve {
            contract,
            schedule,
            resolution,
            interpolated,
            output,
        } => {
            let (sched, agreed) = match (contract, schedule) {
                (Some(path), _) => {
                    let c = load_contract(&path)?;
                    let sched = c.base_terms().schedule().map_err(eval_err)?;
                    (sched, c.availability.agreed)
                }
                (None, Some(Builtin::ReferenceLinear)) => (
                    compile_linear_schedule(&LinearScheduleParams::reference()).map_err(eval_err)?,
                    Decimal::ONE,
                ),
                (None, Some(Builtin::ReferenceNonlinear)) => (reference_nonlinear_schedule(), Decimal::ONE),
                (None, None) => {
                    return Err(Failure::Parse(anyhow!("give a contract file or --schedule")));
                }
            };
            let mode = if interpolated {
                ScheduleEvaluation::Interpolated
            } else {
                ScheduleEvaluation::Step
            };
            let points = sample_curve(&sched, agreed, resolution, mode).map_err(eval_err)?;
            emit(&output, &write_curve(&points))
        }
        Command::Simulate {
            contract,
            scenario,
            runs,
            seed,
            output,
            emit_trace,
            format,
        } => {
            let c = load_contract(&contract)?;
            let mut config = parse_scenario(&read(&scenario)?)
                .map_err(|e| anyhow!("{}: {e}", scenario.display()))
                .map_err(parse_err)?;
            if let Some(seed) = seed {
                config.seed = seed;
            }
            if let Some(path) = &emit_trace {
                let first = config.anchored(&c).with_seed(run_seed(config.seed, 0));
                write_output(path, &write_trace(&generate_trace(&first)))?;
            }
            let summary = monte_carlo(&c, &config, runs).map_err(eval_err)?;
            let json = serde_json::to_string_pretty(&summary).map_err(eval_err)? + "\n";
            if let Some(path) = &output {
                write_output(path, &json)?;
            }
            match format {
                Format::Text => print!("{}", render_summary(&summary, &c.currency)),
                Format::Json if output.is_none() => print!("{json}"),
                Format::Json => {}
            }
            Ok(())
        }
        Command::Report { report, format, output } => {
            let parsed = parse_report(&read(&report)?)
                .map_err(|e| anyhow!("{}: {e}", report.display()))
                .map_err(parse_err)?;
            let problems = parsed.consistency_problems();
            if !problems.is_empty() {
                return Err(Failure::Evaluation(anyhow!(
                    "inconsistent report: {}",
                    problems.join("; ")
                )));
            }
            let text = match format {
                Format::Text => render_report(&parsed),
                Format::Json => write_report(&parsed),
            };
            emit(&output, &text)
        }
    }
}

fn render_summary(s: &ExposureSummary, currency: &str) -> String {
    let mut out = String::new();
    let pct = |d: Decimal| (d * Decimal::ONE_HUNDRED).round_dp(4).normalize();
    let _ = writeln!(out, "runs                    {} (seed {})", s.runs, s.seed);
    let _ = writeln!(
        out,
        "mean incidents          {}",
        s.mean_incidents.round_dp(4).normalize()
    );
    let _ = writeln!(out, "mean availability       {}%", pct(s.mean_availability));
    let _ = writeln!(out, "mean formula penalty    {} {currency}", s.mean_total_penalty);
    let _ = writeln!(out, "p95 formula penalty     {} {currency}", s.p95_total_penalty);
    let _ = writeln!(out, "mean penalty charge     {} {currency}", s.mean_penalty_charge);
    let _ = writeln!(out, "p95 penalty charge      {} {currency}", s.p95_penalty_charge);
    let _ = writeln!(out, "early termination       {}%", pct(s.early_termination_frequency));
    let _ = writeln!(out, "mean net position       {} {currency}", s.mean_net_position);
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Invalid => {}
                Failure::Parse(e) => eprintln!("error: {e:#}"),
                Failure::Evaluation(e) => eprintln!("error: {e:#}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
