use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use fleetcg::colgen::{run_column_generation, SolverConfig, SolverMode};
use fleetcg::{generate_instance, read_instance, write_instance, Error, ExpectationMode};
use fleetcg_cli::{summarize, trace_rows, write_series_csv, write_trace_csv, RunReport};

const DEFAULT_SHOTS: usize = 1000;

#[derive(Parser)]
#[command(name = "fleetcg", version, about = "Column generation for fleet conversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance.
    Generate {
        #[arg(long)]
        tours: usize,
        #[arg(long)]
        models: usize,
        /// Allowed models per tour.
        #[arg(long)]
        allowed: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Run column generation on an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Hybrid)]
        mode: Mode,
        /// QUBO penalty; defaults to 10 at 32 tours, 20 at 64, adaptive otherwise.
        #[arg(long)]
        penalty: Option<f64>,
        #[arg(long, value_enum, default_value_t = Expectation::Exact)]
        expectation: Expectation,
        /// Shots per Pauli term in sampled mode.
        #[arg(long)]
        shots: Option<usize>,
        #[arg(long)]
        ga_pop: Option<usize>,
        #[arg(long)]
        ga_iters: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_iterations: Option<usize>,
        /// Report JSON path.
        #[arg(short, long)]
        output: PathBuf,
        /// Trace CSV path; defaults to the report path with a `.csv` extension.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Aggregate run reports by instance size.
    Report {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// Summary JSON path.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Normalized-cost series CSV path.
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Classical,
    Quantum,
    Hybrid,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Expectation {
    Exact,
    Sampled,
}

fn usage_error(message: &str) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, message).exit()
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            tours,
            models,
            allowed,
            seed,
            output,
        } => {
            if tours == 0 || models == 0 {
                usage_error("--tours and --models must be positive");
            }
            if allowed == 0 || allowed > models {
                usage_error("--allowed must lie between 1 and --models");
            }
            let inst = generate_instance(tours, models, allowed, seed)?;
            write_instance(&inst, &output)?;
            Ok(())
        }
        Command::Solve {
            instance,
            mode,
            penalty,
            expectation,
            shots,
            ga_pop,
            ga_iters,
            seed,
            max_iterations,
            output,
            trace,
        } => {
            if shots.is_some() && expectation == Expectation::Exact {
                usage_error("--shots requires --expectation sampled");
            }
            let inst = read_instance(&instance)
                .with_context(|| format!("loading {}", instance.display()))?;
            let mode = match mode {
                Mode::Classical => SolverMode::Classical,
                Mode::Quantum => SolverMode::Quantum,
                Mode::Hybrid => SolverMode::Hybrid,
            };
            let mut config = SolverConfig::for_instance(inst.n_tours(), mode, seed);
            if penalty.is_some() {
                config.penalty = penalty;
            }
            if expectation == Expectation::Sampled {
                config.expectation = ExpectationMode::Sampled {
                    shots: shots.unwrap_or(DEFAULT_SHOTS),
                };
            }
            if let Some(p) = ga_pop {
                config.ga.population_size = p;
            }
            if let Some(i) = ga_iters {
                config.ga.max_iterations = i;
            }
            config.max_iterations = max_iterations;
            let trace_path = trace.unwrap_or_else(|| output.with_extension("csv"));

            let started = Instant::now();
            let outcome = match run_column_generation(&inst, &config) {
                Ok(o) => o,
                Err(Error::IterationLimit { limit, trace }) => {
                    write_trace_csv(&trace_rows(&trace)?, &trace_path)?;
                    anyhow::bail!(
                        "stopped after {limit} iterations without convergence; partial trace in {}",
                        trace_path.display()
                    );
                }
                Err(e) => return Err(e.into()),
            };
            let report = RunReport::build(&inst, &config, &outcome, started.elapsed().as_secs_f64())?;
            write_trace_csv(&report.trace, &trace_path)?;
            report.write(&output)?;
            println!(
                "lp {:.6}  rounded {:.6}  quantum {:.2}%  iterations {}",
                report.lp_objective,
                report.rounded_objective,
                report.quantum_success_pct,
                report.trace.len()
            );
            Ok(())
        }
        Command::Report {
            reports,
            output,
            series,
        } => {
            let loaded = reports
                .into_iter()
                .map(|p| RunReport::read(&p).map(|r| (p, r)))
                .collect::<Result<Vec<_>>>()?;
            let summary = summarize(&loaded)?;
            if summary.mixed_sizes {
                eprintln!("warning: reports span several instance sizes; rows are kept separate");
            }
            println!("{:>6} {:>7} {:>6} {:>12}", "size", "qubits", "count", "quantum %");
            for row in &summary.rows {
                println!(
                    "{:>6} {:>7} {:>6} {:>12.2}",
                    row.instance_size, row.qubits, row.count, row.mean_quantum_pct
                );
            }
            if let Some(path) = output {
                std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if let Some(path) = series {
                write_series_csv(&summary.series, &path)?;
            }
            Ok(())
        }
    }
}
