//! `capcover`: generate, solve, verify, benchmark and plot capacitated
//! covering instances.

mod bench;
mod error;
mod gen;
mod plot;
mod solve;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capcover::exact::{brute_force_opt, verify_solution, DEFAULT_MAX_BALLS};
use capcover::relax::solve_relaxation;
use capcover::{MetricInstance, RoundedSolution};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use error::{CliError, CliResult};
use solve::{Mode, ModeParams};

#[derive(Debug, Parser)]
#[command(name = "capcover", version, about = "Capacitated covering by balls: LP rounding, exact oracle, benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct PipelineArgs {
    #[arg(long, value_enum, default_value_t = Mode::Metric)]
    mode: Mode,
    /// Light threshold (0.375 for metric, uniform and euclid; 0.5 for soft).
    #[arg(long)]
    alpha: Option<f64>,
    /// Expansion slack of the euclid mode.
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Also compute the optimum by brute force (skipped above --max-balls).
    #[arg(long)]
    oracle: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_BALLS)]
    max_balls: usize,
    /// Include wall-clock timings; reports are then no longer reproducible.
    #[arg(long)]
    timings: bool,
}

impl PipelineArgs {
    fn params(&self) -> ModeParams {
        ModeParams {
            mode: self.mode,
            alpha: self.alpha,
            epsilon: self.epsilon,
        }
    }

    fn oracle(&self) -> solve::Oracle {
        self.oracle.then_some(self.max_balls)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instance file to write (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(subcommand)]
        kind: gen::GenKind,
    },
    /// Solve the LP, round it and print a run report.
    Solve {
        #[arg(long)]
        input: PathBuf,
        /// Solution file to write.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Event trace (NDJSON) to write.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Find an optimal cover by brute force.
    Exact {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_BALLS)]
        max_balls: usize,
    },
    /// Check a solution file against an instance.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Largest allowed expansion of a radius.
        #[arg(long, default_value_t = 1.0)]
        beta: f64,
    },
    /// Solve every instance in a directory and write a CSV table.
    Bench {
        /// Directory of instance files.
        #[arg(long)]
        input: PathBuf,
        /// CSV file to write (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        pipeline: PipelineArgs,
    },
    /// Render a planar instance, and optionally a solution, as SVG.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        solution: Option<PathBuf>,
        /// SVG file to write (stdout when absent).
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn emit(text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn json_line(value: &impl Serialize) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn read_solution(path: &Path) -> CliResult<RoundedSolution> {
    Ok(RoundedSolution::from_json(&std::fs::read_to_string(path)?)?)
}

#[derive(Serialize)]
struct ExactReport {
    size: usize,
    subset: Vec<usize>,
    lp_value: f64,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Gen { seed, output, kind } => {
            let (inst, witness) = gen::cmd_gen(&kind, seed)?;
            emit(&(inst.to_json() + "\n"), output.as_deref())?;
            if let Some((path, text)) = witness {
                std::fs::write(path, text)?;
            }
        }
        Command::Solve {
            input,
            output,
            trace,
            pipeline,
        } => {
            let rep = solve::cmd_solve(&solve::SolveArgs {
                input: &input,
                output: output.as_deref(),
                trace: trace.as_deref(),
                params: pipeline.params(),
                oracle: pipeline.oracle(),
                timings: pipeline.timings,
            })?;
            print!("{}", json_line(&rep)?);
        }
        Command::Exact {
            input,
            output,
            max_balls,
        } => {
            let inst = MetricInstance::read(&input)?;
            let opt = brute_force_opt(&inst, max_balls)?;
            let lp_value = solve_relaxation(&inst)?.lp_value;
            if let Some(path) = output {
                let sol = RoundedSolution::new(&inst, opt.subset.clone(), opt.assignment.clone(), lp_value, None);
                std::fs::write(path, sol.to_json() + "\n")?;
            }
            print!(
                "{}",
                json_line(&ExactReport {
                    size: opt.size,
                    subset: opt.subset,
                    lp_value,
                })?
            );
        }
        Command::Verify { input, solution, beta } => {
            let inst = MetricInstance::read(&input)?;
            let sol = read_solution(&solution)?;
            let report = verify_solution(&inst, &sol, beta);
            print!("{}", json_line(&report)?);
            if !report.is_valid {
                let first = &report.violations[0];
                return Err(CliError::Verify(format!("{}: {}", first.kind, first.detail)));
            }
        }
        Command::Bench {
            input,
            output,
            pipeline,
        } => {
            let rows = bench::cmd_bench(&input, &pipeline.params(), pipeline.oracle(), pipeline.timings)?;
            match output {
                Some(p) => bench::write_csv(&rows, std::fs::File::create(p)?)?,
                None => bench::write_csv(&rows, std::io::stdout().lock())?,
            }
        }
        Command::Plot {
            input,
            solution,
            output,
        } => {
            let inst = MetricInstance::read(&input)?;
            let sol = solution.as_deref().map(read_solution).transpose()?;
            emit(&plot::render_svg(&inst, sol.as_ref())?, output.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
