//! `twr-tdoa`: run ranging scenarios, sweep parameters, locate listeners,
//! and verify the built-in identity suite.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 identity
//! violation in `selftest`.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use twr_tdoa_core::{load_scenario, run_scenario, selftest, OutputFormat, RunOptions};

#[derive(Parser)]
#[command(name = "twr-tdoa", version, about = "Two-way-ranging TDoA simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario (including its sweep axes, if any).
    Run(RunArgs),
    /// Alias of `run` for scenarios that define sweep axes.
    Sweep(RunArgs),
    /// Run a scenario and solve one position fix per listener.
    Locate(RunArgs),
    /// Run the identity suite and print the per-check pass table.
    Selftest,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Write result rows here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write per-sweep-axis (value, error) series into this directory.
    #[arg(long = "emit-plot-data", value_name = "DIR")]
    emit_plot_data: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep points (output is identical for any value).
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints help/version through the error path too.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    match cli.command {
        Command::Run(args) | Command::Sweep(args) => run(args, false),
        Command::Locate(args) => run(args, true),
        Command::Selftest => {
            let report = selftest();
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    }
}

fn run(args: RunArgs, locate: bool) -> ExitCode {
    match try_run(args, locate) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn try_run(args: RunArgs, locate: bool) -> anyhow::Result<()> {
    let scenario = load_scenario(&args.scenario)
        .with_context(|| format!("loading {}", args.scenario.display()))?;
    let opts = RunOptions {
        format: match args.format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Jsonl => OutputFormat::Jsonl,
        },
        locate,
        jobs: args.jobs,
        seed_override: args.seed,
        plot_dir: args.emit_plot_data,
    };

    let summary = match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            let summary = run_scenario(&scenario, &opts, &mut file)?;
            file.flush()?;
            // Rows went to the file; the summary goes to stdout.
            print!("{summary}");
            summary
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let summary = run_scenario(&scenario, &opts, &mut lock)?;
            lock.flush()?;
            // Keep stdout bit-exact row data; the summary goes to stderr.
            eprint!("{summary}");
            summary
        }
    };

    if summary.within_bound() == Some(false) {
        eprintln!("warning: a channel exceeded the noise-free agreement bound");
    }
    Ok(())
}
