//! Command-line driver: `mvgf run|stationary|spectrum|fit|particles|compare`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mvgf::cli::{self, runner};

#[derive(Parser)]
#[command(
    name = "mvgf",
    version,
    about = "McKean-Vlasov gradient flows on the torus: simulate, \
             linearize, and verify convergence rates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario config file (documented key = value grammar).
    #[arg(long)]
    config: PathBuf,
    /// Override the scenario's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Time-integrate the flow; emits trajectory CSV and snapshots.
    Run(ScenarioArgs),
    /// Locate a stationary state by damped fixed-point iteration.
    Stationary(ScenarioArgs),
    /// Assemble and diagonalize the linearized operator at the initial state.
    Spectrum(ScenarioArgs),
    /// Fit the gradient-inequality exponent and check the decay rate of a
    /// finished run.
    Fit(ScenarioArgs),
    /// Simulate the N-particle Langevin dynamics.
    Particles(ScenarioArgs),
    /// Compare two finished runs snapshot by snapshot.
    Compare {
        /// First run directory.
        #[arg(long)]
        a: PathBuf,
        /// Second run directory.
        #[arg(long)]
        b: PathBuf,
        /// Where to write the comparison report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn scenario_command(args: &ScenarioArgs, cmd: runner::Subcommand) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let scenario = match cli::parse_scenario(&text) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let base_dir = args
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    match runner::run_scenario(
        &scenario,
        cmd,
        &base_dir,
        args.out.as_deref(),
        args.seed,
    ) {
        Ok(summary) => {
            println!("{} ({})", summary.message, summary.outputs.display());
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::error_exit_code(&e) as u8)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => scenario_command(&args, runner::Subcommand::Run),
        Command::Stationary(args) => scenario_command(&args, runner::Subcommand::Stationary),
        Command::Spectrum(args) => scenario_command(&args, runner::Subcommand::Spectrum),
        Command::Fit(args) => scenario_command(&args, runner::Subcommand::Fit),
        Command::Particles(args) => scenario_command(&args, runner::Subcommand::Particles),
        Command::Compare { a, b, out } => match cli::compare(&a, &b, out.as_deref()) {
            Ok(report) => {
                println!(
                    "compare: {} pairs, max_l1 = {:.3e}, max_linf = {:.3e}, \
                     terminal_l1 = {:.3e}",
                    report.pairs.len(),
                    report.max_l1,
                    report.max_linf,
                    report.terminal_l1
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(cli::error_exit_code(&e) as u8)
            }
        },
    }
}
