use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use plectic_core::cli::{parse_scenario, run_suite, Perturbation, RunOptions, Suite};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

/// Exact verification of 2-plectic observables, gerbe symmetries and the
/// prequantisation morphism on a scenario file.
///
/// Exit status: 0 all pass, 1 any failure, 2 usage or scenario error,
/// 3 inconclusive only.
#[derive(Debug, Parser)]
#[command(name = "verify", version)]
struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum)]
    suite: Suite,
    /// Number of random tuples per check; overrides the scenario.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Polynomial degree cap for Hamiltonian bases and truncations.
    #[arg(long)]
    degree_bound: Option<u32>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// Break one term of a formula to show that the checks notice.
    #[arg(long, value_enum)]
    perturb: Option<Perturbation>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let scenario = match parse_scenario(&args.scenario) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("verify: {}: {e}", args.scenario.display());
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions {
        samples: args.samples,
        seed: args.seed,
        degree_bound: args.degree_bound,
        perturbation: args.perturb,
    };
    let report = run_suite(&scenario, args.suite, &opts);
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Machine => print!("{}", report.to_machine()),
    }
    ExitCode::from(report.exit_code() as u8)
}
