use std::process::ExitCode;

use overlook::cli::{parse_args, Command};
use overlook::experiment::{run_experiment_command, run_metrics_command};

fn main() -> ExitCode {
    let command = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let code = match command {
        Command::Run(plan) | Command::Simulate(plan) => run_experiment_command(&plan),
        Command::Metrics(args) => run_metrics_command(&args),
    };
    ExitCode::from(code as u8)
}
