mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::CliError;

fn run(argv: Vec<String>) -> Result<String, CliError> {
    let argv = args::merged_argv(argv).map_err(CliError::Usage)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            return Ok(e.to_string().trim_end().to_string());
        }
        Err(e) => {
            let msg = e.to_string();
            return Err(CliError::Usage(msg.trim_start_matches("error: ").trim_end().to_string()));
        }
    };
    let f = cli.format;
    match &cli.command {
        Command::Ring { model, basis } => commands::ring(f, model, *basis),
        Command::Eta { model, basis } => commands::eta(f, model, *basis),
        Command::Cmatrix { model, basis, with_prefactor } => commands::cmatrix(f, model, *basis, *with_prefactor),
        Command::Chebyshev { k, tilde } => commands::chebyshev(f, *k, *tilde),
        Command::Solve(a) => commands::solve(f, a),
        Command::Verify { suite, model, dmax, seed, threads } => commands::verify(f, suite, model, *dmax, *seed, *threads),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(text) => {
            println!("{}", text.trim_end());
            ExitCode::SUCCESS
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Failure(msg, report)) => {
            if let Some(r) = report {
                println!("{}", output::to_string(&r));
            }
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
