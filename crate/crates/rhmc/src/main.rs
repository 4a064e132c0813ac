use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = rhmc::cli::Cli::parse();
    match rhmc::cli::execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(rhmc::cli::exit_code(&err))
        }
    }
}
