use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = mbfdtd::cli::Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    ExitCode::from(mbfdtd::cli::execute(&cli) as u8)
}
