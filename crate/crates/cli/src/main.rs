mod args;
mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use unitroot_core::rng::DEFAULT_SEED;

use crate::args::{Cli, Command};
use crate::commands::{Context, Outcome};
use crate::config::FileConfig;
use crate::error::CliError;

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format_timestamp(None)
        .init();
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let file = FileConfig::from_env()?;
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let ctx = Context {
        seed: cli.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        format: cli.format,
        file,
    };
    match &cli.command {
        Command::Simulate(a) => commands::simulate(a, &ctx),
        Command::Test(a) => commands::test(a, &ctx),
        Command::Montecarlo(a) => commands::montecarlo(a, &ctx),
        Command::Empirical(a) => commands::empirical(a, &ctx),
        Command::BuildNullTable(a) => commands::build_null_table(a, &ctx),
    }
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(cli.verbose);
    let outcome = run(&cli).and_then(|o| {
        emit(&cli, &o.document.render(cli.format))?;
        Ok(o.exit_code)
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
