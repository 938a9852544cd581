//! Command-line front end for `qss-core`.
//!
//! Exit codes: 0 success, 1 assertion failure or runtime error, 2 bad
//! configuration.

pub mod commands;
pub mod config;

use std::ffi::OsString;

use clap::Parser;

use crate::config::{Cli, Command, ConfigError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSERTION: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;

/// Parse `argv` and run the chosen subcommand, reporting to stderr.
pub fn run_with_args<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    execute(&cli.command)
}

pub fn execute(command: &Command) -> u8 {
    let name = command.name();
    let result = command
        .args()
        .resolve()
        .map_err(anyhow::Error::from)
        .and_then(|args| match args.threads {
            Some(0) => Err(ConfigError("threads must be at least 1".into()).into()),
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(anyhow::Error::from)
                .and_then(|pool| pool.install(|| dispatch(command, &args))),
            None => dispatch(command, &args),
        });
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.passed {
                eprintln!("{name}: {}", outcome.message);
                EXIT_OK
            } else {
                eprintln!("{name}: {}", outcome.message);
                EXIT_ASSERTION
            }
        }
        Err(e) if e.is::<ConfigError>() => {
            eprintln!("{name}: config error: {e}");
            EXIT_CONFIG
        }
        Err(e) => {
            eprintln!("{name}: error: {e:#}");
            EXIT_ASSERTION
        }
    }
}

fn dispatch(command: &Command, args: &config::ConfigArgs) -> anyhow::Result<commands::Outcome> {
    match command {
        Command::Run(_) => commands::cmd_run(args),
        Command::Table(_) => commands::cmd_table(args),
        Command::Validate(_) => commands::cmd_validate(args),
        Command::Security(_) => commands::cmd_security(args),
    }
}
