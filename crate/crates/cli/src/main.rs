mod args;
mod commands;
mod config;
mod docs;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::{load_table, merge, UsageError};

/// Applies the `[subcommand]` table of the config file, if any.
fn configured<T>(cli_config: &Option<std::path::PathBuf>, name: &str, flags: T) -> anyhow::Result<T>
where
    T: serde::Serialize + serde::de::DeserializeOwned,
{
    match cli_config {
        Some(path) => merge(&flags, load_table(path, name)?),
        None => Ok(flags),
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let name = cli.command.name();
    let cfg = &cli.config;
    match cli.command {
        Command::Kernel(a) => commands::kernel(configured(cfg, name, a)?)?,
        Command::Periodic(a) => commands::periodic(configured(cfg, name, a)?)?,
        Command::Branch(a) => commands::branch(configured(cfg, name, a)?)?,
        Command::Solitary(a) => commands::solitary(configured(cfg, name, a)?)?,
        Command::Verify(a) => return commands::verify(configured(cfg, name, a)?),
        Command::Report(a) => commands::report(configured(cfg, name, a)?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
