mod cli;
mod commands;
mod figures;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

use cli::{Cli, Command};
use output::Sink;

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let command = serde_json::to_value(&cli.command)?;

    if let Command::Reproduce { figure } = cli.command {
        let default = PathBuf::from(
            serde_json::to_value(figure)?
                .as_str()
                .unwrap_or("figure")
                .to_lowercase(),
        );
        let out = cli.out.clone().unwrap_or(default);
        let sink = Sink::new(
            Some(out),
            cli.format,
            cli.plot,
            None,
            command,
            serde_json::Value::Null,
        )?;
        figures::reproduce(figure, &sink)?;
        return sink.finish();
    }

    let Some(path) = cli.config.clone() else {
        Cli::command()
            .error(
                ErrorKind::MissingRequiredArgument,
                "--config <path> is required for this command",
            )
            .exit();
    };
    let params = ioncavity::config::load_system(&path)?;
    for w in params.validate()? {
        eprintln!("warning: {w}");
    }
    let mut sink = Sink::new(
        cli.out.clone(),
        cli.format,
        cli.plot,
        Some(path),
        command,
        serde_json::to_value(&params)?,
    )?;
    match &cli.command {
        Command::Equilibrium(args) => commands::equilibrium(&params, args, &mut sink)?,
        Command::Critical => {
            let w = commands::critical(&params, &mut sink)?;
            let line = format!(
                "omega_crit/2pi = {:.4} MHz",
                w / ioncavity::constants::mhz(1.0)
            );
            if cli.out.is_some() {
                println!("{line}");
            } else {
                eprintln!("{line}");
            }
        }
        Command::Landau {
            theta,
            coop,
            powers,
            projected,
        } => commands::landau(&params, *theta, *coop, powers, *projected, &mut sink)?,
        Command::Sweep { grid, entanglement } => {
            commands::sweep(&params, grid, *entanglement, &mut sink)?
        }
        Command::Modes(args) => commands::modes(&params, args, &mut sink)?,
        Command::Steadystate(args) => commands::steadystate(&params, args, &mut sink)?,
        Command::Spectrum {
            solve,
            points,
            extent,
        } => commands::spectrum(&params, solve, *points, *extent, &mut sink)?,
        Command::Entangle { grid } => commands::entangle(&params, grid, &mut sink, Vec::new())?,
        Command::Reproduce { .. } => unreachable!("handled above"),
    }
    sink.finish()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
