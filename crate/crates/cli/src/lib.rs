//! Command-line harness: configuration layering, run directories and one
//! function per subcommand.
//!
//! Exit codes: 0 on success, 1 when a check fails or the run hits a
//! numerical or I/O error, 2 when the configuration is rejected.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;

use std::io;

use log::{error, info};

use crate::args::Cli;
use crate::commands::Outcome;
use crate::config::{parse_config, CommandKind, ConfigError};
use crate::output::{RunDir, CONFIG_FILE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] adainject::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Core(adainject::Error::InvalidConfig(_) | adainject::Error::InvalidArgument(_)) => EXIT_CONFIG,
            _ => EXIT_FAILED,
        }
    }
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let cfg = match parse_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let run_id = cfg.run_id();
    let mut dir = match RunDir::create(&cli.out, &run_id, cfg.command.name()) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: cannot create run directory under {}: {e}", cli.out.display());
            return EXIT_FAILED;
        }
    };
    info!("run {run_id} ({}) -> {}", cfg.command, dir.path.display());
    if let Err(e) = dir.write(CONFIG_FILE, cfg.canonical()) {
        eprintln!("error: {e}");
        return EXIT_FAILED;
    }
    let result = match cfg.command {
        CommandKind::Toy => commands::toy(&cfg, &mut dir),
        CommandKind::Regret => commands::regret(&cfg, &mut dir),
        CommandKind::Train => commands::train(&cfg, &mut dir),
        CommandKind::SweepK => commands::sweep_k(&cfg, &mut dir),
        CommandKind::Gradcheck => commands::gradcheck(&cfg, &mut dir),
        CommandKind::OracleCheck => commands::oracle_check(&cfg, &mut dir),
    };
    match result {
        Ok(Outcome::Passed) => match dir.finish() {
            Ok(path) => {
                println!("outputs in {}", path.display());
                EXIT_OK
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_FAILED
            }
        },
        Ok(Outcome::CheckFailed(reason)) => {
            error!("check failed: {reason}");
            eprintln!("check failed: {reason}");
            let _ = dir.fail(&reason);
            EXIT_FAILED
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = dir.fail(&e.to_string());
            e.exit_code()
        }
    }
}
