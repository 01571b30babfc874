//! Command-line front end: argument handling, dispatch and output.

pub mod commands;
pub mod config;
pub mod error;

use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;

use crate::config::{CommonArgs, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "covbound",
    version,
    about = "Bounds on covariance uncertainty at unspecified lags"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convex upper bound with its dual certificate (JSON).
    Bound(CommonArgs),
    /// Phase-swept lower bound with its witness spectra (JSON).
    Exact(CommonArgs),
    /// Upper bound minus lower bound (JSON).
    Gap(CommonArgs),
    /// Bound over a range of lags (JSON or CSV).
    Sweep(CommonArgs),
    /// Certificate and symmetry checks (JSON).
    Diagnose(CommonArgs),
    /// Changes under grid and phase refinement (JSON).
    Refine(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Bound(a)
            | Command::Exact(a)
            | Command::Gap(a)
            | Command::Sweep(a)
            | Command::Diagnose(a)
            | Command::Refine(a) => a,
        }
    }
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<String, CliError> {
    let work = || match command {
        Command::Bound(_) => commands::bound(cfg),
        Command::Exact(_) => commands::exact(cfg),
        Command::Gap(_) => commands::gap_cmd(cfg),
        Command::Sweep(_) => commands::sweep(cfg),
        Command::Diagnose(_) => commands::diagnose(cfg),
        Command::Refine(_) => commands::refine(cfg),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = cfg.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| {
        CliError::Config(format!(
            "cannot start {} worker threads: {e}",
            cfg.jobs.unwrap_or(0)
        ))
    })?;
    pool.install(work)
}

fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

/// Run one invocation and return the process exit code: 0 on success, 2 for
/// configuration errors, 3 for solver failures.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let err = CliError::Config(e.render().to_string().trim().to_string());
            let _ = writeln!(stderr, "{}", err.to_json());
            return err.exit_code();
        }
    };
    let result = RunConfig::resolve(cli.command.args())
        .and_then(|cfg| execute(&cli.command, &cfg).and_then(|text| emit(&cfg, &text, stdout)));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "{}", e.to_json());
            e.exit_code()
        }
    }
}
