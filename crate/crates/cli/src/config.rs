//! Run configuration: JSON file values overlaid with command-line flags.

use clap::{Args, ValueEnum};
use covbound::tolerances::{DEFAULT_GRID_STEP, DEFAULT_NUM_PHASES};
use covbound::{make_band, AnalysisConfig, BoundConfig, FrequencyBand, ProblemSpec, SolverConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::error::CliError;

pub const DEFAULT_SWEEP_POINTS: usize = 141;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Fully resolved settings of one invocation. Embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub band: Vec<(f64, f64)>,
    pub n: Option<usize>,
    pub sigma2: f64,
    pub tau: Option<f64>,
    pub tau_range: Option<(f64, f64)>,
    pub points: usize,
    pub grid_step: f64,
    pub num_phases: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub exact: bool,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverConfig::default();
        RunConfig {
            band: Vec::new(),
            n: None,
            sigma2: 1.0,
            tau: None,
            tau_range: None,
            points: DEFAULT_SWEEP_POINTS,
            grid_step: DEFAULT_GRID_STEP,
            num_phases: DEFAULT_NUM_PHASES,
            tol: solver.tol,
            max_iter: solver.max_iter,
            exact: false,
            format: Format::Json,
            output: None,
            jobs: None,
        }
    }
}

fn parse_pair(s: &str, what: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("{what} must look like lo:hi, got '{s}'"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| format!("'{v}' in {what} '{s}' is not a number"))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_band(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s, "band")
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    parse_pair(s, "lag range")
}

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Frequency interval `lo:hi` in cycles/sample; repeat for a union.
    #[arg(long = "band", value_parser = parse_band, allow_hyphen_values = true)]
    pub band: Vec<(f64, f64)>,
    /// Largest specified lag; covariances agree on `-n..=n`.
    #[arg(long)]
    pub n: Option<usize>,
    /// Total power of each spectrum.
    #[arg(long, allow_hyphen_values = true)]
    pub sigma2: Option<f64>,
    /// Lag at which to bound the discrepancy.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Lag interval `lo:hi` for sweeps.
    #[arg(long = "tau-range", value_parser = parse_range, allow_hyphen_values = true)]
    pub tau_range: Option<(f64, f64)>,
    /// Number of lags in a sweep, endpoints included.
    #[arg(long)]
    pub points: Option<usize>,
    /// Frequency grid spacing.
    #[arg(long = "grid-step", allow_hyphen_values = true)]
    pub grid_step: Option<f64>,
    /// Phases on the half circle for the lower bound.
    #[arg(long)]
    pub phases: Option<usize>,
    /// Solver tolerance.
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Add the lower bound and gap columns to a sweep.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write results here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Worker threads (default: available processors).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// JSON file with any of the settings above; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn load_file(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("config file {}: {e}", path.display())))
}

impl RunConfig {
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
        let mut cfg = match &args.config {
            Some(p) => load_file(p)?,
            None => RunConfig::default(),
        };
        if !args.band.is_empty() {
            cfg.band = args.band.clone();
        }
        cfg.sigma2 = args.sigma2.unwrap_or(cfg.sigma2);
        cfg.points = args.points.unwrap_or(cfg.points);
        cfg.grid_step = args.grid_step.unwrap_or(cfg.grid_step);
        cfg.num_phases = args.phases.unwrap_or(cfg.num_phases);
        cfg.tol = args.tol.unwrap_or(cfg.tol);
        cfg.max_iter = args.max_iter.unwrap_or(cfg.max_iter);
        cfg.format = args.format.unwrap_or(cfg.format);
        cfg.n = args.n.or(cfg.n);
        cfg.tau = args.tau.or(cfg.tau);
        cfg.tau_range = args.tau_range.or(cfg.tau_range);
        cfg.output = args.output.clone().or(cfg.output);
        cfg.jobs = args.jobs.or(cfg.jobs);
        cfg.exact |= args.exact;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.band.is_empty() {
            return bad("at least one --band lo:hi is required".into());
        }
        if self.n.is_none() {
            return bad("--n is required".into());
        }
        if !(self.grid_step > 0.0 && self.grid_step.is_finite()) {
            return bad(format!(
                "grid step must be positive, got {}",
                self.grid_step
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad(format!("tolerance must lie in (0, 1), got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max-iter must be positive".into());
        }
        if self.num_phases == 0 {
            return bad("at least one phase is required".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be positive".into());
        }
        Ok(())
    }

    pub fn band(&self) -> Result<FrequencyBand, CliError> {
        Ok(make_band(&self.band)?)
    }

    /// Describes how the requested intervals were normalized, if they changed.
    pub fn band_note(&self) -> Option<String> {
        let band = self.band().ok()?;
        let mut requested = self.band.clone();
        requested.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        (band.to_pairs() != requested)
            .then(|| format!("overlapping or touching intervals merged into {band}"))
    }

    pub fn n(&self) -> usize {
        self.n.unwrap_or_default()
    }

    pub fn spec(&self) -> Result<ProblemSpec, CliError> {
        let tau = self
            .tau
            .ok_or_else(|| CliError::Config("--tau is required for this command".into()))?;
        Ok(ProblemSpec::new(self.band()?, self.n(), tau, self.sigma2)?)
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }

    pub fn bound_config(&self) -> BoundConfig {
        BoundConfig {
            solver: self.solver(),
            ..BoundConfig::default()
        }
    }

    pub fn analysis_config(&self) -> AnalysisConfig {
        AnalysisConfig {
            bound: self.bound_config(),
            grid_step: self.grid_step,
            num_phases: self.num_phases,
        }
    }
}
