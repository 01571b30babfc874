//! One function per subcommand, each rendering its result as text.

use covbound::tolerances::{cross_tol, sharpness_tol};
use covbound::{
    diagnostics_battery, discretize, gap, phase_sweep, refinement_study, sweep_tau, upper_bound,
    BoundReport, FrequencyGrid, PhaseSweepResult, SweepCurve,
};
use serde_json::{json, Value};
use std::fmt::Write as _;
use std::sync::Arc;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// Certificate weights below this fraction of the TV norm are not listed.
const ATOM_FRACTION: f64 = 1e-6;

fn grid(cfg: &RunConfig) -> Result<Arc<FrequencyGrid>, CliError> {
    Ok(Arc::new(discretize(&cfg.band()?, cfg.grid_step)?))
}

fn json_only(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    match cfg.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Config(format!(
            "CSV output covers lag sweeps only; use --format json for '{command}'"
        ))),
    }
}

fn envelope(command: &str, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("config".into(), json!(cfg));
    if let Ok(band) = cfg.band() {
        m.insert("band".into(), json!(band.to_pairs()));
    }
    m.insert("band_note".into(), json!(cfg.band_note()));
    m
}

fn render(map: serde_json::Map<String, Value>) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(&Value::Object(map))
        .map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn bound_fields(r: &BoundReport) -> Value {
    let coefficients: Vec<[f64; 2]> = r.q0.coeffs().iter().map(|c| [c.re, c.im]).collect();
    let tv = r.psi0.tv_norm();
    let atoms: Vec<[f64; 3]> = r
        .psi0
        .grid()
        .points()
        .iter()
        .zip(r.psi0.weights())
        .filter(|(_, w)| w.norm() > ATOM_FRACTION * tv)
        .map(|(&th, w)| [th, w.re, w.im])
        .collect();
    let max_moment = r
        .spec
        .lags()
        .map(|k| r.psi0.moment(k).norm())
        .fold(0.0, f64::max);
    json!({
        "bound": r.bound,
        "t_star": r.t_star,
        "q0": { "degree": r.q0.degree(), "coefficients": coefficients },
        "coefficients": coefficients,
        "real_coefficients": r.real_coefficients,
        "omega": r.omega.points(),
        "omega_degenerate": r.omega.is_degenerate(),
        "duality_gap": r.duality_gap,
        "dual_value": r.dual_value,
        "certificate_value": r.certificate_value,
        "certificate": { "tv_norm": tv, "max_moment": max_moment, "atoms": atoms },
        "diagnostics": { "minimax": r.diag, "dual": r.dual_diag },
    })
}

fn sweep_fields(s: &PhaseSweepResult) -> Value {
    let threshold = 1e-9 * s.spec.sigma2;
    let atoms = |w: &[f64]| -> Vec<[f64; 2]> {
        s.pair0
            .grid()
            .points()
            .iter()
            .zip(w)
            .filter(|(_, &w)| w > threshold)
            .map(|(&th, &w)| [th, w])
            .collect()
    };
    let per_phase: Vec<[f64; 2]> = s
        .per_phase_values
        .iter()
        .map(|(phi, v)| [phi.arg(), *v])
        .collect();
    json!({
        "value": s.value,
        "phi0": [s.phi0.re, s.phi0.im],
        "phi0_angle": s.phi0.arg(),
        "witness": { "mu": atoms(s.pair0.mu_weights()), "nu": atoms(s.pair0.nu_weights()) },
        "per_phase_values": per_phase,
        "failed_phases": s.failed_phases,
        "diagnostics": s.diag,
    })
}

fn merge(map: &mut serde_json::Map<String, Value>, fields: Value) {
    if let Value::Object(f) = fields {
        map.extend(f);
    }
}

pub fn bound(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg, "bound")?;
    let spec = cfg.spec()?;
    let r = upper_bound(&spec, &grid(cfg)?, &cfg.bound_config())?;
    let mut m = envelope("bound", cfg);
    merge(&mut m, bound_fields(&r));
    render(m)
}

pub fn exact(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg, "exact")?;
    let spec = cfg.spec()?;
    let s = phase_sweep(&spec, &grid(cfg)?, cfg.num_phases, &cfg.solver())?;
    let mut m = envelope("exact", cfg);
    merge(&mut m, sweep_fields(&s));
    render(m)
}

pub fn gap_cmd(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg, "gap")?;
    let spec = cfg.spec()?;
    let g = gap(&spec, &grid(cfg)?, cfg.num_phases, &cfg.bound_config())?;
    let mut m = envelope("gap", cfg);
    merge(
        &mut m,
        json!({
            "bound": g.bound.bound,
            "exact": g.sweep.value,
            "gap": g.gap,
            "sharpness_tol": sharpness_tol(spec.sigma2, cfg.tol),
            "cross_tol": cross_tol(spec.sigma2),
            "phi0": [g.sweep.phi0.re, g.sweep.phi0.im],
            "phi0_angle": g.sweep.phi0.arg(),
            "diagnostics": { "minimax": g.bound.diag, "dual": g.bound.dual_diag, "sweep": g.sweep.diag },
        }),
    );
    render(m)
}

pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let (lo, hi) = cfg
        .tau_range
        .ok_or_else(|| CliError::Config("--tau-range lo:hi is required for sweep".into()))?;
    let curve = sweep_tau(
        &cfg.band()?,
        cfg.n(),
        cfg.sigma2,
        (lo, hi),
        cfg.points,
        cfg.exact,
        &cfg.analysis_config(),
    )?;
    if curve.bound_values.iter().all(Option::is_none) {
        let why = curve
            .metadata
            .failures
            .first()
            .map_or("unknown", |f| f.error.as_str());
        return Err(CliError::Solver(format!(
            "every lag in the sweep failed: {why}"
        )));
    }
    match cfg.format {
        Format::Json => {
            let mut m = envelope("sweep", cfg);
            m.insert("curve".into(), json!(curve));
            render(m)
        }
        Format::Csv => Ok(curve_csv(cfg, &curve)),
    }
}

fn cell(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

/// `#` comment lines with the resolved config, then `tau,bound[,exact,gap]`.
pub fn curve_csv(cfg: &RunConfig, curve: &SweepCurve) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# covbound sweep");
    let _ = writeln!(out, "# config: {}", json!(cfg));
    let _ = writeln!(out, "# band: {}", curve.band);
    let _ = writeln!(
        out,
        "# grid_points: {}, failures: {}",
        curve.metadata.grid_points,
        curve.metadata.failures.len()
    );
    if let Some(note) = cfg.band_note() {
        let _ = writeln!(out, "# note: {note}");
    }
    let exact = curve.exact_values.as_ref().zip(curve.gap_values.as_ref());
    out.push_str(if exact.is_some() {
        "tau,bound,exact,gap\n"
    } else {
        "tau,bound\n"
    });
    for (i, &tau) in curve.tau_values.iter().enumerate() {
        let _ = write!(out, "{},{}", cell(Some(tau)), cell(curve.bound_values[i]));
        if let Some((x, g)) = exact {
            let _ = write!(out, ",{},{}", cell(x[i]), cell(g[i]));
        }
        out.push('\n');
    }
    out
}

pub fn diagnose(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg, "diagnose")?;
    let spec = cfg.spec()?;
    let report = diagnostics_battery(&spec, &grid(cfg)?, &cfg.bound_config());
    let mut m = envelope("diagnose", cfg);
    m.insert("all_passed".into(), json!(report.all_passed()));
    m.insert("report".into(), json!(report));
    render(m)
}

pub fn refine(cfg: &RunConfig) -> Result<String, CliError> {
    json_only(cfg, "refine")?;
    let spec = cfg.spec()?;
    let report = refinement_study(&spec, cfg.exact, &cfg.analysis_config())?;
    let mut m = envelope("refine", cfg);
    m.insert(
        "gap_stable_to_3_figures".into(),
        json!(cfg.exact.then(|| report.gap_stable_to(3))),
    );
    m.insert("report".into(), json!(report));
    render(m)
}
