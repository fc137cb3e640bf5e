//! Experiment orchestration behind the CLI subcommands. Each command is a
//! plain library function so tests can drive it without spawning a process.

use crate::beampattern::{
    design_beampattern, deviation_db, evaluate_pattern, unconstrained_baseline, BeamError,
    RadarConfig, Scenario,
};
use crate::config::RunConfig;
use crate::manifold::ManifoldError;
use crate::mismatch::{correlation_matrix, g_tr, g_tr_coherent, MismatchError, MismatchSetup};
use crate::ortho::{design_beampattern_penalized, isl0_db, lfm_set, WaveformMatrix};
use crate::report::{
    self, design_summary, fmt_f64, write_json, write_pattern_grid, write_trace, write_waveform,
    DesignSummary, OutputLock,
};
use crate::solver::SolverError;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(String),
    #[error("solver error: {0}")]
    Solver(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl AppError {
    /// Process exit code: 0 success, 1 io, 2 config, 3 solver.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Solver(_) => 3,
            AppError::Io(_) => 1,
        }
    }
}

impl From<BeamError> for AppError {
    fn from(e: BeamError) -> Self {
        match e {
            BeamError::Solver(s) => AppError::Solver(s.to_string()),
            BeamError::BaselineDiverged { .. } => AppError::Solver(e.to_string()),
            other => AppError::Config(other.to_string()),
        }
    }
}

impl From<SolverError> for AppError {
    fn from(e: SolverError) -> Self {
        AppError::Solver(e.to_string())
    }
}

impl From<ManifoldError> for AppError {
    fn from(e: ManifoldError) -> Self {
        AppError::Solver(e.to_string())
    }
}

impl From<MismatchError> for AppError {
    fn from(e: MismatchError) -> Self {
        match e {
            MismatchError::InvalidSetup(_) => AppError::Config(e.to_string()),
            _ => AppError::Solver(e.to_string()),
        }
    }
}

/// Parses a config file, turning serde's line/column diagnostics into the
/// config-error exit path.
pub fn load_config(path: &Path) -> Result<RunConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        AppError::Config(format!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

fn resolve(config: &RunConfig) -> Result<(RadarConfig, Scenario), AppError> {
    let radar = config.radar.to_radar_config()?;
    let scenario = config.scenario.resolve()?;
    scenario.validate(&radar)?;
    Ok((radar, scenario))
}

pub struct DesignOutput {
    pub summary: DesignSummary,
    pub waveform_path: PathBuf,
    pub pattern_path: PathBuf,
    pub trace_path: PathBuf,
    pub summary_path: PathBuf,
}

/// End-to-end design: seeded initialization, alternating design (penalised
/// when alpha > 0), metric evaluation, and persistence of the waveform,
/// pattern grid, trace and summary.
pub fn cmd_design(config: &RunConfig) -> Result<DesignOutput, AppError> {
    let (radar, scenario) = resolve(config)?;
    let _lock = OutputLock::acquire(&config.output_dir)?;
    let t0 = Instant::now();

    let params = config.solver.to_params();
    let zeta = config.solver.zeta_for(radar.code_len());
    let x0 = crate::beampattern::seeded_code(radar.code_len(), config.seed);
    let (x_star, trace) = if config.alpha > 0.0 {
        design_beampattern_penalized(
            &radar,
            &scenario,
            &params,
            zeta,
            config.solver.outer_max,
            config.alpha,
            &x0,
        )?
    } else {
        design_beampattern(
            &radar,
            &scenario,
            &params,
            zeta,
            config.solver.outer_max,
            &x0,
        )?
    };

    let code = x_star.as_slice();
    let dev = deviation_db(&radar, &scenario, code)?;
    let xm = WaveformMatrix::from_code(code, radar.tx_count, radar.samples)
        .expect("code length fixed by construction");
    let isl = isl0_db(&xm);
    let grid = evaluate_pattern(&radar, code)?;
    let wall = t0.elapsed().as_secs_f64();

    let waveform_path = config.output_dir.join("waveform.csv");
    let pattern_path = config.output_dir.join("pattern_db.csv");
    let trace_path = config.output_dir.join("trace.csv");
    let summary_path = config.output_dir.join("summary.json");
    write_waveform(&waveform_path, code, radar.tx_count, radar.samples)?;
    write_pattern_grid(&pattern_path, &radar, &grid.db)?;
    write_trace(&trace_path, &trace)?;
    let summary = design_summary(config, &trace, dev, isl, wall);
    write_json(&summary_path, &summary)?;

    Ok(DesignOutput {
        summary,
        waveform_path,
        pattern_path,
        trace_path,
        summary_path,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateSummary {
    pub version: String,
    pub deviation_db: f64,
    pub isl0_db: f64,
    pub unit_modulus: bool,
    pub max_modulus_error: f64,
    pub config_echo: RunConfig,
}

/// Deterministic re-evaluation of a stored waveform: pattern grid plus the
/// deviation and ISL₀ metrics. Non-unit-modulus codes are flagged but still
/// evaluated (the deviation is defined for any code).
pub fn cmd_evaluate(waveform_path: &Path, config: &RunConfig) -> Result<EvaluateSummary, AppError> {
    let (radar, scenario) = resolve(config)?;
    let (x, antennas, samples) = report::read_waveform(waveform_path)?;
    if antennas * samples != radar.code_len() || samples != radar.samples {
        return Err(AppError::Config(format!(
            "waveform is {antennas} antennas x {samples} samples but the config expects {} x {}",
            radar.tx_count, radar.samples
        )));
    }
    let _lock = OutputLock::acquire(&config.output_dir)?;

    let max_err = x
        .iter()
        .map(|v| (v.norm() - 1.0).abs())
        .fold(0.0f64, f64::max);
    let unit = max_err <= crate::manifold::FEASIBILITY_TOL;
    if !unit {
        eprintln!(
            "warning: waveform is not unit-modulus (max deviation {max_err:.3e}); evaluating anyway"
        );
    }

    let dev = deviation_db(&radar, &scenario, &x)?;
    let xm =
        WaveformMatrix::from_code(&x, radar.tx_count, radar.samples).expect("length checked above");
    let isl = isl0_db(&xm);
    let grid = evaluate_pattern(&radar, &x)?;
    write_pattern_grid(&config.output_dir.join("pattern_db.csv"), &radar, &grid.db)?;
    let summary = EvaluateSummary {
        version: crate::VERSION.to_string(),
        deviation_db: dev,
        isl0_db: isl,
        unit_modulus: unit,
        max_modulus_error: max_err,
        config_echo: config.clone(),
    };
    write_json(&config.output_dir.join("evaluate_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MismatchMode {
    /// General evaluator with the correlation matrix of the LFM set.
    Lfm,
    /// Closed-form coherent array steered at theta_steer.
    Coherent,
    /// General evaluator with the correlation matrix of a designed
    /// waveform loaded from file.
    Pdr,
}

impl MismatchMode {
    fn name(self) -> &'static str {
        match self {
            MismatchMode::Lfm => "lfm",
            MismatchMode::Coherent => "coherent",
            MismatchMode::Pdr => "pdr",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MismatchSummary {
    pub version: String,
    pub mode: String,
    pub theta_steer_deg: f64,
    /// (Δθ, peak value, loss in dB at the steered direction vs Δθ = 0).
    pub peak_loss_db: Vec<(f64, f64, f64)>,
    pub config_echo: RunConfig,
}

/// Mismatch study: one response curve per Δθ plus the peak-loss table.
/// For each Δθ the target sits at θ_steer − Δθ while the correlation
/// matrix and the digital scan react accordingly; the loss compares the
/// curve's peak against the matched (Δθ = 0) peak.
pub fn cmd_mismatch(
    config: &RunConfig,
    mode: MismatchMode,
    deltas_deg: &[f64],
    waveform: Option<&Path>,
) -> Result<MismatchSummary, AppError> {
    let (radar, _scenario) = resolve(config)?;
    let mut setup = MismatchSetup::from_radar(&radar);
    if let Some(rx) = config.mismatch.rx_count {
        setup.rx_count = rx;
    }
    if let Some(d) = config.mismatch.rx_spacing_m {
        setup.rx_spacing_m = d;
    }
    if let Some(t) = config.mismatch.theta_steer_deg {
        setup.theta_steer_deg = t;
    }
    setup.validate()?;
    let _lock = OutputLock::acquire(&config.output_dir)?;

    let n = radar.samples;
    let design_code: Option<WaveformMatrix> = match mode {
        MismatchMode::Pdr => {
            let path = waveform.ok_or_else(|| {
                AppError::Config("mismatch mode 'pdr' requires --waveform".into())
            })?;
            let (x, antennas, samples) = report::read_waveform(path)?;
            if antennas != radar.tx_count || samples != radar.samples {
                return Err(AppError::Config(format!(
                    "waveform is {antennas}x{samples}, config expects {}x{}",
                    radar.tx_count, radar.samples
                )));
            }
            Some(WaveformMatrix::from_code(&x, antennas, samples).expect("sized above"))
        }
        MismatchMode::Lfm => Some(
            lfm_set(radar.tx_count, radar.samples).map_err(|e| AppError::Config(e.to_string()))?,
        ),
        MismatchMode::Coherent => None,
    };

    let steer = setup.theta_steer_deg;
    let mut peaks = Vec::new();
    for &delta in deltas_deg {
        let theta0 = steer - delta;
        if !(0.0..=180.0).contains(&theta0) {
            return Err(AppError::Config(format!(
                "delta {delta} puts the target at {theta0} deg, outside [0, 180]"
            )));
        }
        let curve: Vec<(f64, f64)> = match (&design_code, mode) {
            (_, MismatchMode::Coherent) => radar
                .theta_grid_deg
                .iter()
                .map(|&theta| (theta, g_tr_coherent(&setup, n, theta, theta0, steer)))
                .collect(),
            (Some(xm), _) => {
                let r_s = correlation_matrix(xm, theta0, &setup)?;
                let mut out = Vec::with_capacity(radar.theta_grid_deg.len());
                for &theta in &radar.theta_grid_deg {
                    out.push((theta, g_tr(&setup, &r_s, n, theta, theta0)?));
                }
                out
            }
            (None, _) => unreachable!("design_code is Some for lfm/pdr"),
        };
        let peak = curve.iter().map(|&(_, v)| v).fold(f64::MIN, f64::max);
        peaks.push((delta, peak));

        let fname = format!("mismatch_{}_delta{}.csv", mode.name(), delta);
        let mut w = BufWriter::new(File::create(config.output_dir.join(fname))?);
        writeln!(w, "theta_deg,g_tr,g_tr_db")?;
        for (theta, v) in &curve {
            let db = 10.0 * v.max(1e-300).log10();
            writeln!(w, "{},{},{}", fmt_f64(*theta), fmt_f64(*v), fmt_f64(db))?;
        }
        w.flush()?;
    }

    let matched_peak = peaks
        .iter()
        .find(|(d, _)| *d == 0.0)
        .map(|&(_, p)| p)
        .unwrap_or_else(|| peaks.first().map(|&(_, p)| p).unwrap_or(f64::NAN));
    let peak_loss_db: Vec<(f64, f64, f64)> = peaks
        .iter()
        .map(|&(d, p)| (d, p, 10.0 * (matched_peak / p).log10()))
        .collect();

    let summary = MismatchSummary {
        version: crate::VERSION.to_string(),
        mode: mode.name().to_string(),
        theta_steer_deg: steer,
        peak_loss_db,
        config_echo: config.clone(),
    };
    write_json(&config.output_dir.join("mismatch_summary.json"), &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub version: String,
    pub scenario: String,
    pub unconstrained_deviation_db: f64,
    pub lfm_deviation_db: f64,
    pub lfm_isl0_db: f64,
    pub config_echo: RunConfig,
}

/// Outer passes given to the unconstrained alternation; it typically
/// settles in far fewer.
pub const BASELINE_OUTER_ITERS: usize = 200;

/// Reference designs for the configured scenario: the modulus-unconstrained
/// least-squares bound and the LFM set.
pub fn cmd_baselines(config: &RunConfig) -> Result<BaselineSummary, AppError> {
    let (radar, scenario) = resolve(config)?;
    let _lock = OutputLock::acquire(&config.output_dir)?;

    let (x_unc, dev_unc) = unconstrained_baseline(&radar, &scenario, BASELINE_OUTER_ITERS)?;
    write_waveform(
        &config.output_dir.join("unconstrained_waveform.csv"),
        &x_unc,
        radar.tx_count,
        radar.samples,
    )?;

    let lfm =
        lfm_set(radar.tx_count, radar.samples).map_err(|e| AppError::Config(e.to_string()))?;
    let lfm_code = lfm.to_code();
    let dev_lfm = deviation_db(&radar, &scenario, &lfm_code)?;
    let isl_lfm = isl0_db(&lfm);

    let summary = BaselineSummary {
        version: crate::VERSION.to_string(),
        scenario: scenario.name.clone(),
        unconstrained_deviation_db: dev_unc,
        lfm_deviation_db: dev_lfm,
        lfm_isl0_db: isl_lfm,
        config_echo: config.clone(),
    };
    write_json(&config.output_dir.join("baselines.json"), &summary)?;
    Ok(summary)
}

/// The bundled case configs as pretty JSON, for `pdr cases`.
pub fn bundled_cases_json() -> String {
    let cases = crate::config::bundled_case_configs();
    let mut map = serde_json::Map::new();
    for cfg in cases {
        let name = match &cfg.scenario {
            crate::config::ScenarioRef::Named(n) => n.clone(),
            crate::config::ScenarioRef::Inline(s) => s.name.clone(),
        };
        map.insert(name, serde_json::to_value(&cfg).expect("config serializes"));
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("map serializes")
}
