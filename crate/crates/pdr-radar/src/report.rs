//! Result persistence: CSV grids and waveforms with a lossless fixed
//! 17-significant-digit decimal encoding, a JSON summary carrying the
//! config echo and library version, and a per-output-directory lock.

use crate::beampattern::{Grid, OuterTrace, RadarConfig};
use crate::config::RunConfig;
use crate::solver::Termination;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fs::{self, File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

/// 17 significant digits: enough for every f64 to round-trip bit-exactly
/// through decimal text.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Exclusive claim on an output directory, held for the duration of a
/// command. Concurrent invocations must use distinct directories.
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(Self { path }),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(std::io::Error::new(
                std::io::ErrorKind::AlreadyExists,
                format!(
                    "output directory is locked by another run ({} exists)",
                    path.display()
                ),
            )),
            Err(e) => Err(e),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Waveform file: one row per sample, `antenna_index,sample_index,re,im`.
/// The layout is explicit in the row indices, so readers need not know the
/// stacking convention.
pub fn write_waveform(
    path: &Path,
    x: &[C64],
    antennas: usize,
    samples: usize,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "antenna_index,sample_index,re,im")?;
    for m in 0..antennas {
        for n in 0..samples {
            let v = x[m * samples + n];
            writeln!(w, "{},{},{},{}", m, n, fmt_f64(v.re), fmt_f64(v.im))?;
        }
    }
    w.flush()
}

/// Reads a waveform file back; returns the code and the declared antenna
/// and sample counts inferred from the indices.
pub fn read_waveform(path: &Path) -> std::io::Result<(Vec<C64>, usize, usize)> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if ln == 0 {
            continue; // header
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        let parse_err = |what: &str| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("waveform line {}: bad {what}: {line}", ln + 1),
            )
        };
        if parts.len() != 4 {
            return Err(parse_err("column count"));
        }
        let m: usize = parts[0]
            .trim()
            .parse()
            .map_err(|_| parse_err("antenna_index"))?;
        let n: usize = parts[1]
            .trim()
            .parse()
            .map_err(|_| parse_err("sample_index"))?;
        let re: f64 = parts[2].trim().parse().map_err(|_| parse_err("re"))?;
        let im: f64 = parts[3].trim().parse().map_err(|_| parse_err("im"))?;
        rows.push((m, n, re, im));
    }
    let antennas = rows.iter().map(|r| r.0).max().map_or(0, |v| v + 1);
    let samples = rows.iter().map(|r| r.1).max().map_or(0, |v| v + 1);
    let mut x = vec![C64::new(f64::NAN, f64::NAN); antennas * samples];
    for (m, n, re, im) in rows {
        x[m * samples + n] = C64::new(re, im);
    }
    if x.iter().any(|v| v.re.is_nan()) {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "waveform file has missing (antenna, sample) cells",
        ));
    }
    Ok((x, antennas, samples))
}

/// Pattern grid file: `theta_deg,f_hz,value_db`, one row per cell.
pub fn write_pattern_grid(path: &Path, cfg: &RadarConfig, db: &Grid) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "theta_deg,f_hz,value_db")?;
    let bins = cfg.frequency_bins();
    for (s, &theta) in cfg.theta_grid_deg.iter().enumerate() {
        for (ip, &p) in bins.iter().enumerate() {
            writeln!(
                w,
                "{},{},{}",
                fmt_f64(theta),
                fmt_f64(cfg.bin_freq_hz(p)),
                fmt_f64(db.get(s, ip))
            )?;
        }
    }
    w.flush()
}

/// Convergence trace: `outer_pass,inner_iteration,cost,projected_grad_norm`.
pub fn write_trace(path: &Path, trace: &OuterTrace) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "outer_pass,inner_iteration,cost,projected_grad_norm")?;
    for (pass_idx, pass) in trace.passes.iter().enumerate() {
        for (k, cost) in pass.inner.costs.iter().enumerate() {
            let pg = pass
                .inner
                .projected_grad_norms
                .get(k)
                .map(|v| fmt_f64(*v))
                .unwrap_or_default();
            writeln!(w, "{},{},{},{}", pass_idx + 1, k, fmt_f64(*cost), pg)?;
        }
    }
    w.flush()
}

fn termination_name(t: Termination) -> &'static str {
    match t {
        Termination::CostDelta => "cost_delta",
        Termination::MaxIter => "max_iter",
        Termination::StationaryPoint => "stationary_point",
    }
}

/// Design summary serialized as JSON next to the data files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSummary {
    pub version: String,
    pub deviation_db: f64,
    pub isl0_db: f64,
    pub outer_passes: usize,
    pub total_inner_iterations: usize,
    pub outer_converged: bool,
    pub final_inner_termination: String,
    pub final_cost: f64,
    pub wall_time_s: f64,
    pub config_echo: RunConfig,
}

pub fn design_summary(
    config: &RunConfig,
    trace: &OuterTrace,
    deviation_db: f64,
    isl0_db: f64,
    wall_time_s: f64,
) -> DesignSummary {
    let last = trace.passes.last();
    DesignSummary {
        version: crate::VERSION.to_string(),
        deviation_db,
        isl0_db,
        outer_passes: trace.passes.len(),
        total_inner_iterations: trace.total_inner_iterations,
        outer_converged: trace.converged,
        final_inner_termination: last
            .map(|p| termination_name(p.inner.termination).to_string())
            .unwrap_or_else(|| "none".into()),
        final_cost: last.map(|p| p.cost_final).unwrap_or(f64::NAN),
        wall_time_s,
        config_echo: config.clone(),
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| std::io::Error::new(std::io::ErrorKind::Other, e))?;
    writeln!(w)?;
    w.flush()
}
