//! Wideband transmit-beampattern problem construction and the alternating
//! design loop.
//!
//! A code x of length L = M·N stacks the N time samples of each of the M
//! antennas (antenna-major). Its per-antenna DFT at bin p gives the spectra
//! y_p ∈ ℂ^M, and the far-field pattern at angle θ and bin p is
//! |a(θ,p)ᴴ y_p|² with a the steering vector. Matching a desired amplitude
//! grid d_sp under fixed auxiliary phases φ_sp is the quadratic cost
//!
//! f(x) = Σ_p ‖d_p − A_p F_p x‖² = xᴴPx − qᴴx − xᴴq + r,
//!
//! with P = Σ_p F_pᴴA_pᴴA_pF_p, q = Σ_p F_pᴴA_pᴴd_p, r = Σ_p d_pᴴd_p.
//! The alternating loop re-picks the phases φ_sp = arg(a_spᴴ y_p), which is
//! the exact minimiser of each term, then re-solves the quadratic in x on
//! the constant-modulus set, so the amplitude-matching deviation is
//! non-increasing across passes.
//!
//! Scale convention: a scenario amplitude is a per-sample tone amplitude.
//! The spectral grids used by the quadratic store amplitude × N (a unit
//! tone's length-N DFT has magnitude N) and the deviation metric measures
//! the pattern as |a_spᴴ y_p| / N, back in per-sample units.

use crate::linalg::{norms, HermitianMatrix, LinalgError};
use crate::manifold::{FeasiblePoint, ManifoldError};
use crate::solver::{pdr_solve, QuadraticCost, SolveTrace, SolverError, SolverParams};
use crate::C64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BeamError {
    #[error("invalid radar configuration: {0}")]
    InvalidConfig(String),
    #[error("frequency bin {p} outside [{lo}, {hi}]")]
    BinOutOfRange { p: i32, lo: i32, hi: i32 },
    #[error("grid is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    GridMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("least-squares baseline failed to converge: residual {residual:.3e} after {iterations} iterations")]
    BaselineDiverged { residual: f64, iterations: usize },
}

/// Array and sampling geometry plus the angle grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    pub tx_count: usize,
    pub samples: usize,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub spacing_m: f64,
    pub wave_speed_m_s: f64,
    pub theta_grid_deg: Vec<f64>,
}

impl RadarConfig {
    pub fn new(
        tx_count: usize,
        samples: usize,
        carrier_hz: f64,
        bandwidth_hz: f64,
        spacing_m: f64,
        theta_grid_deg: Vec<f64>,
    ) -> Result<Self, BeamError> {
        let cfg = Self {
            tx_count,
            samples,
            carrier_hz,
            bandwidth_hz,
            spacing_m,
            wave_speed_m_s: SPEED_OF_LIGHT_M_S,
            theta_grid_deg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// The wideband reference setup: M = 10 antennas, N = 32 samples,
    /// 1 GHz carrier, 200 MHz bandwidth, half-wavelength spacing at the top
    /// band edge, and 180 angle cells centred at half-degrees.
    pub fn standard() -> Self {
        let carrier_hz = 1.0e9;
        let bandwidth_hz = 200.0e6;
        let spacing_m = SPEED_OF_LIGHT_M_S / (2.0 * (carrier_hz + bandwidth_hz / 2.0));
        let theta: Vec<f64> = (1..=180).map(|s| s as f64 - 0.5).collect();
        Self {
            tx_count: 10,
            samples: 32,
            carrier_hz,
            bandwidth_hz,
            spacing_m,
            wave_speed_m_s: SPEED_OF_LIGHT_M_S,
            theta_grid_deg: theta,
        }
    }

    pub fn validate(&self) -> Result<(), BeamError> {
        if self.tx_count < 1 {
            return Err(BeamError::InvalidConfig("tx_count must be >= 1".into()));
        }
        if self.samples == 0 || self.samples % 2 != 0 {
            return Err(BeamError::InvalidConfig(format!(
                "samples must be a positive even number, got {}",
                self.samples
            )));
        }
        if !(self.spacing_m > 0.0) {
            return Err(BeamError::InvalidConfig(
                "spacing_m must be positive".into(),
            ));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.carrier_hz > 0.0) {
            return Err(BeamError::InvalidConfig(
                "carrier_hz and bandwidth_hz must be positive".into(),
            ));
        }
        if self.theta_grid_deg.is_empty() {
            return Err(BeamError::InvalidConfig("theta grid is empty".into()));
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.theta_grid_deg {
            if !(t >= 0.0 && t <= 180.0) || t <= prev {
                return Err(BeamError::InvalidConfig(
                    "theta grid must be strictly increasing within [0, 180]".into(),
                ));
            }
            prev = t;
        }
        Ok(())
    }

    /// L = M·N, the code length.
    pub fn code_len(&self) -> usize {
        self.tx_count * self.samples
    }

    pub fn angle_count(&self) -> usize {
        self.theta_grid_deg.len()
    }

    pub fn sample_interval_s(&self) -> f64 {
        1.0 / self.bandwidth_hz
    }

    /// Bin indices p = −N/2 … N/2−1.
    pub fn frequency_bins(&self) -> Vec<i32> {
        let half = (self.samples / 2) as i32;
        (-half..half).collect()
    }

    /// Physical frequency of bin p: p/(N·T_s) + f_c.
    pub fn bin_freq_hz(&self, p: i32) -> f64 {
        p as f64 * self.bandwidth_hz / self.samples as f64 + self.carrier_hz
    }

    fn check_bin(&self, p: i32) -> Result<(), BeamError> {
        let half = (self.samples / 2) as i32;
        if p < -half || p >= half {
            return Err(BeamError::BinOutOfRange {
                p,
                lo: -half,
                hi: half - 1,
            });
        }
        Ok(())
    }
}

/// Dense S×N real grid (angles × frequency bins), row-major by angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Grid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> f64>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut g = Self::zeros(rows, cols);
        for s in 0..rows {
            for p in 0..cols {
                g.data[s * cols + p] = f(s, p);
            }
        }
        g
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, s: usize, p: usize) -> f64 {
        self.data[s * self.cols + p]
    }

    pub fn set(&mut self, s: usize, p: usize, v: f64) {
        self.data[s * self.cols + p] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Desired spectral amplitude grid d_sp (non-negative) and auxiliary phase
/// grid φ_sp, both S×N. Amplitudes here live at spectral scale (per-sample
/// amplitude × N); see the module docs.
#[derive(Debug, Clone, PartialEq)]
pub struct DesiredPattern {
    amplitudes: Grid,
    phases: Grid,
}

impl DesiredPattern {
    pub fn new(amplitudes: Grid, phases: Grid) -> Result<Self, BeamError> {
        if amplitudes.rows() != phases.rows() || amplitudes.cols() != phases.cols() {
            return Err(BeamError::GridMismatch {
                rows: phases.rows(),
                cols: phases.cols(),
                expected_rows: amplitudes.rows(),
                expected_cols: amplitudes.cols(),
            });
        }
        for &a in amplitudes.data() {
            if !(a >= 0.0) || !a.is_finite() {
                return Err(BeamError::InvalidConfig(format!(
                    "amplitudes must be finite and non-negative, got {a}"
                )));
            }
        }
        Ok(Self { amplitudes, phases })
    }

    pub fn amplitudes(&self) -> &Grid {
        &self.amplitudes
    }

    pub fn phases(&self) -> &Grid {
        &self.phases
    }

    fn check_dims(&self, cfg: &RadarConfig) -> Result<(), BeamError> {
        if self.amplitudes.rows() != cfg.angle_count() || self.amplitudes.cols() != cfg.samples {
            return Err(BeamError::GridMismatch {
                rows: self.amplitudes.rows(),
                cols: self.amplitudes.cols(),
                expected_rows: cfg.angle_count(),
                expected_cols: cfg.samples,
            });
        }
        Ok(())
    }
}

/// A rectangular angle × frequency region with a constant desired amplitude.
/// Containment is half-open: lo ≤ v < hi on both axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub theta_deg: (f64, f64),
    pub freq_hz: (f64, f64),
    pub amplitude: f64,
}

/// A desired beampattern as a list of regions over a default amplitude.
/// The first region containing a cell wins (region order is significant
/// only where regions overlap with different amplitudes).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub regions: Vec<Region>,
    pub default_amplitude: f64,
}

impl Scenario {
    pub fn amplitude_at(&self, theta_deg: f64, f_hz: f64) -> f64 {
        for r in &self.regions {
            if theta_deg >= r.theta_deg.0
                && theta_deg < r.theta_deg.1
                && f_hz >= r.freq_hz.0
                && f_hz < r.freq_hz.1
            {
                return r.amplitude;
            }
        }
        self.default_amplitude
    }

    pub fn validate(&self, cfg: &RadarConfig) -> Result<(), BeamError> {
        let f_lo = cfg.carrier_hz - cfg.bandwidth_hz / 2.0;
        let f_hi = cfg.carrier_hz + cfg.bandwidth_hz / 2.0;
        for r in &self.regions {
            if r.theta_deg.0 < 0.0 || r.theta_deg.1 > 180.0 || r.theta_deg.0 >= r.theta_deg.1 {
                return Err(BeamError::InvalidConfig(format!(
                    "region theta interval {:?} invalid",
                    r.theta_deg
                )));
            }
            if r.freq_hz.0 < f_lo - 1e-6 || r.freq_hz.1 > f_hi + 1e-6 || r.freq_hz.0 >= r.freq_hz.1
            {
                return Err(BeamError::InvalidConfig(format!(
                    "region frequency interval {:?} outside [{f_lo}, {f_hi}]",
                    r.freq_hz
                )));
            }
            if !(r.amplitude >= 0.0) {
                return Err(BeamError::InvalidConfig(
                    "region amplitude must be non-negative".into(),
                ));
            }
        }
        if !(self.default_amplitude >= 0.0) {
            return Err(BeamError::InvalidConfig(
                "default amplitude must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// The three bundled design scenarios at the standard 1 GHz / 200 MHz setup:
/// a frequency-flat broadside passband; two angle-frequency notches over an
/// otherwise illuminated grid; and the notched grid with a restricted
/// transmit band whose columns are forced to zero amplitude.
pub fn scenario_cases() -> [Scenario; 3] {
    let full_band = (0.9e9, 1.1e9);
    let case1 = Scenario {
        name: "case1".into(),
        regions: vec![Region {
            theta_deg: (95.0, 145.0),
            freq_hz: full_band,
            amplitude: 1.0,
        }],
        default_amplitude: 0.0,
    };
    let case2 = Scenario {
        name: "case2".into(),
        regions: vec![
            Region {
                theta_deg: (10.0, 80.0),
                freq_hz: (0.9e9, 1.0e9),
                amplitude: 0.0,
            },
            Region {
                theta_deg: (95.0, 145.0),
                freq_hz: (1.0e9, 1.1e9),
                amplitude: 0.0,
            },
        ],
        default_amplitude: 1.0,
    };
    let case3 = Scenario {
        name: "case3".into(),
        regions: vec![
            Region {
                theta_deg: (40.0, 80.0),
                freq_hz: (943.75e6, 981.25e6),
                amplitude: 0.0,
            },
            Region {
                theta_deg: (120.0, 160.0),
                freq_hz: (962.5e6, 1000.0e6),
                amplitude: 0.0,
            },
            // restricted transmit band: no emission allowed in these columns
            Region {
                theta_deg: (0.0, 180.0),
                freq_hz: (1.025e9, 1.0625e9),
                amplitude: 0.0,
            },
        ],
        default_amplitude: 1.0,
    };
    [case1, case2, case3]
}

pub fn scenario_by_name(name: &str) -> Option<Scenario> {
    scenario_cases().into_iter().find(|s| s.name == name)
}

/// Steering vector a(θ, p) ∈ ℂ^M: element m is
/// exp(j·2π·(p/(N·T_s) + f_c)·m·d·cosθ / c); element 0 is exactly 1.
pub fn steering_vector(cfg: &RadarConfig, theta_deg: f64, p: i32) -> Result<Vec<C64>, BeamError> {
    cfg.check_bin(p)?;
    let f = cfg.bin_freq_hz(p);
    let phase_step = 2.0 * std::f64::consts::PI * f * cfg.spacing_m * theta_deg.to_radians().cos()
        / cfg.wave_speed_m_s;
    Ok((0..cfg.tx_count)
        .map(|m| C64::from_polar(1.0, phase_step * m as f64))
        .collect())
}

/// DFT selection row e_p of length N: entry n is exp(−j2πnp/N).
pub fn dft_row(n: usize, p: i32) -> Vec<C64> {
    let step = -2.0 * std::f64::consts::PI * p as f64 / n as f64;
    (0..n)
        .map(|k| C64::from_polar(1.0, step * k as f64))
        .collect()
}

/// Per-antenna spectra y_p ∈ ℂ^M of the code at bin p:
/// y_p[m] = Σ_n x_m(n)·e^{−j2πnp/N}, under antenna-major stacking.
/// Implemented as M independent inner products with [`dft_row`]; the full
/// selection matrix is never materialised.
pub fn spectrum_at(cfg: &RadarConfig, x: &[C64], p: i32) -> Result<Vec<C64>, BeamError> {
    cfg.check_bin(p)?;
    if x.len() != cfg.code_len() {
        return Err(BeamError::Linalg(LinalgError::DimensionMismatch {
            expected: cfg.code_len(),
            actual: x.len(),
        }));
    }
    let e = dft_row(cfg.samples, p);
    let n = cfg.samples;
    Ok((0..cfg.tx_count)
        .map(|m| {
            let mut acc = C64::new(0.0, 0.0);
            for (xv, ev) in x[m * n..(m + 1) * n].iter().zip(e.iter()) {
                acc += xv * ev;
            }
            acc
        })
        .collect())
}

/// All spectra, bin-major: `result[ip]` is y_p for the ip-th bin.
fn all_spectra(cfg: &RadarConfig, x: &[C64]) -> Result<Vec<Vec<C64>>, BeamError> {
    cfg.frequency_bins()
        .iter()
        .map(|&p| spectrum_at(cfg, x, p))
        .collect()
}

/// Array responses a_spᴴ y_p for every grid cell, row-major S×N.
pub fn array_response(cfg: &RadarConfig, x: &[C64]) -> Result<Vec<C64>, BeamError> {
    let spectra = all_spectra(cfg, x)?;
    let bins = cfg.frequency_bins();
    let s_count = cfg.angle_count();
    let rows: Vec<Vec<C64>> = cfg
        .theta_grid_deg
        .par_iter()
        .map(|&theta| {
            let mut row = Vec::with_capacity(bins.len());
            for (ip, &p) in bins.iter().enumerate() {
                let a = steering_vector(cfg, theta, p).expect("bin validated");
                let mut acc = C64::new(0.0, 0.0);
                for (av, yv) in a.iter().zip(spectra[ip].iter()) {
                    acc += av.conj() * yv;
                }
                row.push(acc);
            }
            row
        })
        .collect();
    let mut out = Vec::with_capacity(s_count * bins.len());
    for row in rows {
        out.extend(row);
    }
    Ok(out)
}

/// Per-bin Gram matrices G_p = A_pᴴA_p = Σ_s a_sp a_spᴴ (M×M, row-major),
/// computed independently per bin and collected in bin order so the result
/// does not depend on the thread count.
fn per_bin_grams(cfg: &RadarConfig) -> Vec<Vec<C64>> {
    let m = cfg.tx_count;
    cfg.frequency_bins()
        .par_iter()
        .map(|&p| {
            let mut g = vec![C64::new(0.0, 0.0); m * m];
            for &theta in &cfg.theta_grid_deg {
                let a = steering_vector(cfg, theta, p).expect("bin validated");
                for i in 0..m {
                    for j in 0..m {
                        g[i * m + j] += a[i] * a[j].conj();
                    }
                }
            }
            g
        })
        .collect()
}

/// The pattern-independent quadratic kernel P = Σ_p F_pᴴA_pᴴA_pF_p.
///
/// Entry ((m1,n1),(m2,n2)) equals Σ_p G_p[m1,m2]·e^{j2π(n1−n2)p/N}, which
/// depends on n1−n2 only; the sum is tabulated once per (m1,m2,n1−n2) and
/// the L×L matrix filled from the table.
pub fn assemble_interaction(cfg: &RadarConfig) -> HermitianMatrix {
    let m = cfg.tx_count;
    let n = cfg.samples;
    let bins = cfg.frequency_bins();
    let grams = per_bin_grams(cfg);

    // table[(m1*m + m2)*(2n-1) + (k + n-1)] = Σ_p G_p[m1,m2] e^{j2πkp/N}
    let width = 2 * n - 1;
    let mut table = vec![C64::new(0.0, 0.0); m * m * width];
    for (ig, g) in grams.iter().enumerate() {
        let p = bins[ig] as f64;
        for slot in 0..width {
            let k = slot as f64 - (n as f64 - 1.0);
            let ph = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k * p / n as f64);
            for m1 in 0..m {
                for m2 in 0..m {
                    table[(m1 * m + m2) * width + slot] += g[m1 * m + m2] * ph;
                }
            }
        }
    }

    let l = m * n;
    HermitianMatrix::from_upper(l, |row, col| {
        let (m1, n1) = (row / n, row % n);
        let (m2, n2) = (col / n, col % n);
        let k = n1 as isize - n2 as isize + (n as isize - 1);
        table[(m1 * m + m2) * width + k as usize]
    })
}

/// The pattern-dependent linear and constant terms:
/// q = Σ_p F_pᴴA_pᴴd_p with d_p = (d_sp·e^{jφ_sp})_s, and r = Σ_sp d_sp².
pub fn assemble_linear_term(
    cfg: &RadarConfig,
    pattern: &DesiredPattern,
) -> Result<(Vec<C64>, f64), BeamError> {
    pattern.check_dims(cfg)?;
    let m = cfg.tx_count;
    let n = cfg.samples;
    let bins = cfg.frequency_bins();

    let per_bin: Vec<(Vec<C64>, f64)> = bins
        .par_iter()
        .enumerate()
        .map(|(ip, &p)| {
            // u_p[m] = Σ_s a_sp[m]·d_sp·e^{jφ_sp}
            let mut u = vec![C64::new(0.0, 0.0); m];
            let mut r_p = 0.0;
            for (s, &theta) in cfg.theta_grid_deg.iter().enumerate() {
                let d = pattern.amplitudes.get(s, ip);
                r_p += d * d;
                if d == 0.0 {
                    continue;
                }
                let dphase = C64::from_polar(d, pattern.phases.get(s, ip));
                let a = steering_vector(cfg, theta, p).expect("bin validated");
                for (um, am) in u.iter_mut().zip(a.iter()) {
                    *um += am * dphase;
                }
            }
            (u, r_p)
        })
        .collect();

    let mut q = vec![C64::new(0.0, 0.0); m * n];
    let mut r = 0.0;
    for (ip, &p) in bins.iter().enumerate() {
        let (u, r_p) = &per_bin[ip];
        r += r_p;
        // (F_pᴴ u)[m·N + n] = conj(e_p[n])·u[m]
        let step = 2.0 * std::f64::consts::PI * p as f64 / n as f64;
        for mm in 0..m {
            for nn in 0..n {
                q[mm * n + nn] += u[mm] * C64::from_polar(1.0, step * nn as f64);
            }
        }
    }
    Ok((q, r))
}

/// Full quadratic cost (P, q, r) for a desired pattern; γ starts at zero.
pub fn assemble_quadratic(
    cfg: &RadarConfig,
    pattern: &DesiredPattern,
) -> Result<QuadraticCost, BeamError> {
    pattern.check_dims(cfg)?;
    let p = assemble_interaction(cfg);
    let (q, r) = assemble_linear_term(cfg, pattern)?;
    Ok(QuadraticCost::new(p, q, r, 0.0)?)
}

/// Spectral-scale desired grid for a scenario: amplitude_at(θ_s, f_p) × N,
/// phases all zero.
pub fn desired_from_scenario(cfg: &RadarConfig, scenario: &Scenario) -> DesiredPattern {
    let s_count = cfg.angle_count();
    let bins = cfg.frequency_bins();
    let n = cfg.samples as f64;
    let amplitudes = Grid::from_fn(s_count, bins.len(), |s, ip| {
        scenario.amplitude_at(cfg.theta_grid_deg[s], cfg.bin_freq_hz(bins[ip])) * n
    });
    let phases = Grid::zeros(s_count, bins.len());
    DesiredPattern::new(amplitudes, phases).expect("grids constructed consistently")
}

/// Exact per-cell phase minimiser: φ_sp = arg(a_spᴴ y_p), with arg(0) := 0.
/// Amplitudes are carried over unchanged.
pub fn update_phases(
    cfg: &RadarConfig,
    pattern: &DesiredPattern,
    x: &[C64],
) -> Result<DesiredPattern, BeamError> {
    pattern.check_dims(cfg)?;
    let resp = array_response(cfg, x)?;
    let cols = cfg.samples;
    let phases = Grid::from_fn(cfg.angle_count(), cols, |s, ip| {
        let v = resp[s * cols + ip];
        if v.norm() == 0.0 {
            0.0
        } else {
            v.arg()
        }
    });
    DesiredPattern::new(pattern.amplitudes.clone(), phases)
}

/// Power grid P_sp = |a_spᴴ y_p|² plus its dB view (floored at −100 dB).
#[derive(Debug, Clone)]
pub struct PatternGrid {
    pub power: Grid,
    pub db: Grid,
}

pub fn evaluate_pattern(cfg: &RadarConfig, x: &[C64]) -> Result<PatternGrid, BeamError> {
    let resp = array_response(cfg, x)?;
    let cols = cfg.samples;
    let power = Grid::from_fn(cfg.angle_count(), cols, |s, ip| {
        resp[s * cols + ip].norm_sqr()
    });
    let db = Grid::from_fn(cfg.angle_count(), cols, |s, ip| {
        10.0 * power.get(s, ip).max(1e-10).log10()
    });
    Ok(PatternGrid { power, db })
}

/// Amplitude-matching deviation in dB:
/// 10·log10 Σ_sp (d_sp − |a_spᴴ y_p|/N)², with d the scenario template in
/// per-sample units. Defined for any complex code (feasibility is not
/// required). Returns −∞ when the match is exact.
pub fn deviation_db(cfg: &RadarConfig, scenario: &Scenario, x: &[C64]) -> Result<f64, BeamError> {
    let resp = array_response(cfg, x)?;
    let bins = cfg.frequency_bins();
    let cols = bins.len();
    let n = cfg.samples as f64;
    let mut rho = 0.0;
    for (s, &theta) in cfg.theta_grid_deg.iter().enumerate() {
        for (ip, &p) in bins.iter().enumerate() {
            let d = scenario.amplitude_at(theta, cfg.bin_freq_hz(p));
            let v = resp[s * cols + ip].norm() / n;
            rho += (d - v) * (d - v);
        }
    }
    Ok(if rho == 0.0 {
        f64::NEG_INFINITY
    } else {
        10.0 * rho.log10()
    })
}

/// One pass of the alternating loop: the inner solve trace plus the
/// movement of the iterate.
#[derive(Debug, Clone)]
pub struct OuterPass {
    pub inner: SolveTrace,
    pub cost_final: f64,
    pub x_delta: f64,
}

#[derive(Debug, Clone)]
pub struct OuterTrace {
    pub passes: Vec<OuterPass>,
    pub total_inner_iterations: usize,
    /// True when the ‖x⁽ᵐ⁾ − x⁽ᵐ⁻¹⁾‖ < ζ rule fired (as opposed to
    /// exhausting outer_max).
    pub converged: bool,
}

/// Default outer stopping threshold ζ = 1e-3·√L.
pub fn default_zeta(code_len: usize) -> f64 {
    1e-3 * (code_len as f64).sqrt()
}

pub const DEFAULT_OUTER_MAX: usize = 50;

/// Alternating beampattern design: update the auxiliary phases at the
/// current iterate, rebuild the linear term, solve the quadratic on the
/// manifold warm-started from the previous iterate, and stop when the
/// iterate moves less than ζ or after `outer_max` passes.
pub fn design_beampattern(
    cfg: &RadarConfig,
    scenario: &Scenario,
    params: &SolverParams,
    zeta: f64,
    outer_max: usize,
    x0: &FeasiblePoint,
) -> Result<(FeasiblePoint, OuterTrace), BeamError> {
    scenario.validate(cfg)?;
    let interaction = assemble_interaction(cfg);
    let pattern = desired_from_scenario(cfg, scenario);
    alternating_design(cfg, interaction, pattern, zeta, outer_max, x0, |cost, x| {
        Ok(pdr_solve(cost, x, params)?)
    })
}

/// Shared outer loop; the inner solve is pluggable so the penalised design
/// can reuse it with a different cost.
pub(crate) fn alternating_design<F>(
    cfg: &RadarConfig,
    interaction: HermitianMatrix,
    mut pattern: DesiredPattern,
    zeta: f64,
    outer_max: usize,
    x0: &FeasiblePoint,
    mut inner_solve: F,
) -> Result<(FeasiblePoint, OuterTrace), BeamError>
where
    F: FnMut(&QuadraticCost, &FeasiblePoint) -> Result<(FeasiblePoint, SolveTrace), BeamError>,
{
    if x0.len() != cfg.code_len() {
        return Err(BeamError::Linalg(LinalgError::DimensionMismatch {
            expected: cfg.code_len(),
            actual: x0.len(),
        }));
    }
    let mut x = x0.clone();
    let mut passes = Vec::new();
    let mut total_inner = 0usize;
    let mut converged = false;

    for _m in 1..=outer_max {
        pattern = update_phases(cfg, &pattern, x.as_slice())?;
        let (q, r) = assemble_linear_term(cfg, &pattern)?;
        let cost = QuadraticCost::new(interaction.clone(), q, r, 0.0)?;
        let (x_new, trace) = inner_solve(&cost, &x)?;
        let x_delta = {
            let diff: Vec<C64> = x_new
                .as_slice()
                .iter()
                .zip(x.as_slice())
                .map(|(a, b)| a - b)
                .collect();
            norms(&diff).l2
        };
        total_inner += trace.iterations_run;
        passes.push(OuterPass {
            cost_final: *trace.costs.last().unwrap(),
            inner: trace,
            x_delta,
        });
        x = x_new;
        if x_delta < zeta {
            converged = true;
            break;
        }
    }

    Ok((
        x,
        OuterTrace {
            passes,
            total_inner_iterations: total_inner,
            converged,
        },
    ))
}

/// Deterministic pseudo-random unit-modulus code: phases uniform on
/// [0, 2π) from a ChaCha stream seeded with `seed`.
pub fn seeded_code(code_len: usize, seed: u64) -> FeasiblePoint {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let dist = Uniform::new(0.0, 2.0 * std::f64::consts::PI);
    let phases: Vec<f64> = (0..code_len).map(|_| dist.sample(&mut rng)).collect();
    FeasiblePoint::from_phases(&phases)
}

const CG_REL_TOL: f64 = 1e-10;
const BASELINE_X_TOL: f64 = 1e-9;

/// Conjugate gradients on the Hermitian positive-definite system
/// (P + reg·I)x = q, warm-started at `x0`.
fn cg_solve(
    p: &HermitianMatrix,
    reg: f64,
    q: &[C64],
    x0: Vec<C64>,
    max_iter: usize,
) -> Result<Vec<C64>, BeamError> {
    let apply = |v: &[C64]| -> Vec<C64> {
        let mut av = p.matvec(v).expect("dimension fixed");
        for (a, b) in av.iter_mut().zip(v.iter()) {
            *a += b * reg;
        }
        av
    };
    let qn = norms(q).l2;
    if qn == 0.0 {
        return Ok(vec![C64::new(0.0, 0.0); q.len()]);
    }
    let mut x = x0;
    let ax = apply(&x);
    let mut rvec: Vec<C64> = q.iter().zip(ax.iter()).map(|(a, b)| a - b).collect();
    let mut d = rvec.clone();
    let mut rs_old = norms(&rvec).l2.powi(2);
    for _k in 0..max_iter {
        if rs_old.sqrt() <= CG_REL_TOL * qn {
            return Ok(x);
        }
        let ad = apply(&d);
        let denom = crate::linalg::dot(&d, &ad).re;
        if denom <= 0.0 {
            break;
        }
        let alpha = rs_old / denom;
        for i in 0..x.len() {
            x[i] += d[i] * alpha;
            rvec[i] -= ad[i] * alpha;
        }
        let rs_new = norms(&rvec).l2.powi(2);
        let beta = rs_new / rs_old;
        for i in 0..d.len() {
            d[i] = rvec[i] + d[i] * beta;
        }
        rs_old = rs_new;
    }
    if rs_old.sqrt() <= 1e-6 * qn {
        Ok(x)
    } else {
        Err(BeamError::BaselineDiverged {
            residual: rs_old.sqrt() / qn,
            iterations: max_iter,
        })
    }
}

/// Modulus-unconstrained reference design: alternates the exact phase
/// update with a least-squares solve of Px = q (conjugate gradients with
/// diagonal regularisation 1e-9·trace(P)/L). Serves as the performance
/// bound for all constant-modulus designs.
pub fn unconstrained_baseline(
    cfg: &RadarConfig,
    scenario: &Scenario,
    outer_iters: usize,
) -> Result<(Vec<C64>, f64), BeamError> {
    scenario.validate(cfg)?;
    let l = cfg.code_len();
    let p = assemble_interaction(cfg);
    let reg = 1e-9 * p.trace_real() / l as f64;
    let mut pattern = desired_from_scenario(cfg, scenario);
    let mut x = vec![C64::new(0.0, 0.0); l];
    for _ in 0..outer_iters {
        pattern = update_phases(cfg, &pattern, &x)?;
        let (q, _r) = assemble_linear_term(cfg, &pattern)?;
        let x_new = cg_solve(&p, reg, &q, x.clone(), 4 * l)?;
        let delta: Vec<C64> = x_new.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let moved = norms(&delta).l2;
        x = x_new;
        if moved <= BASELINE_X_TOL * norms(&x).l2.max(1e-300) {
            break;
        }
    }
    let dev = deviation_db(cfg, scenario, &x)?;
    Ok((x, dev))
}
