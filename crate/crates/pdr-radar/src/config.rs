//! Run configuration: a single JSON file with explicit units in field
//! names, plus the bundled reference-case configs.

use crate::beampattern::{self, BeamError, RadarConfig, Scenario};
use crate::solver::SolverParams;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// Top-level run configuration. `scenario` is either a bundled case name
/// ("case1", "case2", "case3") or an inline region list; `alpha = 0`
/// disables the orthogonality penalty.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub radar: RadarSection,
    pub scenario: ScenarioRef,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub alpha: f64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub mismatch: MismatchSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub tx_count: usize,
    pub samples: usize,
    pub f_c_hz: f64,
    pub bandwidth_hz: f64,
    /// Inter-element spacing; when omitted, half a wavelength at the top
    /// band edge, c / (2(f_c + B/2)).
    #[serde(default)]
    pub spacing_m: Option<f64>,
    /// Number of angle cells over [0°, 180°], centred at half-steps.
    pub theta_points: usize,
}

impl Default for RadarSection {
    fn default() -> Self {
        Self {
            tx_count: 10,
            samples: 32,
            f_c_hz: 1.0e9,
            bandwidth_hz: 200.0e6,
            spacing_m: None,
            theta_points: 180,
        }
    }
}

impl RadarSection {
    pub fn to_radar_config(&self) -> Result<RadarConfig, BeamError> {
        let spacing = self.spacing_m.unwrap_or_else(|| {
            beampattern::SPEED_OF_LIGHT_M_S / (2.0 * (self.f_c_hz + self.bandwidth_hz / 2.0))
        });
        let step = 180.0 / self.theta_points as f64;
        let theta: Vec<f64> = (1..=self.theta_points)
            .map(|s| (s as f64 - 0.5) * step)
            .collect();
        RadarConfig::new(
            self.tx_count,
            self.samples,
            self.f_c_hz,
            self.bandwidth_hz,
            spacing,
            theta,
        )
    }
}

/// A scenario reference: bundled case name or inline definition.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Named(String),
    Inline(Scenario),
}

impl ScenarioRef {
    pub fn resolve(&self) -> Result<Scenario, BeamError> {
        match self {
            ScenarioRef::Named(name) => beampattern::scenario_by_name(name).ok_or_else(|| {
                BeamError::InvalidConfig(format!(
                    "unknown scenario '{name}'; bundled names are case1, case2, case3"
                ))
            }),
            ScenarioRef::Inline(s) => Ok(s.clone()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub beta: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    #[serde(default)]
    pub safe_mode: bool,
    /// Defaults to `safe_mode` when omitted.
    #[serde(default)]
    pub assert_monotone: Option<bool>,
    /// Outer stopping threshold ζ; 0 disables the rule, omitted means
    /// 1e-3·√L.
    #[serde(default)]
    pub zeta: Option<f64>,
    #[serde(default = "default_outer_max")]
    pub outer_max: usize,
}

fn default_outer_max() -> usize {
    beampattern::DEFAULT_OUTER_MAX
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            beta: 5.0e-5,
            epsilon: 1.0e-6,
            max_iter: 6,
            safe_mode: false,
            assert_monotone: None,
            zeta: None,
            outer_max: default_outer_max(),
        }
    }
}

impl SolverSection {
    pub fn to_params(&self) -> SolverParams {
        SolverParams {
            beta: self.beta,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            safe_mode: self.safe_mode,
            assert_monotone: self.assert_monotone.unwrap_or(self.safe_mode),
        }
    }

    pub fn zeta_for(&self, code_len: usize) -> f64 {
        self.zeta
            .unwrap_or_else(|| beampattern::default_zeta(code_len))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MismatchSection {
    #[serde(default)]
    pub rx_count: Option<usize>,
    #[serde(default)]
    pub rx_spacing_m: Option<f64>,
    /// Transmit-beam steering direction; defaults to 125°.
    #[serde(default)]
    pub theta_steer_deg: Option<f64>,
}

/// The three bundled reference configurations. Step sizes are the
/// hand-picked per-case values; the inner budget (6 steps over at most 50
/// passes) keeps a full design within 300 combined descent steps.
pub fn bundled_case_configs() -> [RunConfig; 3] {
    let mk = |name: &str, beta: f64| RunConfig {
        radar: RadarSection::default(),
        scenario: ScenarioRef::Named(name.into()),
        solver: SolverSection {
            beta,
            epsilon: 1.0e-6,
            max_iter: 6,
            safe_mode: false,
            assert_monotone: None,
            zeta: Some(0.0),
            outer_max: 50,
        },
        seed: 1,
        alpha: 0.0,
        output_dir: PathBuf::from(format!("runs/{name}")),
        mismatch: MismatchSection::default(),
    };
    [
        mk("case1", 5.0e-5),
        mk("case2", 4.0e-5),
        mk("case3", 4.0e-5),
    ]
}
