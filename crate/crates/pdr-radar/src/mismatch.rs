//! Transmit-receive pattern under steering/target direction mismatch.
//!
//! G_TR(θ, θ₀) measures the combined response when the beamformer is
//! digitally steered to θ while the target actually sits at θ₀:
//!
//! G_TR = N · |a_Rᴴ(θ)a_R(θ₀)|²/M_R · |a_Tᴴ(θ)R_sᵀa_T(θ₀)|² / (a_Tᴴ(θ)R_sᵀa_T(θ))
//!
//! with R_s the transmit signal correlation matrix
//! (Xᵀ ∘ a_T(θ₀))(Xᵀ ∘ a_T(θ₀))ᴴ. For orthogonal full-power codes R_s is
//! exactly N·I and the peak value N·M_R·M is reached at θ = θ₀ no matter
//! where the target moved: orthogonal signalling pays no mismatch penalty.
//! A coherent array pays the full transmit array-factor loss instead.

use crate::beampattern::RadarConfig;
use crate::linalg::{dot, HermitianMatrix, LinalgError};
use crate::ortho::WaveformMatrix;
use crate::C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MismatchError {
    #[error("invalid mismatch setup: {0}")]
    InvalidSetup(String),
    #[error(
        "transmit quadratic form underflowed at theta = {theta_deg} deg (null-steered direction)"
    )]
    DegenerateDenominator { theta_deg: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Geometry for the mismatch study. Steering vectors on both sides are
/// narrowband ULA responses at the carrier frequency only.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchSetup {
    pub tx_count: usize,
    pub rx_count: usize,
    pub tx_spacing_m: f64,
    pub rx_spacing_m: f64,
    pub carrier_hz: f64,
    pub wave_speed_m_s: f64,
    pub theta_steer_deg: f64,
    pub theta_true_deg: f64,
}

impl MismatchSetup {
    /// Defaults for a radar configuration: as many receive as transmit
    /// elements, the same spacing on both sides, beam steered to 125°.
    pub fn from_radar(cfg: &RadarConfig) -> Self {
        Self {
            tx_count: cfg.tx_count,
            rx_count: cfg.tx_count,
            tx_spacing_m: cfg.spacing_m,
            rx_spacing_m: cfg.spacing_m,
            carrier_hz: cfg.carrier_hz,
            wave_speed_m_s: cfg.wave_speed_m_s,
            theta_steer_deg: 125.0,
            theta_true_deg: 125.0,
        }
    }

    pub fn validate(&self) -> Result<(), MismatchError> {
        if self.tx_count < 1 || self.rx_count < 1 {
            return Err(MismatchError::InvalidSetup(
                "antenna counts must be >= 1".into(),
            ));
        }
        for (label, v) in [
            ("theta_steer_deg", self.theta_steer_deg),
            ("theta_true_deg", self.theta_true_deg),
        ] {
            if !(0.0..=180.0).contains(&v) {
                return Err(MismatchError::InvalidSetup(format!(
                    "{label} = {v} outside [0, 180]"
                )));
            }
        }
        if !(self.tx_spacing_m > 0.0) || !(self.rx_spacing_m > 0.0) {
            return Err(MismatchError::InvalidSetup(
                "spacings must be positive".into(),
            ));
        }
        Ok(())
    }

    fn ula(&self, count: usize, spacing: f64, theta_deg: f64) -> Vec<C64> {
        let step =
            2.0 * std::f64::consts::PI * self.carrier_hz * spacing * theta_deg.to_radians().cos()
                / self.wave_speed_m_s;
        (0..count)
            .map(|m| C64::from_polar(1.0, step * m as f64))
            .collect()
    }

    pub fn tx_steering(&self, theta_deg: f64) -> Vec<C64> {
        self.ula(self.tx_count, self.tx_spacing_m, theta_deg)
    }

    pub fn rx_steering(&self, theta_deg: f64) -> Vec<C64> {
        self.ula(self.rx_count, self.rx_spacing_m, theta_deg)
    }
}

/// Transmit signal correlation matrix
/// R_s = (Xᵀ ∘ a_T(θ₀))(Xᵀ ∘ a_T(θ₀))ᴴ, entrywise
/// R_s[i,j] = a_i·a_j*·(XᴴX)[j,i]. Hermitian PSD by construction.
pub fn correlation_matrix(
    x: &WaveformMatrix,
    theta0_deg: f64,
    setup: &MismatchSetup,
) -> Result<HermitianMatrix, MismatchError> {
    if x.antennas() != setup.tx_count {
        return Err(MismatchError::InvalidSetup(format!(
            "waveform has {} antennas, setup expects {}",
            x.antennas(),
            setup.tx_count
        )));
    }
    let a = setup.tx_steering(theta0_deg);
    let g = x.gram();
    let m = setup.tx_count;
    Ok(HermitianMatrix::from_upper(m, |i, j| {
        a[i] * a[j].conj() * g[j * m + i]
    }))
}

fn transpose_apply(r: &HermitianMatrix, v: &[C64]) -> Vec<C64> {
    // (Rᵀ v)[i] = Σ_j R[j,i]·v[j]
    let m = r.dim();
    (0..m)
        .map(|i| {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..m {
                acc += r.get(j, i) * v[j];
            }
            acc
        })
        .collect()
}

/// The general pattern evaluator for an arbitrary correlation matrix. The
/// denominator is a PSD quadratic form; when it underflows relative to the
/// matrix scale the steering direction is nulled and no finite ratio exists.
pub fn g_tr(
    setup: &MismatchSetup,
    r_s: &HermitianMatrix,
    n_samples: usize,
    theta_deg: f64,
    theta0_deg: f64,
) -> Result<f64, MismatchError> {
    setup.validate()?;
    if r_s.dim() != setup.tx_count {
        return Err(MismatchError::InvalidSetup(format!(
            "correlation matrix is {}x{0}, setup expects {1}x{1}",
            r_s.dim(),
            setup.tx_count
        )));
    }
    let a_r_theta = setup.rx_steering(theta_deg);
    let a_r_0 = setup.rx_steering(theta0_deg);
    let rx_gain = dot(&a_r_theta, &a_r_0).norm_sqr() / setup.rx_count as f64;

    let a_t_theta = setup.tx_steering(theta_deg);
    let a_t_0 = setup.tx_steering(theta0_deg);
    let rt_0 = transpose_apply(r_s, &a_t_0);
    let numer = dot(&a_t_theta, &rt_0).norm_sqr();
    let rt_theta = transpose_apply(r_s, &a_t_theta);
    let denom = dot(&a_t_theta, &rt_theta).re;

    let scale = r_s.trace_real().abs() * setup.tx_count as f64;
    if !(denom > 1e-15 * scale.max(f64::MIN_POSITIVE)) {
        return Err(MismatchError::DegenerateDenominator { theta_deg });
    }
    Ok(n_samples as f64 * rx_gain * numer / denom)
}

/// Closed form for ideally orthogonal transmission (R_s = I):
/// N·|a_Rᴴ(θ)a_R(θ₀)|²·|a_Tᴴ(θ)a_T(θ₀)|² / (M_R·M).
pub fn g_tr_orthogonal(
    setup: &MismatchSetup,
    n_samples: usize,
    theta_deg: f64,
    theta0_deg: f64,
) -> f64 {
    let rx = dot(
        &setup.rx_steering(theta_deg),
        &setup.rx_steering(theta0_deg),
    )
    .norm_sqr();
    let tx = dot(
        &setup.tx_steering(theta_deg),
        &setup.tx_steering(theta0_deg),
    )
    .norm_sqr();
    n_samples as f64 * rx * tx / (setup.rx_count as f64 * setup.tx_count as f64)
}

/// Closed form for coherent transmission with the physical beam pointed at
/// `theta_steer_deg`: N·|a_Rᴴ(θ)a_R(θ₀)|²·|a_Tᴴ(θ₀)a_T(θ_s)|² / M_R.
/// With the beam at broadside the steering weights are all ones and this is
/// the classic R_s = 𝟙 form; away from broadside the weights rotate with
/// the beam.
pub fn g_tr_coherent(
    setup: &MismatchSetup,
    n_samples: usize,
    theta_deg: f64,
    theta0_deg: f64,
    theta_steer_deg: f64,
) -> f64 {
    let rx = dot(
        &setup.rx_steering(theta_deg),
        &setup.rx_steering(theta0_deg),
    )
    .norm_sqr();
    let tx = dot(
        &setup.tx_steering(theta0_deg),
        &setup.tx_steering(theta_steer_deg),
    )
    .norm_sqr();
    n_samples as f64 * rx * tx / setup.rx_count as f64
}

/// A coherent unit-modulus code steered at `theta_steer_deg`: every antenna
/// transmits the same all-ones pulse, phase-shifted so the beam points at
/// the steering angle.
pub fn coherent_code(
    setup: &MismatchSetup,
    n_samples: usize,
    theta_steer_deg: f64,
) -> WaveformMatrix {
    let a = setup.tx_steering(theta_steer_deg);
    let mut data = Vec::with_capacity(setup.tx_count * n_samples);
    for am in &a {
        let w = am.conj();
        for _ in 0..n_samples {
            data.push(w);
        }
    }
    WaveformMatrix::from_code(&data, setup.tx_count, n_samples).expect("sized by construction")
}
