//! Orthogonality across antennas: the Frobenius penalty α‖XᴴX − N·I‖²_F on
//! the N×M waveform matrix view, its gradient, the lag-zero integrated
//! sidelobe level, the LFM reference set, and the penalised design loop.
//!
//! On the constant-modulus set the diagonal of XᴴX is pinned at N, so the
//! penalty measures exactly the cross-antenna correlations.

use crate::beampattern::{
    alternating_design, assemble_interaction, desired_from_scenario, BeamError, OuterTrace,
    RadarConfig, Scenario,
};
use crate::linalg::LinalgError;
use crate::manifold::FeasiblePoint;
use crate::solver::{
    pdr_solve_with, safe_gamma, safe_step_size, CostFunction, QuadraticCost, SolverParams,
    SAFE_MARGIN,
};
use crate::C64;
use thiserror::Error;

/// dB clamp standing in for −∞ when a set is orthogonal to rounding.
pub const ISL_FLOOR_DB: f64 = -350.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OrthoError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("waveform matrix needs {expected} entries, got {actual}")]
    BadCodeLength { expected: usize, actual: usize },
    #[error("LFM set requires M <= N (offset tones collide otherwise), got M={m}, N={n}")]
    TooManyAntennas { m: usize, n: usize },
}

/// N×M waveform matrix view of a code: column m holds antenna m's N
/// samples, so the storage is byte-for-byte the antenna-major code and
/// reshaping round-trips exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformMatrix {
    samples: usize,
    antennas: usize,
    data: Vec<C64>, // column-major: data[m*N + n] = X[n, m]
}

impl WaveformMatrix {
    pub fn from_code(x: &[C64], antennas: usize, samples: usize) -> Result<Self, OrthoError> {
        if x.len() != antennas * samples {
            return Err(OrthoError::BadCodeLength {
                expected: antennas * samples,
                actual: x.len(),
            });
        }
        Ok(Self {
            samples,
            antennas,
            data: x.to_vec(),
        })
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn column(&self, m: usize) -> &[C64] {
        &self.data[m * self.samples..(m + 1) * self.samples]
    }

    pub fn to_code(&self) -> Vec<C64> {
        self.data.clone()
    }

    /// Gram matrix XᴴX (M×M, row-major).
    pub fn gram(&self) -> Vec<C64> {
        let m = self.antennas;
        let mut g = vec![C64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                let mut acc = C64::new(0.0, 0.0);
                for (a, b) in self.column(i).iter().zip(self.column(j)) {
                    acc += a.conj() * b;
                }
                g[i * m + j] = acc;
            }
        }
        g
    }

    /// ‖XᴴX − N·I‖²_F.
    pub fn gram_defect_sq(&self) -> f64 {
        let m = self.antennas;
        let n = self.samples as f64;
        let g = self.gram();
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut v = g[i * m + j];
                if i == j {
                    v -= C64::new(n, 0.0);
                }
                acc += v.norm_sqr();
            }
        }
        acc
    }
}

/// α‖XᴴX − N·I‖²_F; zero exactly when the columns are orthogonal with
/// squared norm N each.
pub fn penalty_value(x: &WaveformMatrix, alpha: f64) -> f64 {
    alpha * x.gram_defect_sq()
}

/// Euclidean gradient of the penalty in code layout:
/// 4α·vec(X(XᴴX − N·I)).
///
/// On the constant-modulus set the extra −4αN·x term relative to the bare
/// cubic form 4α·vec(XXᴴX) is radial, so the two agree after tangent
/// projection at every feasible point; off the manifold only this full form
/// passes finite-difference checks.
pub fn penalty_gradient(x: &WaveformMatrix, alpha: f64) -> Vec<C64> {
    let m = x.antennas;
    let n = x.samples;
    let mut g = x.gram();
    for i in 0..m {
        g[i * m + i] -= C64::new(n as f64, 0.0);
    }
    // out column m = Σ_k X[:,k]·G[k,m]
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    for mm in 0..m {
        for k in 0..m {
            let w = g[k * m + mm] * 4.0 * alpha;
            if w.norm_sqr() == 0.0 {
                continue;
            }
            let col = x.column(k);
            let dst = &mut out[mm * n..(mm + 1) * n];
            for (o, v) in dst.iter_mut().zip(col.iter()) {
                *o += v * w;
            }
        }
    }
    out
}

/// Gradient of the penalised cost h = f̄ + α‖XᴴX − N·I‖²_F.
pub fn gradient_h(
    cost: &QuadraticCost,
    x: &WaveformMatrix,
    alpha: f64,
) -> Result<Vec<C64>, OrthoError> {
    let code = x.to_code();
    if code.len() != cost.dim() {
        return Err(OrthoError::BadCodeLength {
            expected: cost.dim(),
            actual: code.len(),
        });
    }
    let mut g = cost
        .gradient(&code)
        .map_err(|_| OrthoError::BadCodeLength {
            expected: cost.dim(),
            actual: code.len(),
        })?;
    let pg = penalty_gradient(x, alpha);
    for (a, b) in g.iter_mut().zip(pg.iter()) {
        *a += b;
    }
    Ok(g)
}

/// Lag-zero integrated sidelobe level in dB:
/// 20·log10(‖XᴴX − N·I‖_F / √(M·N²)), clamped at [`ISL_FLOOR_DB`] so
/// machine-precision-orthogonal sets serialize cleanly.
pub fn isl0_db(x: &WaveformMatrix) -> f64 {
    let m = x.antennas as f64;
    let n = x.samples as f64;
    let ratio = x.gram_defect_sq().sqrt() / (m * n * n).sqrt();
    if ratio <= 0.0 {
        return ISL_FLOOR_DB;
    }
    (20.0 * ratio.log10()).max(ISL_FLOOR_DB)
}

/// Linear-frequency-modulated reference set: x_m(n) = e^{jπn²/N}·e^{j2πmn/N}.
/// Columns are exactly orthogonal (the chirp factor cancels in every inner
/// product, leaving a full-period geometric series) and every entry has
/// unit modulus.
pub fn lfm_set(antennas: usize, samples: usize) -> Result<WaveformMatrix, OrthoError> {
    if antennas > samples {
        return Err(OrthoError::TooManyAntennas {
            m: antennas,
            n: samples,
        });
    }
    let n = samples as f64;
    let mut data = Vec::with_capacity(antennas * samples);
    for m in 0..antennas {
        for k in 0..samples {
            let kf = k as f64;
            let phase =
                std::f64::consts::PI * kf * kf / n + 2.0 * std::f64::consts::PI * m as f64 * kf / n;
            data.push(C64::from_polar(1.0, phase));
        }
    }
    WaveformMatrix::from_code(&data, antennas, samples)
}

/// Quadratic matching cost plus the orthogonality penalty, for the generic
/// descent loop.
pub struct PenalizedCost {
    quad: QuadraticCost,
    alpha: f64,
    antennas: usize,
    samples: usize,
}

impl PenalizedCost {
    pub fn new(quad: QuadraticCost, alpha: f64, antennas: usize, samples: usize) -> Self {
        debug_assert_eq!(quad.dim(), antennas * samples);
        Self {
            quad,
            alpha,
            antennas,
            samples,
        }
    }
}

impl CostFunction for PenalizedCost {
    fn dim(&self) -> usize {
        self.quad.dim()
    }

    fn value(&self, x: &[C64]) -> f64 {
        let xm = WaveformMatrix::from_code(x, self.antennas, self.samples)
            .expect("dimension fixed by construction");
        self.quad.value(x) + penalty_value(&xm, self.alpha)
    }

    fn euclidean_gradient(&self, x: &[C64]) -> Vec<C64> {
        let xm = WaveformMatrix::from_code(x, self.antennas, self.samples)
            .expect("dimension fixed by construction");
        gradient_h(&self.quad, &xm, self.alpha).expect("dimension fixed by construction")
    }
}

/// Alternating design with the orthogonality penalty active in the inner
/// solver. No descent proof covers the quartic term, so monotonicity is
/// never asserted; in safe mode β and γ are taken from the quadratic
/// part's bounds.
pub fn design_beampattern_penalized(
    cfg: &RadarConfig,
    scenario: &Scenario,
    params: &SolverParams,
    zeta: f64,
    outer_max: usize,
    alpha: f64,
    x0: &FeasiblePoint,
) -> Result<(FeasiblePoint, OuterTrace), BeamError> {
    scenario.validate(cfg)?;
    let interaction = assemble_interaction(cfg);
    let pattern = desired_from_scenario(cfg, scenario);
    let antennas = cfg.tx_count;
    let samples = cfg.samples;
    alternating_design(cfg, interaction, pattern, zeta, outer_max, x0, |cost, x| {
        let (beta, quad) = if params.safe_mode {
            let gamma = safe_gamma(cost.p(), cost.q());
            let shifted = cost.with_gamma(gamma);
            (safe_step_size(&shifted, SAFE_MARGIN), shifted)
        } else {
            (params.beta, cost.clone())
        };
        let pen = PenalizedCost::new(quad, alpha, antennas, samples);
        let inner_params = SolverParams {
            beta,
            safe_mode: false,
            assert_monotone: false,
            ..*params
        };
        Ok(pdr_solve_with(&pen, x, &inner_params)?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, norms};
    use crate::manifold::project_tangent;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn code_from_seed(l: usize, seed: f64) -> Vec<C64> {
        (0..l)
            .map(|i| {
                c(
                    (seed + 0.37 * i as f64).cos(),
                    (seed * 1.3 - 0.53 * i as f64).sin(),
                )
            })
            .collect()
    }

    fn unit_code_from_seed(l: usize, seed: f64) -> Vec<C64> {
        (0..l)
            .map(|i| C64::from_polar(1.0, (seed * 12.9 + i as f64 * 7.81).sin() * 6.0))
            .collect()
    }

    /// The bare cubic form 4α·vec(XXᴴX); differs from the production
    /// gradient by the radial term −4αN·x at feasible points.
    fn cubic_form_gradient(x: &WaveformMatrix, alpha: f64) -> Vec<C64> {
        let m = x.antennas();
        let n = x.samples();
        let g = x.gram();
        let mut out = vec![c(0.0, 0.0); m * n];
        for mm in 0..m {
            for k in 0..m {
                let w = g[k * m + mm] * 4.0 * alpha;
                let col = x.column(k);
                let dst = &mut out[mm * n..(mm + 1) * n];
                for (o, v) in dst.iter_mut().zip(col.iter()) {
                    *o += v * w;
                }
            }
        }
        out
    }

    #[test]
    fn roundtrip_code_layout() {
        let x = code_from_seed(12, 0.5);
        let xm = WaveformMatrix::from_code(&x, 3, 4).unwrap();
        assert_eq!(xm.to_code(), x);
        assert_eq!(xm.column(1), &x[4..8]);
    }

    #[test]
    fn penalty_zero_for_orthogonal_columns() {
        let xm = lfm_set(4, 8).unwrap();
        assert!(penalty_value(&xm, 3.0).abs() <= 1e-18);
    }

    #[test]
    fn penalty_all_ones_closed_form() {
        let (m, n) = (5, 7);
        let x = vec![c(1.0, 0.0); m * n];
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();
        let alpha = 2.5;
        let expect = alpha * (n * n) as f64 * (m * (m - 1)) as f64;
        assert!((penalty_value(&xm, alpha) - expect).abs() <= 1e-9 * expect);
    }

    #[test]
    fn penalty_matches_naive_frobenius_oracle() {
        let (m, n) = (3, 5);
        let x = code_from_seed(m * n, 1.9);
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();
        // naive elementwise double loop over the Gram defect
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let mut gij = c(0.0, 0.0);
                for k in 0..n {
                    gij += x[i * n + k].conj() * x[j * n + k];
                }
                if i == j {
                    gij -= c(n as f64, 0.0);
                }
                acc += gij.norm_sqr();
            }
        }
        let alpha = 0.8;
        assert!((penalty_value(&xm, alpha) - alpha * acc).abs() <= 1e-9 * (alpha * acc).max(1.0));
    }

    #[test]
    fn penalty_gradient_zero_at_full_power_orthogonal_set() {
        let xm = lfm_set(3, 6).unwrap();
        let g = penalty_gradient(&xm, 5.0);
        assert!(norms(&g).l2 <= 1e-10);

        let x = code_from_seed(12, 2.2);
        let xm = WaveformMatrix::from_code(&x, 3, 4).unwrap();
        assert!(norms(&penalty_gradient(&xm, 0.0)).l2 == 0.0);
    }

    #[test]
    fn penalty_gradient_finite_difference_check() {
        let (m, n) = (3, 4);
        let x = code_from_seed(m * n, 0.8);
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();
        let alpha = 1.7;
        let g = penalty_gradient(&xm, alpha);
        let h = 1e-6;
        for dir in 0..20 {
            let delta = code_from_seed(m * n, dir as f64 * 0.43 + 5.0);
            let dn = norms(&delta).l2;
            let delta: Vec<C64> = delta.into_iter().map(|d| d / dn).collect();
            let xp: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a + d * h).collect();
            let xm_p = WaveformMatrix::from_code(&xp, m, n).unwrap();
            let xm_m: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a - d * h).collect();
            let xm_m = WaveformMatrix::from_code(&xm_m, m, n).unwrap();
            let fd = (penalty_value(&xm_p, alpha) - penalty_value(&xm_m, alpha)) / (2.0 * h);
            let analytic = dot(&g, &delta).re;
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "dir {dir}: fd {fd} analytic {analytic}"
            );
        }
    }

    #[test]
    fn projected_gradients_agree_at_feasible_points() {
        // P(4α·vec(XXᴴX)) == P(4α·vec(X(XᴴX − NI))) on the manifold: the
        // difference 4αN·x is radial there.
        let (m, n) = (3, 5);
        for trial in 0..10 {
            let xv = unit_code_from_seed(m * n, trial as f64 * 0.7 + 0.1);
            let z = FeasiblePoint::new(xv.clone()).unwrap();
            let xm = WaveformMatrix::from_code(&xv, m, n).unwrap();
            let alpha = 2.0;
            let full = penalty_gradient(&xm, alpha);
            let cubic = cubic_form_gradient(&xm, alpha);
            let p_full = project_tangent(&z, &full).unwrap();
            let p_cubic = project_tangent(&z, &cubic).unwrap();
            for (a, b) in p_full.as_slice().iter().zip(p_cubic.as_slice()) {
                assert!((a - b).norm() <= 1e-10 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn isl0_values() {
        let lfm = lfm_set(10, 32).unwrap();
        assert!(isl0_db(&lfm) <= -200.0);

        let m = 10;
        let ones = vec![c(1.0, 0.0); m * 8];
        let xm = WaveformMatrix::from_code(&ones, m, 8).unwrap();
        let expect = 10.0 * ((m - 1) as f64).log10();
        assert!((isl0_db(&xm) - expect).abs() <= 1e-9);
    }

    #[test]
    fn isl0_clamps_exact_orthogonality() {
        // Scaled standard-basis columns give XᴴX = N·I with no rounding at
        // all, so the Gram defect is exactly zero and the dB value clamps.
        let (m, n) = (2, 4);
        let mut x = vec![c(0.0, 0.0); m * n];
        x[0] = c(2.0, 0.0); // column 0 = 2·e_0, squared norm 4 = N
        x[n + 1] = c(2.0, 0.0); // column 1 = 2·e_1
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();
        assert_eq!(penalty_value(&xm, 1.0), 0.0);
        assert_eq!(isl0_db(&xm), ISL_FLOOR_DB);
    }

    #[test]
    fn isl0_invariant_under_right_unitary() {
        let (m, n) = (4, 9);
        let x = code_from_seed(m * n, 3.3);
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();
        // Build a unitary by Gram-Schmidt on a deterministic matrix.
        let mut u: Vec<Vec<C64>> = (0..m)
            .map(|i| code_from_seed(m, i as f64 * 1.7 + 0.9))
            .collect();
        for i in 0..m {
            for j in 0..i {
                let proj = dot(&u[j], &u[i]);
                let uj = u[j].clone();
                for (a, b) in u[i].iter_mut().zip(uj.iter()) {
                    *a -= b * proj;
                }
            }
            let nn = norms(&u[i]).l2;
            for a in u[i].iter_mut() {
                *a /= nn;
            }
        }
        // y = X U, column q of Y = Σ_k col_k(X)·U[k][q]
        let mut y = vec![c(0.0, 0.0); m * n];
        for q in 0..m {
            for k in 0..m {
                let w = u[k][q];
                for s in 0..n {
                    y[q * n + s] += x[k * n + s] * w;
                }
            }
        }
        let ym = WaveformMatrix::from_code(&y, m, n).unwrap();
        let a = isl0_db(&xm);
        let b = isl0_db(&ym);
        assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
    }

    #[test]
    fn lfm_unit_modulus_and_size_guard() {
        let lfm = lfm_set(10, 32).unwrap();
        for v in lfm.to_code() {
            assert!((v.norm() - 1.0).abs() <= 1e-15);
        }
        assert!(matches!(
            lfm_set(9, 8),
            Err(OrthoError::TooManyAntennas { .. })
        ));
    }

    #[test]
    fn gradient_h_reduces_to_quadratic_gradient() {
        use crate::linalg::HermitianMatrix;
        let (m, n) = (2, 4);
        let l = m * n;
        let p = HermitianMatrix::identity(l);
        let q = code_from_seed(l, 0.2);
        let quad = QuadraticCost::new(p, q, 0.0, 0.3).unwrap();
        let x = code_from_seed(l, 4.4);
        let xm = WaveformMatrix::from_code(&x, m, n).unwrap();

        // alpha = 0 → exactly the quadratic gradient
        let g0 = gradient_h(&quad, &xm, 0.0).unwrap();
        let gq = quad.gradient(&x).unwrap();
        for (a, b) in g0.iter().zip(gq.iter()) {
            assert!((a - b).norm() == 0.0);
        }

        // orthogonal full-power X → penalty stationary, same reduction
        let lfm = lfm_set(m, n).unwrap();
        let code = lfm.to_code();
        let g1 = gradient_h(&quad, &lfm, 7.0).unwrap();
        let gq = quad.gradient(&code).unwrap();
        for (a, b) in g1.iter().zip(gq.iter()) {
            assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn gradient_h_finite_difference_check() {
        use crate::linalg::HermitianMatrix;
        let (m, n) = (2, 4);
        let l = m * n;
        let mut pdata = vec![c(0.0, 0.0); l * l];
        for i in 0..l {
            pdata[i * l + i] = c(1.0 + 0.1 * i as f64, 0.0);
        }
        let p = HermitianMatrix::new(l, pdata).unwrap();
        let quad = QuadraticCost::new(p, code_from_seed(l, 1.5), 0.5, 0.2).unwrap();
        let alpha = 0.9;
        let pen = PenalizedCost::new(quad, alpha, m, n);
        let x = code_from_seed(l, 2.8);
        let g = pen.euclidean_gradient(&x);
        let h = 1e-6;
        for dir in 0..20 {
            let delta = code_from_seed(l, dir as f64 * 0.77 + 9.0);
            let dn = norms(&delta).l2;
            let delta: Vec<C64> = delta.into_iter().map(|d| d / dn).collect();
            let xp: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a + d * h).collect();
            let xm_: Vec<C64> = x.iter().zip(&delta).map(|(a, d)| a - d * h).collect();
            let fd = (pen.value(&xp) - pen.value(&xm_)) / (2.0 * h);
            let analytic = dot(&g, &delta).re;
            assert!(
                (fd - analytic).abs() <= 1e-6 * analytic.abs().max(1.0),
                "dir {dir}: fd {fd} analytic {analytic}"
            );
        }
    }
}
