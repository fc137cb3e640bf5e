//! The complex circle manifold: the set of complex vectors with unit-modulus
//! entries, i.e. the product of L unit circles.
//!
//! Three operations make gradient descent possible directly on the manifold:
//!
//! * [`project_tangent`] removes the radial component of a vector at a
//!   feasible point, elementwise: `P(w) = w − Re{w* ∘ z} ∘ z`;
//! * [`retract`] maps any vector with nonzero entries back to unit modulus,
//!   elementwise: `R(w) = w ∘ 1/|w|`;
//! * [`psi_decomposition`] recovers the non-negative radial excess ψ with
//!   `x̄ = (I + Ψ)·R(x̄)`, the identity the retraction descent bound rests on.

use crate::linalg::norms;
use crate::C64;
use thiserror::Error;

/// Accepted deviation of |x_l| from 1 for a feasible point.
pub const FEASIBILITY_TOL: f64 = 1e-10;
/// Accepted |Re(v_l* x_l)| for a tangent vector.
pub const TANGENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ManifoldError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("entry {index} has modulus {modulus:.3e}, outside the unit circle tolerance")]
    NotFeasible { index: usize, modulus: f64 },
    #[error("entry {index} has (near-)zero modulus; tangent updates keep |x_l| >= 1, so this signals a caller bug")]
    ZeroModulusElement { index: usize },
    #[error("psi[{index}] = {value:.3e} < 0; the input was not produced by a tangent-space update from a feasible point")]
    NegativePsi { index: usize, value: f64 },
}

/// A point on the complex circle manifold: every entry within
/// [`FEASIBILITY_TOL`] of unit modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasiblePoint(Vec<C64>);

impl FeasiblePoint {
    pub fn new(x: Vec<C64>) -> Result<Self, ManifoldError> {
        for (i, v) in x.iter().enumerate() {
            let m = v.norm();
            if !m.is_finite() || (m - 1.0).abs() > FEASIBILITY_TOL {
                return Err(ManifoldError::NotFeasible {
                    index: i,
                    modulus: m,
                });
            }
        }
        Ok(Self(x))
    }

    /// Unit-modulus point from phases (radians).
    pub fn from_phases(phases: &[f64]) -> Self {
        Self(phases.iter().map(|&p| C64::from_polar(1.0, p)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }

    /// Maintenance pass: renormalizes every entry to exact unit modulus.
    /// Repeated floating-point normalization drifts at ~1e-16 per step, so
    /// this runs after every retraction to stop accumulation over thousands
    /// of iterations.
    pub fn renormalize(&mut self) {
        for v in &mut self.0 {
            let m = v.norm();
            *v /= m;
        }
    }
}

/// A tangent vector at a feasible base point: `Re(v_l* x_l) = 0` per element.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    base: FeasiblePoint,
    v: Vec<C64>,
}

impl TangentVector {
    pub fn base(&self) -> &FeasiblePoint {
        &self.base
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.v
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.v
    }

    pub fn norm_l2(&self) -> f64 {
        norms(&self.v).l2
    }

    /// `base + scale·v`, the descent update living on the tangent plane.
    pub fn step_from_base(&self, scale: f64) -> Vec<C64> {
        self.base
            .as_slice()
            .iter()
            .zip(self.v.iter())
            .map(|(x, v)| x + v * scale)
            .collect()
    }
}

/// Projects `w` elementwise onto the tangent space at `z`:
/// `P(w)_l = w_l − Re(w_l* z_l)·z_l`.
///
/// O(L) with no intermediate matrix; agrees with the equivalent diagonal
/// reformulation `½(w − ddiag(z zᵀ) w*)` to rounding (pinned by a test).
pub fn project_tangent(z: &FeasiblePoint, w: &[C64]) -> Result<TangentVector, ManifoldError> {
    if w.len() != z.len() {
        return Err(ManifoldError::DimensionMismatch {
            expected: z.len(),
            actual: w.len(),
        });
    }
    let v = z
        .as_slice()
        .iter()
        .zip(w.iter())
        .map(|(zl, wl)| {
            let radial = (wl.conj() * zl).re;
            wl - zl * radial
        })
        .collect();
    Ok(TangentVector { base: z.clone(), v })
}

/// Retraction: elementwise normalization `w_l / |w_l|`, preserving phases.
///
/// Errors with [`ManifoldError::ZeroModulusElement`] when any modulus falls
/// below 1e-300: for tangent-space updates from a feasible point the entry
/// moduli satisfy |w_l| >= 1, so a zero means the input was not such an
/// update, and assigning an arbitrary phase would mask that bug.
pub fn retract(w: &[C64]) -> Result<FeasiblePoint, ManifoldError> {
    let mut out = Vec::with_capacity(w.len());
    for (i, v) in w.iter().enumerate() {
        let m = v.norm();
        if !(m > 1e-300) {
            return Err(ManifoldError::ZeroModulusElement { index: i });
        }
        out.push(v / m);
    }
    let mut p = FeasiblePoint(out);
    p.renormalize();
    Ok(p)
}

/// Radial-excess decomposition of a tangent-space update: given
/// `x_next = retract(x_bar)`, returns the diagonal ψ with
/// `x̄_l = (1 + ψ_l)·x_next_l` and `ψ_l = |x̄_l| − 1 ≥ 0`.
pub fn psi_decomposition(x_bar: &[C64], x_next: &FeasiblePoint) -> Result<Vec<f64>, ManifoldError> {
    if x_bar.len() != x_next.len() {
        return Err(ManifoldError::DimensionMismatch {
            expected: x_next.len(),
            actual: x_bar.len(),
        });
    }
    let mut psi = Vec::with_capacity(x_bar.len());
    for (i, v) in x_bar.iter().enumerate() {
        let p = v.norm() - 1.0;
        if p < -FEASIBILITY_TOL {
            return Err(ManifoldError::NegativePsi { index: i, value: p });
        }
        psi.push(p.max(0.0));
    }
    Ok(psi)
}
