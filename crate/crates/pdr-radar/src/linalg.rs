//! Minimal dense complex linear algebra: Hermitian matrix-vector products,
//! vector norms, and dominant-eigenvalue estimation by power iteration.
//!
//! Storage is dense row-major; problem sizes here are a few hundred, so
//! O(L²) memory and O(L²) products are trivial. All types are immutable
//! values after construction and all operations are pure functions.

use crate::C64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("matrix is not Hermitian at ({row},{col}): asymmetry {asymmetry:.3e}")]
    NotHermitian {
        row: usize,
        col: usize,
        asymmetry: f64,
    },
    #[error("entry {index} is not finite")]
    NonFinite { index: usize },
}

/// Absolute tolerance on `a[i][j] - conj(a[j][i])` accepted at construction.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry within [`HERMITIAN_TOL`] and finiteness.
    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self, LinalgError> {
        if data.len() != dim * dim {
            return Err(LinalgError::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        for (idx, v) in data.iter().enumerate() {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(LinalgError::NonFinite { index: idx });
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let asym = (data[i * dim + j] - data[j * dim + i].conj()).norm();
                if asym > HERMITIAN_TOL {
                    return Err(LinalgError::NotHermitian {
                        row: i,
                        col: j,
                        asymmetry: asym,
                    });
                }
            }
        }
        Ok(Self { dim, data })
    }

    /// Builds from the upper triangle of `f(i, j)`, `i <= j`; the lower
    /// triangle is mirrored with conjugation so symmetry is exact and the
    /// diagonal is forced real.
    pub fn from_upper<F: FnMut(usize, usize) -> C64>(dim: usize, mut f: F) -> Self {
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                if i == j {
                    data[i * dim + i] = C64::new(v.re, 0.0);
                } else {
                    data[i * dim + j] = v;
                    data[j * dim + i] = v.conj();
                }
            }
        }
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = C64::new(diag[i], 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn trace_real(&self) -> f64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i].re).sum()
    }

    /// `A·v`, O(L²). Summation is a fixed-order sequential reduction, so the
    /// result is bitwise deterministic.
    pub fn matvec(&self, v: &[C64]) -> Result<Vec<C64>, LinalgError> {
        if v.len() != self.dim {
            return Err(LinalgError::DimensionMismatch {
                expected: self.dim,
                actual: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            let row = self.row(i);
            let mut acc = C64::new(0.0, 0.0);
            for (a, x) in row.iter().zip(v.iter()) {
                acc += a * x;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Real part of `vᴴ A v` (exactly real for Hermitian A up to rounding).
    pub fn quadratic_form(&self, v: &[C64]) -> Result<f64, LinalgError> {
        let av = self.matvec(v)?;
        Ok(dot(v, &av).re)
    }

    /// Dominant-eigenvalue estimate by power iteration with
    /// Rayleigh-quotient readout.
    ///
    /// The start vector is deterministic (all ones, first entry nudged by
    /// `1e-3·(1+i)`), so repeated calls give identical results without an
    /// RNG dependency. Iteration stops when the relative residual
    /// `‖Av − λ̂v‖ / λ̂` drops below `tol`; if that does not happen within
    /// `max_iter` steps (near-degenerate leading eigenvalues), the best
    /// estimate is returned with `converged = false`.
    pub fn largest_eigenvalue(&self, tol: f64, max_iter: usize) -> EigEstimate {
        assert!(tol > 0.0, "tol must be positive");
        let n = self.dim;
        let mut v: Vec<C64> = vec![C64::new(1.0, 0.0); n];
        v[0] += C64::new(1e-3, 1e-3);
        let s = norms(&v).l2;
        v.iter_mut().for_each(|x| *x /= s);

        let mut lambda = 0.0;
        for k in 1..=max_iter {
            let w = self.matvec(&v).expect("dimension fixed by construction");
            lambda = dot(&v, &w).re;
            let mut resid2 = 0.0;
            let mut wnorm2 = 0.0;
            for (wi, vi) in w.iter().zip(v.iter()) {
                resid2 += (wi - vi * lambda).norm_sqr();
                wnorm2 += wi.norm_sqr();
            }
            if resid2.sqrt() <= tol * lambda.abs() || wnorm2 == 0.0 {
                // wnorm2 == 0 only when A annihilates v; the Rayleigh
                // quotient is then an exact eigenvalue (zero).
                return EigEstimate {
                    value: lambda,
                    converged: true,
                    iterations: k,
                };
            }
            let wn = wnorm2.sqrt();
            v = w.into_iter().map(|x| x / wn).collect();
        }
        EigEstimate {
            value: lambda,
            converged: false,
            iterations: max_iter,
        }
    }
}

/// Result of a power-iteration run. `converged == false` signals
/// near-degenerate leading eigenvalues; `value` is the best estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl EigEstimate {
    /// Safe over-estimate `λ̂·(1 + 10·tol)` consumed by the step-size bound:
    /// a slight under-estimate of λ_max would invalidate it, an
    /// over-estimate only shrinks the step.
    pub fn safe_upper_bound(&self, tol: f64) -> f64 {
        self.value * (1.0 + 10.0 * tol)
    }
}

/// ℓ1/ℓ2/ℓ∞ norms of the complex moduli.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn norms(v: &[C64]) -> Norms {
    let mut l1 = 0.0;
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for x in v {
        let a = x.norm();
        l1 += a;
        sq += x.norm_sqr();
        linf = linf.max(a);
    }
    Norms {
        l1,
        l2: sq.sqrt(),
        linf,
    }
}

/// Conjugated inner product `aᴴ b`.
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * y;
    }
    acc
}
