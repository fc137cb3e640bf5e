//! Wideband MIMO radar transmit-beampattern design under the constant
//! modulus constraint, solved by direct gradient descent on the complex
//! circle manifold (projection onto the tangent space, descent step,
//! retraction back to unit modulus).
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — dense complex Hermitian kernels and dominant-eigenvalue
//!   estimation (power iteration),
//! * [`manifold`] — the complex circle manifold: feasibility, tangent-space
//!   projection, retraction and the radial-excess decomposition,
//! * [`solver`] — the projection-descent-retraction loop for quadratic
//!   costs, with safe step-size/regulariser bounds that guarantee monotone
//!   descent,
//! * [`beampattern`] — steering vectors, DFT selection, assembly of the
//!   quadratic matching cost, the phase-alternation outer loop and the
//!   unconstrained least-squares baseline,
//! * [`ortho`] — orthogonality penalty across antennas, ISL₀ metric, LFM
//!   reference set, penalised design,
//! * [`mismatch`] — transmit-receive pattern under steering/target
//!   direction mismatch,
//! * [`config`], [`report`], [`commands`] — CLI front end, file formats and
//!   experiment orchestration.
//!
//! # Example
//!
//! Design a small constant-modulus code against a wedge-shaped target and
//! measure its deviation:
//!
//! ```
//! use pdr_radar::beampattern::{self, RadarConfig, Region, Scenario};
//! use pdr_radar::solver::SolverParams;
//!
//! let cfg = RadarConfig::new(2, 4, 1.0e9, 200.0e6, 0.13, vec![45.0, 90.0, 135.0]).unwrap();
//! let scenario = Scenario {
//!     name: "wedge".into(),
//!     regions: vec![Region {
//!         theta_deg: (60.0, 120.0),
//!         freq_hz: (0.9e9, 1.1e9),
//!         amplitude: 1.0,
//!     }],
//!     default_amplitude: 0.0,
//! };
//! let x0 = beampattern::seeded_code(cfg.code_len(), 7);
//! let params = SolverParams::safe(1e-10, 10_000);
//! let (x, trace) =
//!     beampattern::design_beampattern(&cfg, &scenario, &params, 1e-6, 10, &x0).unwrap();
//! assert!(trace.total_inner_iterations > 0);
//! let dev = beampattern::deviation_db(&cfg, &scenario, x.as_slice()).unwrap();
//! assert!(dev.is_finite());
//! ```

pub mod beampattern;
pub mod commands;
pub mod config;
pub mod linalg;
pub mod manifold;
pub mod mismatch;
pub mod ortho;
pub mod report;
pub mod solver;

pub use num_complex::Complex64 as C64;

/// Crate version embedded in serialized outputs for provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
