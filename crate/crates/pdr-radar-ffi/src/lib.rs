//! C ABI for the beampattern design library.
//!
//! Conventions:
//! * every fallible call returns a [`PdrStatus`]; `PDR_STATUS_OK` is 0,
//! * results live behind opaque handles (`PdrDesign`) with explicit getters
//!   and a `_free` function,
//! * complex buffers are split into `re`/`im` arrays of equal length,
//! * [`pdr_last_error_message`] returns a thread-local description of the
//!   most recent failure on the calling thread.
//!
//! The generated header lives at `include/pdr_radar.h`.

use pdr_radar::beampattern::{deviation_db, seeded_code};
use pdr_radar::commands::AppError;
use pdr_radar::config::RunConfig;
use pdr_radar::ortho::{design_beampattern_penalized, isl0_db, lfm_set, WaveformMatrix};
use pdr_radar::C64;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdrStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    SolverFailure = 3,
    BufferTooSmall = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| {
        *e.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn app_error_status(e: &AppError) -> PdrStatus {
    match e {
        AppError::Config(_) => PdrStatus::InvalidArgument,
        AppError::Solver(_) => PdrStatus::SolverFailure,
        AppError::Io(_) => PdrStatus::InvalidArgument,
    }
}

/// Description of the most recent error on this thread; valid until the
/// next failing call from the same thread.
#[no_mangle]
pub extern "C" fn pdr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pdr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// A finished design run: waveform, metrics and iteration counts.
pub struct PdrDesign {
    code: Vec<C64>,
    deviation_db: f64,
    isl0_db: f64,
    outer_passes: usize,
    inner_iterations: usize,
}

unsafe fn parse_config(config_json: *const c_char) -> Result<RunConfig, PdrStatus> {
    if config_json.is_null() {
        set_error("config_json is null");
        return Err(PdrStatus::NullArgument);
    }
    let text = match CStr::from_ptr(config_json).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("config_json is not valid UTF-8");
            return Err(PdrStatus::InvalidArgument);
        }
    };
    serde_json::from_str::<RunConfig>(text).map_err(|e| {
        set_error(&format!("config parse error: {e}"));
        PdrStatus::InvalidArgument
    })
}

/// Runs the full alternating design described by a JSON run configuration
/// (the same schema the CLI consumes; `output_dir` is ignored, nothing is
/// written to disk). On success `*out` owns the result and must be released
/// with [`pdr_design_free`].
///
/// # Safety
/// `config_json` must be a valid nul-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_run(
    config_json: *const c_char,
    out: *mut *mut PdrDesign,
) -> PdrStatus {
    if out.is_null() {
        set_error("out is null");
        return PdrStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let config = match parse_config(config_json) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let run = (|| -> Result<PdrDesign, AppError> {
        let radar = config
            .radar
            .to_radar_config()
            .map_err(|e| AppError::Config(e.to_string()))?;
        let scenario = config
            .scenario
            .resolve()
            .map_err(|e| AppError::Config(e.to_string()))?;
        scenario
            .validate(&radar)
            .map_err(|e| AppError::Config(e.to_string()))?;
        let params = config.solver.to_params();
        let zeta = config.solver.zeta_for(radar.code_len());
        let x0 = seeded_code(radar.code_len(), config.seed);
        let (x_star, trace) = if config.alpha > 0.0 {
            design_beampattern_penalized(
                &radar,
                &scenario,
                &params,
                zeta,
                config.solver.outer_max,
                config.alpha,
                &x0,
            )
        } else {
            pdr_radar::beampattern::design_beampattern(
                &radar,
                &scenario,
                &params,
                zeta,
                config.solver.outer_max,
                &x0,
            )
        }
        .map_err(|e| AppError::Solver(e.to_string()))?;
        let code = x_star.into_vec();
        let dev =
            deviation_db(&radar, &scenario, &code).map_err(|e| AppError::Solver(e.to_string()))?;
        let xm = WaveformMatrix::from_code(&code, radar.tx_count, radar.samples)
            .expect("code length fixed by construction");
        Ok(PdrDesign {
            deviation_db: dev,
            isl0_db: isl0_db(&xm),
            outer_passes: trace.passes.len(),
            inner_iterations: trace.total_inner_iterations,
            code,
        })
    })();
    match run {
        Ok(d) => {
            *out = Box::into_raw(Box::new(d));
            PdrStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            app_error_status(&e)
        }
    }
}

/// Number of complex samples in the designed waveform.
///
/// # Safety
/// `design` must be a live handle from [`pdr_design_run`].
#[no_mangle]
pub unsafe extern "C" fn pdr_design_code_len(design: *const PdrDesign) -> usize {
    if design.is_null() {
        return 0;
    }
    (*design).code.len()
}

/// Copies the designed waveform into caller buffers of length `len`
/// (antenna-major sample order).
///
/// # Safety
/// `design` must be a live handle; `re` and `im` must point to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_waveform(
    design: *const PdrDesign,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PdrStatus {
    if design.is_null() || re.is_null() || im.is_null() {
        set_error("null argument");
        return PdrStatus::NullArgument;
    }
    let code = &(*design).code;
    if len < code.len() {
        set_error(&format!("buffer holds {len}, need {}", code.len()));
        return PdrStatus::BufferTooSmall;
    }
    for (i, v) in code.iter().enumerate() {
        *re.add(i) = v.re;
        *im.add(i) = v.im;
    }
    PdrStatus::Ok
}

/// Deviation of the design from its scenario, in dB.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_deviation_db(design: *const PdrDesign) -> f64 {
    if design.is_null() {
        return f64::NAN;
    }
    (*design).deviation_db
}

/// Lag-zero integrated sidelobe level of the design, in dB.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_isl0_db(design: *const PdrDesign) -> f64 {
    if design.is_null() {
        return f64::NAN;
    }
    (*design).isl0_db
}

/// Outer passes executed by the design loop.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_outer_passes(design: *const PdrDesign) -> usize {
    if design.is_null() {
        return 0;
    }
    (*design).outer_passes
}

/// Total inner descent steps summed over all outer passes.
///
/// # Safety
/// `design` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_inner_iterations(design: *const PdrDesign) -> usize {
    if design.is_null() {
        return 0;
    }
    (*design).inner_iterations
}

/// Releases a design handle. Passing null is a no-op.
///
/// # Safety
/// `design` must be null or a handle from [`pdr_design_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pdr_design_free(design: *mut PdrDesign) {
    if !design.is_null() {
        drop(Box::from_raw(design));
    }
}

/// Evaluates an arbitrary complex code (split re/im, antenna-major) against
/// the scenario in the JSON config: deviation and ISL0 in dB.
///
/// # Safety
/// `config_json` must be nul-terminated; `re`/`im` must hold `len` doubles;
/// the out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn pdr_evaluate_code(
    config_json: *const c_char,
    re: *const f64,
    im: *const f64,
    len: usize,
    out_deviation_db: *mut f64,
    out_isl0_db: *mut f64,
) -> PdrStatus {
    if re.is_null() || im.is_null() || out_deviation_db.is_null() || out_isl0_db.is_null() {
        set_error("null argument");
        return PdrStatus::NullArgument;
    }
    let config = match parse_config(config_json) {
        Ok(c) => c,
        Err(s) => return s,
    };
    let radar = match config.radar.to_radar_config() {
        Ok(r) => r,
        Err(e) => {
            set_error(&e.to_string());
            return PdrStatus::InvalidArgument;
        }
    };
    let scenario = match config.scenario.resolve() {
        Ok(s) => s,
        Err(e) => {
            set_error(&e.to_string());
            return PdrStatus::InvalidArgument;
        }
    };
    if len != radar.code_len() {
        set_error(&format!(
            "code length {len} does not match M*N = {}",
            radar.code_len()
        ));
        return PdrStatus::InvalidArgument;
    }
    let code: Vec<C64> = (0..len).map(|i| C64::new(*re.add(i), *im.add(i))).collect();
    match deviation_db(&radar, &scenario, &code) {
        Ok(dev) => {
            *out_deviation_db = dev;
            let xm = WaveformMatrix::from_code(&code, radar.tx_count, radar.samples)
                .expect("length checked above");
            *out_isl0_db = isl0_db(&xm);
            PdrStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            PdrStatus::SolverFailure
        }
    }
}

/// Fills caller buffers with the LFM reference set (exactly orthogonal,
/// unit modulus), antenna-major.
///
/// # Safety
/// `re` and `im` must hold `antennas*samples` doubles.
#[no_mangle]
pub unsafe extern "C" fn pdr_lfm_set(
    antennas: usize,
    samples: usize,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> PdrStatus {
    if re.is_null() || im.is_null() {
        set_error("null argument");
        return PdrStatus::NullArgument;
    }
    if len < antennas * samples {
        set_error(&format!("buffer holds {len}, need {}", antennas * samples));
        return PdrStatus::BufferTooSmall;
    }
    match lfm_set(antennas, samples) {
        Ok(xm) => {
            for (i, v) in xm.to_code().iter().enumerate() {
                *re.add(i) = v.re;
                *im.add(i) = v.im;
            }
            PdrStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            PdrStatus::InvalidArgument
        }
    }
}

/// ISL0 (dB) of a code given as split re/im buffers, antenna-major.
///
/// # Safety
/// `re`/`im` must hold `antennas*samples` doubles; `out_db` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pdr_isl0_db(
    re: *const f64,
    im: *const f64,
    antennas: usize,
    samples: usize,
    out_db: *mut f64,
) -> PdrStatus {
    if re.is_null() || im.is_null() || out_db.is_null() {
        set_error("null argument");
        return PdrStatus::NullArgument;
    }
    let code: Vec<C64> = (0..antennas * samples)
        .map(|i| C64::new(*re.add(i), *im.add(i)))
        .collect();
    match WaveformMatrix::from_code(&code, antennas, samples) {
        Ok(xm) => {
            *out_db = isl0_db(&xm);
            PdrStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            PdrStatus::InvalidArgument
        }
    }
}
