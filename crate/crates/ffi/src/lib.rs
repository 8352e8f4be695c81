//! C ABI over the solver: opaque grid handles, status codes, and flat
//! buffers. The generated header lands in `include/biharm.h`.
//!
//! Every function returns a `BiharmStatus`; on any non-`Ok` status the
//! thread-local message from `biharm_last_error` describes the failure.
//! Pointers returned by this library are freed by the matching `_free`
//! function, never by the caller's allocator.

use biharm::analysis::{convergence_study, manufactured_pair, verify_suite};
use biharm::norms::h2h_norm;
use biharm::ops::BcScheme;
use biharm::report::ReportFormat;
use biharm::solve::{solve, CgOptions};
use biharm::{Error, GridSpec};
use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::str::FromStr;
use std::sync::Arc;

/// Status codes mirroring the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiharmStatus {
    Ok = 0,
    InvalidArgument = 1,
    NumericalFailure = 2,
    NullPointer = 3,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> BiharmStatus {
    match err {
        Error::CgFailure { .. }
        | Error::ConstructionDefect(_)
        | Error::QuadratureFailure { .. } => BiharmStatus::NumericalFailure,
        _ => BiharmStatus::InvalidArgument,
    }
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn biharm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Opaque grid handle.
pub struct BiharmGrid {
    grid: Arc<GridSpec>,
}

/// Create a grid for the unit cube in dimension `n` with spacing `1/m`.
///
/// # Safety
/// `out` must be a valid pointer to a grid-handle slot.
#[no_mangle]
pub unsafe extern "C" fn biharm_grid_new(
    n: usize,
    m: i64,
    out: *mut *mut BiharmGrid,
) -> BiharmStatus {
    if out.is_null() {
        return BiharmStatus::NullPointer;
    }
    match GridSpec::new(n, m) {
        Ok(grid) => {
            *out = Box::into_raw(Box::new(BiharmGrid { grid }));
            BiharmStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// # Safety
/// `grid` must come from `biharm_grid_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn biharm_grid_free(grid: *mut BiharmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Number of interior unknowns of a grid.
///
/// # Safety
/// `grid` must be a live handle from `biharm_grid_new`.
#[no_mangle]
pub unsafe extern "C" fn biharm_interior_len(grid: *const BiharmGrid) -> usize {
    if grid.is_null() {
        return 0;
    }
    (*grid).grid.interior_slots().len()
}

fn parse_utf8<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, BiharmStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return Err(BiharmStatus::NullPointer);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        BiharmStatus::InvalidArgument
    })
}

/// Summary of one solve.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct BiharmSolveStats {
    pub iterations: usize,
    pub residual: c_double,
    pub error_h2h: c_double,
}

/// Solve one manufactured case on a grid. When `out_values` is non-null it
/// receives the interior solution in lexicographic order (`out_len` must be
/// `biharm_interior_len(grid)`).
///
/// # Safety
/// `grid` must be live; `case_name`/`scheme` must be NUL-terminated strings;
/// `out_values`, when non-null, must point to `out_len` writable doubles;
/// `stats`, when non-null, must point to a writable stats record.
#[no_mangle]
pub unsafe extern "C" fn biharm_solve_case(
    grid: *const BiharmGrid,
    case_name: *const c_char,
    scheme: *const c_char,
    tol: c_double,
    maxit: usize,
    out_values: *mut c_double,
    out_len: usize,
    stats: *mut BiharmSolveStats,
) -> BiharmStatus {
    if grid.is_null() {
        return BiharmStatus::NullPointer;
    }
    let grid = &(*grid).grid;
    let case_name = match parse_utf8(case_name, "case name") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let scheme_name = match parse_utf8(scheme, "scheme") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let run = || -> Result<(Vec<f64>, BiharmSolveStats), Error> {
        let case = manufactured_pair(case_name, grid.dim())?;
        let scheme = BcScheme::from_str(scheme_name)?;
        let opts = CgOptions {
            tol,
            maxit: if maxit == 0 {
                CgOptions::defaults_for(grid.m()).maxit
            } else {
                maxit
            },
            jacobi: false,
        };
        let source = case.source();
        let out = solve(&source, grid, scheme, opts)?;
        let err = h2h_norm(&case.sample_u(grid).sub(&out.field)?);
        let interior: Vec<f64> = grid
            .interior_slots()
            .iter()
            .map(|&s| out.field.get(s))
            .collect();
        Ok((
            interior,
            BiharmSolveStats {
                iterations: out.iterations,
                residual: out.residual,
                error_h2h: err,
            },
        ))
    };
    match run() {
        Ok((interior, st)) => {
            if !out_values.is_null() {
                if out_len != interior.len() {
                    set_error("output buffer length does not match interior size");
                    return BiharmStatus::InvalidArgument;
                }
                std::ptr::copy_nonoverlapping(interior.as_ptr(), out_values, interior.len());
            }
            if !stats.is_null() {
                *stats = st;
            }
            BiharmStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Run a convergence study and return the report serialized as JSON
/// (`format` 0) or CSV (`format` 1). Free the result with
/// `biharm_string_free`.
///
/// # Safety
/// String arguments must be NUL-terminated; `m_list` must point to
/// `m_count` readable values; `out` must be a writable pointer slot.
#[no_mangle]
pub unsafe extern "C" fn biharm_study(
    dim: usize,
    case_name: *const c_char,
    scheme: *const c_char,
    m_list: *const i64,
    m_count: usize,
    tol: c_double,
    format: c_int,
    out: *mut *mut c_char,
) -> BiharmStatus {
    if out.is_null() || m_list.is_null() {
        return BiharmStatus::NullPointer;
    }
    let case_name = match parse_utf8(case_name, "case name") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let scheme_name = match parse_utf8(scheme, "scheme") {
        Ok(s) => s,
        Err(st) => return st,
    };
    let ms = std::slice::from_raw_parts(m_list, m_count);
    let run = || -> Result<(String, bool), Error> {
        let case = manufactured_pair(case_name, dim)?;
        let scheme = BcScheme::from_str(scheme_name)?;
        let report = convergence_study(&case, dim, scheme, ms, tol, None)?;
        let fmt = match format {
            0 => ReportFormat::Json,
            1 => ReportFormat::Csv,
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown format code {other} (0 = json, 1 = csv)"
                )))
            }
        };
        let failed = report.failure.is_some();
        Ok((report.emit(fmt)?, failed))
    };
    match run() {
        Ok((text, failed)) => {
            let c = CString::new(text).unwrap_or_default();
            *out = c.into_raw();
            if failed {
                set_error("ladder stopped early; see the report's failure field");
                BiharmStatus::NumericalFailure
            } else {
                BiharmStatus::Ok
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// Run the identity probe suite; returns the worst residual-to-threshold
/// ratio through `worst` (at most 1.0 means every probe passed).
///
/// # Safety
/// `worst`, when non-null, must point to a writable double.
#[no_mangle]
pub unsafe extern "C" fn biharm_verify(
    dim: usize,
    m: i64,
    seed: u64,
    worst: *mut c_double,
) -> BiharmStatus {
    match verify_suite(dim, m, seed) {
        Ok(lines) => {
            let mut ratio: f64 = 0.0;
            let mut all_pass = true;
            for l in &lines {
                all_pass &= l.pass;
                if l.threshold.is_finite() && l.threshold > 0.0 {
                    ratio = ratio.max(l.value / l.threshold);
                }
            }
            if !worst.is_null() {
                *worst = ratio;
            }
            if all_pass {
                BiharmStatus::Ok
            } else {
                set_error("identity residual above tolerance");
                BiharmStatus::NumericalFailure
            }
        }
        Err(e) => {
            set_error(&e.to_string());
            status_of(&e)
        }
    }
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn biharm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
