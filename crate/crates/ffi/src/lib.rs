//! C ABI for the tvslip solver.
//!
//! The surface is handle-based: `tvs_run_config_json` executes a solver
//! run described by the same JSON configuration the CLI accepts (file
//! outputs are skipped) and returns an opaque handle; getters read the
//! final objective, stop reason and control field out of it. All
//! functions return a `tvs_status` code; on failure a thread-local
//! message is available via `tvs_last_error_message`. Strings returned
//! through out-parameters are owned by the caller and must be released
//! with `tvs_string_free`; handles with `tvs_run_free`.

#![allow(non_camel_case_types)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use tvslip::config::RunConfig;
use tvslip::error::Error;
use tvslip::io::SubproblemFile;
use tvslip::slip::{self, RunResult, StopReason};
use tvslip::trsub::{solve_dfs_2d, solve_dp_1d, DEFAULT_DFS_CELL_CAP};

/// Status codes returned by every API function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum tvs_status {
    TVS_OK = 0,
    TVS_NULL_POINTER = 1,
    TVS_UTF8_ERROR = 2,
    TVS_INVALID_ARGUMENT = 3,
    TVS_CONFIG_ERROR = 4,
    TVS_SOLVER_FAILURE = 5,
    TVS_PATCH_TOO_LARGE = 6,
    TVS_IO_ERROR = 7,
    TVS_BUFFER_TOO_SMALL = 8,
    TVS_PANIC = 9,
}

use tvs_status::*;

/// Stop reasons reported by `tvs_run_reason`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum tvs_reason {
    TVS_REASON_STATIONARY = 0,
    TVS_REASON_MAX_OUTER_ITERS = 1,
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

fn status_of(err: &Error) -> tvs_status {
    match err {
        Error::InvalidArgument(_) | Error::GridMismatch(_) | Error::CoverViolation(_) => {
            TVS_INVALID_ARGUMENT
        }
        Error::PatchTooLarge { .. } => TVS_PATCH_TOO_LARGE,
        Error::SolverFailure(_) => TVS_SOLVER_FAILURE,
        Error::Config(_) | Error::Json(_) => TVS_CONFIG_ERROR,
        Error::Io(_) => TVS_IO_ERROR,
    }
}

/// Opaque handle holding a finished run.
pub struct tvs_run {
    result: RunResult,
    n_cells: usize,
    n_patches: usize,
    alpha: f64,
}

unsafe fn cstr_arg<'a>(ptr: *const c_char) -> Result<&'a str, tvs_status> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(TVS_NULL_POINTER);
    }
    unsafe { CStr::from_ptr(ptr) }.to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        TVS_UTF8_ERROR
    })
}

fn guard(f: impl FnOnce() -> tvs_status) -> tvs_status {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            TVS_PANIC
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tvs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tvs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Runs the solver from a JSON configuration string. File outputs
/// configured in the JSON are ignored; results are read through the
/// returned handle.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out` a valid
/// pointer; the returned handle must be released with `tvs_run_free`.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_config_json(
    config_json: *const c_char,
    out: *mut *mut tvs_run,
) -> tvs_status {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        let json = match unsafe { cstr_arg(config_json) } {
            Ok(s) => s,
            Err(code) => return code,
        };
        let cfg: RunConfig = match serde_json::from_str(json) {
            Ok(c) => c,
            Err(e) => {
                set_error(&format!("config parse error: {e}"));
                return TVS_CONFIG_ERROR;
            }
        };
        let setup = match cfg.resolve() {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        match slip::run(
            &setup.model,
            setup.alpha,
            &setup.values,
            &setup.patches,
            &setup.slip,
            setup.w0.clone(),
            None,
        ) {
            Ok(result) => {
                let handle = Box::new(tvs_run {
                    n_cells: setup.grid.n_cells(),
                    n_patches: setup.patches.n_patches(),
                    alpha: setup.alpha,
                    result,
                });
                unsafe { *out = Box::into_raw(handle) };
                TVS_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

unsafe fn run_ref<'a>(run: *const tvs_run) -> Result<&'a tvs_run, tvs_status> {
    if run.is_null() {
        set_error("null run handle");
        return Err(TVS_NULL_POINTER);
    }
    Ok(unsafe { &*run })
}

/// Final objective value split into J = F + alpha TV.
///
/// # Safety
/// `run` must be a live handle; out pointers may be null to skip.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_objective(
    run: *const tvs_run,
    j: *mut f64,
    f: *mut f64,
    tv: *mut f64,
) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        unsafe {
            if !j.is_null() {
                *j = r.result.final_objective.j;
            }
            if !f.is_null() {
                *f = r.result.final_objective.f;
            }
            if !tv.is_null() {
                *tv = r.result.final_objective.tv;
            }
        }
        TVS_OK
    })
}

/// # Safety
/// `run` must be a live handle and `reason` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_reason(
    run: *const tvs_run,
    reason: *mut tvs_reason,
) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if reason.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        unsafe {
            *reason = match r.result.reason {
                StopReason::Stationary => tvs_reason::TVS_REASON_STATIONARY,
                StopReason::MaxOuterIters => tvs_reason::TVS_REASON_MAX_OUTER_ITERS,
            };
        }
        TVS_OK
    })
}

/// Number of outer iterations recorded.
///
/// # Safety
/// `run` must be a live handle and `n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_iterations(run: *const tvs_run, n: *mut usize) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if n.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        unsafe { *n = r.result.records.len() };
        TVS_OK
    })
}

/// Total number of subproblem solves.
///
/// # Safety
/// `run` must be a live handle and `n` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_subproblems(run: *const tvs_run, n: *mut u64) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if n.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        unsafe { *n = r.result.n_subproblems };
        TVS_OK
    })
}

/// Number of cells of the final control field.
///
/// # Safety
/// `run` must be a live handle and `len` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_field_len(run: *const tvs_run, len: *mut usize) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if len.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        unsafe { *len = r.n_cells };
        TVS_OK
    })
}

/// Copies the final integer control field into a caller buffer of
/// `len` entries (must be at least the field length).
///
/// # Safety
/// `run` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_copy_field(
    run: *const tvs_run,
    buf: *mut i32,
    len: usize,
) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if buf.is_null() {
            set_error("null buffer");
            return TVS_NULL_POINTER;
        }
        let values = r.result.final_field.values();
        if len < values.len() {
            set_error(&format!(
                "buffer holds {len} entries, field has {}",
                values.len()
            ));
            return TVS_BUFFER_TOO_SMALL;
        }
        unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len()) };
        TVS_OK
    })
}

/// Serializes a run summary (objective, reason, counters, final field)
/// as JSON into a newly allocated string.
///
/// # Safety
/// `run` must be a live handle; the string must be released with
/// `tvs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_summary_json(
    run: *const tvs_run,
    out: *mut *mut c_char,
) -> tvs_status {
    guard(|| {
        let r = match unsafe { run_ref(run) } {
            Ok(r) => r,
            Err(code) => return code,
        };
        if out.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        let mut doc = tvslip::io::run_result_json(&r.result);
        doc["n_cells"] = serde_json::json!(r.n_cells);
        doc["n_patches"] = serde_json::json!(r.n_patches);
        doc["alpha"] = serde_json::json!(r.alpha);
        match CString::new(doc.to_string()) {
            Ok(s) => {
                unsafe { *out = s.into_raw() };
                TVS_OK
            }
            Err(_) => {
                set_error("summary contained an interior NUL");
                TVS_SOLVER_FAILURE
            }
        }
    })
}

/// Solves a serialized subproblem instance (same JSON schema as the
/// CLI's `subsolve`) and returns the solution document as JSON.
///
/// # Safety
/// `instance_json` must be NUL-terminated; the returned string must be
/// released with `tvs_string_free`.
#[no_mangle]
pub unsafe extern "C" fn tvs_subsolve_json(
    instance_json: *const c_char,
    out: *mut *mut c_char,
) -> tvs_status {
    guard(|| {
        if out.is_null() {
            set_error("null out pointer");
            return TVS_NULL_POINTER;
        }
        let json = match unsafe { cstr_arg(instance_json) } {
            Ok(s) => s,
            Err(code) => return code,
        };
        let file: SubproblemFile = match serde_json::from_str(json) {
            Ok(f) => f,
            Err(e) => {
                set_error(&format!("instance parse error: {e}"));
                return TVS_CONFIG_ERROR;
            }
        };
        let sub = match file.into_subproblem() {
            Ok(s) => s,
            Err(e) => {
                set_error(&e.to_string());
                return status_of(&e);
            }
        };
        let solved = match sub.base.grid().dim() {
            1 => solve_dp_1d(&sub),
            _ => solve_dfs_2d(&sub, DEFAULT_DFS_CELL_CAP),
        };
        match solved {
            Ok((step, stats)) => {
                let doc = serde_json::json!({
                    "trial": step.trial.values(),
                    "pred": step.pred,
                    "budget_units": sub.budget_units(),
                    "stats": { "dp_states": stats.dp_states, "dfs_nodes": stats.dfs_nodes },
                });
                match CString::new(doc.to_string()) {
                    Ok(s) => {
                        unsafe { *out = s.into_raw() };
                        TVS_OK
                    }
                    Err(_) => {
                        set_error("solution contained an interior NUL");
                        TVS_SOLVER_FAILURE
                    }
                }
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Releases a run handle.
///
/// # Safety
/// `run` must have come from `tvs_run_config_json` and not be freed
/// twice; null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn tvs_run_free(run: *mut tvs_run) {
    if !run.is_null() {
        drop(unsafe { Box::from_raw(run) });
    }
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must have come from this library and not be freed twice; null is
/// a no-op.
#[no_mangle]
pub unsafe extern "C" fn tvs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}
