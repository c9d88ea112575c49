//! C ABI over the pipeline: opaque handles, integer status codes, and
//! per-thread error messages. Every function catches panics, so nothing
//! unwinds across the boundary.

// Entry points take raw pointers by design; each one null-checks before
// dereferencing and reports NullArgument instead of crashing.
#![allow(clippy::not_unsafe_ptr_arg_deref)]

use lagnn::numerics::DenseMatrix;
use lagnn::pipeline::{
    run_algorithm1, run_ablation_suite, run_benchmark, run_mask_study, PipelineConfig, RunReport,
};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call. Mirrors the CLI exit codes: 2 for
/// configuration problems, 3 for data and I/O, 4 for numeric and shape
/// failures.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagnnStatus {
    Ok = 0,
    NullArgument = 1,
    Config = 2,
    Data = 3,
    Numeric = 4,
    Panic = 5,
}

/// Opaque pipeline configuration handle.
pub struct LagnnConfig(PipelineConfig);

/// Opaque run-report handle.
pub struct LagnnReport(RunReport);

/// Opaque row-major f64 matrix handle.
pub struct LagnnMatrix(DenseMatrix);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let cleaned: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(cleaned).unwrap());
}

fn status_of(e: &lagnn::Error) -> LagnnStatus {
    use lagnn::Error;
    match e {
        Error::Config(_) | Error::Parameter(_) => LagnnStatus::Config,
        Error::Data(_) | Error::Io(_) => LagnnStatus::Data,
        Error::Numeric(_) | Error::Shape { .. } => LagnnStatus::Numeric,
    }
}

/// Runs `body` with panic isolation and stores any error message.
fn guarded<T>(out: *mut *mut T, body: impl FnOnce() -> lagnn::Result<T>) -> LagnnStatus {
    if out.is_null() {
        set_error("output pointer is null");
        return LagnnStatus::NullArgument;
    }
    unsafe { *out = std::ptr::null_mut() };
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(value)) => {
            unsafe { *out = Box::into_raw(Box::new(value)) };
            LagnnStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            LagnnStatus::Panic
        }
    }
}

unsafe fn c_str<'a>(ptr: *const c_char) -> Option<&'a str> {
    if ptr.is_null() {
        return None;
    }
    CStr::from_ptr(ptr).to_str().ok()
}

/// Message of the calling thread's most recent failure. Valid until the
/// next failing call on the same thread; never null.
#[no_mangle]
pub extern "C" fn lagnn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static C string.
#[no_mangle]
pub extern "C" fn lagnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Raises the allocator's trim and mmap thresholds; see the core crate.
/// Call once at process start.
#[no_mangle]
pub extern "C" fn lagnn_tune_allocator() {
    lagnn::tune_allocator();
}

/// New configuration with the built-in defaults. Never fails.
#[no_mangle]
pub extern "C" fn lagnn_config_default() -> *mut LagnnConfig {
    Box::into_raw(Box::new(LagnnConfig(PipelineConfig::default())))
}

/// Parses and validates a JSON configuration. On success `*out` owns the
/// handle; free it with `lagnn_config_free`.
#[no_mangle]
pub extern "C" fn lagnn_config_from_json(
    json: *const c_char,
    out: *mut *mut LagnnConfig,
) -> LagnnStatus {
    let Some(text) = (unsafe { c_str(json) }) else {
        set_error("json pointer is null or not UTF-8");
        return LagnnStatus::NullArgument;
    };
    guarded(out, || PipelineConfig::from_json(text).map(LagnnConfig))
}

#[no_mangle]
pub extern "C" fn lagnn_config_free(config: *mut LagnnConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Benchmark suite (augmentation loop plus la_gcn and the configured
/// baselines) over the configured seeds.
#[no_mangle]
pub extern "C" fn lagnn_run_benchmark(
    config: *const LagnnConfig,
    out: *mut *mut LagnnReport,
) -> LagnnStatus {
    if config.is_null() {
        set_error("config pointer is null");
        return LagnnStatus::NullArgument;
    }
    let config = unsafe { &(*config).0 };
    guarded(out, || run_benchmark(config).map(LagnnReport))
}

/// Ablation suite (gcn, width, concat_self, plain_neighbor, la_gcn) over
/// the configured seeds.
#[no_mangle]
pub extern "C" fn lagnn_run_ablation(
    config: *const LagnnConfig,
    out: *mut *mut LagnnReport,
) -> LagnnStatus {
    if config.is_null() {
        set_error("config pointer is null");
        return LagnnStatus::NullArgument;
    }
    let config = unsafe { &(*config).0 };
    guarded(out, || run_ablation_suite(config).map(LagnnReport))
}

/// Feature-masking study over `ratios` (each in [0, 1)).
#[no_mangle]
pub extern "C" fn lagnn_run_mask_study(
    config: *const LagnnConfig,
    ratios: *const f64,
    n_ratios: usize,
    out: *mut *mut LagnnReport,
) -> LagnnStatus {
    if config.is_null() || (ratios.is_null() && n_ratios > 0) {
        set_error("config or ratios pointer is null");
        return LagnnStatus::NullArgument;
    }
    let config = unsafe { &(*config).0 };
    let ratios = unsafe { std::slice::from_raw_parts(ratios, n_ratios) };
    guarded(out, || run_mask_study(config, ratios).map(LagnnReport))
}

/// Greedy augmentation loop for one seed. On success `*out_xbar` owns the
/// selected augmented feature matrix and `*out_report` the trace report.
#[no_mangle]
pub extern "C" fn lagnn_run_algorithm1(
    config: *const LagnnConfig,
    seed: u64,
    out_xbar: *mut *mut LagnnMatrix,
    out_report: *mut *mut LagnnReport,
) -> LagnnStatus {
    if config.is_null() || out_xbar.is_null() || out_report.is_null() {
        set_error("config or output pointer is null");
        return LagnnStatus::NullArgument;
    }
    unsafe {
        *out_xbar = std::ptr::null_mut();
        *out_report = std::ptr::null_mut();
    }
    let config = unsafe { &(*config).0 };
    match catch_unwind(AssertUnwindSafe(|| run_algorithm1(config, seed))) {
        Ok(Ok((xbar, report))) => {
            unsafe {
                *out_xbar = Box::into_raw(Box::new(LagnnMatrix(xbar)));
                *out_report = Box::into_raw(Box::new(LagnnReport(report)));
            }
            LagnnStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            LagnnStatus::Panic
        }
    }
}

/// Serializes a report as pretty-printed JSON. On success `*out` owns a
/// C string; free it with `lagnn_string_free`.
#[no_mangle]
pub extern "C" fn lagnn_report_to_json(
    report: *const LagnnReport,
    out: *mut *mut c_char,
) -> LagnnStatus {
    if report.is_null() || out.is_null() {
        set_error("report or output pointer is null");
        return LagnnStatus::NullArgument;
    }
    unsafe { *out = std::ptr::null_mut() };
    let report = unsafe { &(*report).0 };
    match serde_json::to_string_pretty(report) {
        Ok(text) => {
            let cleaned: String = text.chars().filter(|&c| c != '\0').collect();
            unsafe { *out = CString::new(cleaned).unwrap().into_raw() };
            LagnnStatus::Ok
        }
        Err(e) => {
            set_error(&e.to_string());
            LagnnStatus::Data
        }
    }
}

#[no_mangle]
pub extern "C" fn lagnn_report_free(report: *mut LagnnReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

#[no_mangle]
pub extern "C" fn lagnn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[no_mangle]
pub extern "C" fn lagnn_matrix_rows(matrix: *const LagnnMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    unsafe { (*matrix).0.rows() }
}

#[no_mangle]
pub extern "C" fn lagnn_matrix_cols(matrix: *const LagnnMatrix) -> usize {
    if matrix.is_null() {
        return 0;
    }
    unsafe { (*matrix).0.cols() }
}

/// Copies the matrix row-major into `buf`, which must hold exactly
/// rows * cols doubles.
#[no_mangle]
pub extern "C" fn lagnn_matrix_copy(
    matrix: *const LagnnMatrix,
    buf: *mut f64,
    len: usize,
) -> LagnnStatus {
    if matrix.is_null() || buf.is_null() {
        set_error("matrix or buffer pointer is null");
        return LagnnStatus::NullArgument;
    }
    let data = unsafe { (*matrix).0.data() };
    if len != data.len() {
        set_error(&format!("buffer holds {len} values, matrix has {}", data.len()));
        return LagnnStatus::Numeric;
    }
    unsafe { std::ptr::copy_nonoverlapping(data.as_ptr(), buf, len) };
    LagnnStatus::Ok
}

#[no_mangle]
pub extern "C" fn lagnn_matrix_free(matrix: *mut LagnnMatrix) {
    if !matrix.is_null() {
        drop(unsafe { Box::from_raw(matrix) });
    }
}
