//! C ABI for the verification engine: opaque handles, integer status
//! codes, and JSON strings for structured results.
//!
//! Ownership rules: every `*mut` returned by this library is owned by the
//! caller and must be released with the matching `_free` function
//! (`bianchi_string_free` for strings). Functions that can fail return
//! null or a negative code and leave a message retrievable through
//! `bianchi_last_error`.

use bianchi::geometry::ModelSpec;
use bianchi::models::{find_model, load_model, model_from_json, sample_points};
use bianchi::verify::{
    classify_model, reports_to_json, run_ids, run_tier, CheckReport, Tier, Verdict,
};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status and verdict codes shared across the C surface.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BianchiCode {
    /// Operation succeeded.
    Ok = 0,
    /// Einstein verdict from the classifier.
    VerdictEinstein = 1,
    /// Flat Gaussian verdict.
    VerdictGaussian = 2,
    /// Plane-by-sphere product verdict.
    VerdictR2xS2 = 3,
    /// Round cylinder verdict.
    VerdictRxS3 = 4,
    /// Soliton but not a recognized rigid model.
    VerdictNotRigid = 5,
    /// Not a gradient shrinking soliton at all.
    VerdictNotASoliton = 6,
    /// A pointer argument was null or malformed.
    ErrNullArgument = -1,
    /// A string argument was not valid UTF-8.
    ErrUtf8 = -2,
    /// Model lookup, parsing or validation failed.
    ErrModel = -3,
    /// Check evaluation failed.
    ErrVerify = -4,
    /// The operation panicked; state is still consistent.
    ErrPanic = -5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let cstring = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Opaque model handle.
pub struct BianchiModel {
    spec: ModelSpec,
}

/// Opaque report handle holding the rows of one verification run.
pub struct BianchiReport {
    rows: Vec<CheckReport>,
}

/// Returns the engine version as a static string; do not free.
#[no_mangle]
pub extern "C" fn bianchi_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Returns the most recent error message on this thread as a new string,
/// or null when no error is recorded. Free with `bianchi_string_free`.
#[no_mangle]
pub extern "C" fn bianchi_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must have been returned by a `bianchi_*` function documented to
/// allocate, and must not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn bianchi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, BianchiCode> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(BianchiCode::ErrNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        BianchiCode::ErrUtf8
    })
}

fn boxed_model(spec: ModelSpec) -> *mut BianchiModel {
    clear_error();
    Box::into_raw(Box::new(BianchiModel { spec }))
}

/// Loads a builtin catalog model by name; null on failure.
///
/// # Safety
/// `name` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_builtin(name: *const c_char) -> *mut BianchiModel {
    let Ok(name) = read_str(name) else {
        return std::ptr::null_mut();
    };
    match find_model(name) {
        Ok(entry) => boxed_model(entry.spec),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Loads and validates a model file; null on failure.
///
/// # Safety
/// `path` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_from_file(path: *const c_char) -> *mut BianchiModel {
    let Ok(path) = read_str(path) else {
        return std::ptr::null_mut();
    };
    match load_model(Path::new(path)) {
        Ok(spec) => boxed_model(spec),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Parses and validates a model from JSON text; null on failure.
///
/// # Safety
/// `json` must point to a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_from_json(json: *const c_char) -> *mut BianchiModel {
    let Ok(json) = read_str(json) else {
        return std::ptr::null_mut();
    };
    match model_from_json(json) {
        Ok(spec) => boxed_model(spec),
        Err(e) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Releases a model handle.
///
/// # Safety
/// `model` must come from a `bianchi_model_*` constructor and must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_free(model: *mut BianchiModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Chart dimension of a model, or 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_dimension(model: *const BianchiModel) -> u32 {
    match model.as_ref() {
        Some(m) => m.spec.dim as u32,
        None => 0,
    }
}

/// Model name as a new string; free with `bianchi_string_free`.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bianchi_model_name(model: *const BianchiModel) -> *mut c_char {
    match model.as_ref() {
        Some(m) => CString::new(m.spec.name.clone())
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        None => std::ptr::null_mut(),
    }
}

fn tier_from_char(tier: c_char) -> Option<Tier> {
    match tier as u8 {
        b'A' | b'a' => Some(Tier::A),
        b'B' | b'b' => Some(Tier::B),
        b'C' | b'c' => Some(Tier::C),
        _ => None,
    }
}

fn run_guarded<F>(body: F) -> *mut BianchiReport
where
    F: FnOnce() -> Result<Vec<CheckReport>, String>,
{
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(rows)) => {
            clear_error();
            Box::into_raw(Box::new(BianchiReport { rows }))
        }
        Ok(Err(msg)) => {
            set_error(msg);
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic inside the verification engine".into());
            std::ptr::null_mut()
        }
    }
}

/// Runs every check of a tier over a seeded sample plan. `tol <= 0` keeps
/// each check's default tolerance. Null on failure.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bianchi_run_tier(
    model: *const BianchiModel,
    tier: c_char,
    points: u32,
    seed: u64,
    tol: f64,
) -> *mut BianchiReport {
    let Some(m) = model.as_ref() else {
        set_error("null model handle".into());
        return std::ptr::null_mut();
    };
    let Some(tier) = tier_from_char(tier) else {
        set_error("tier must be one of 'A', 'B', 'C'".into());
        return std::ptr::null_mut();
    };
    if points == 0 {
        set_error("points must be at least 1".into());
        return std::ptr::null_mut();
    }
    let tol = (tol > 0.0).then_some(tol);
    let spec = m.spec.clone();
    run_guarded(move || {
        let plan = sample_points(&spec, points as usize, seed).map_err(|e| e.to_string())?;
        run_tier(tier, &spec, &plan, tol).map_err(|e| e.to_string())
    })
}

/// Runs a single check by id; inapplicable checks yield a row with zero
/// points rather than an error.
///
/// # Safety
/// `model` must be a live handle; `id` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn bianchi_run_check(
    model: *const BianchiModel,
    id: *const c_char,
    points: u32,
    seed: u64,
    tol: f64,
) -> *mut BianchiReport {
    let Some(m) = model.as_ref() else {
        set_error("null model handle".into());
        return std::ptr::null_mut();
    };
    let Ok(id) = read_str(id) else {
        return std::ptr::null_mut();
    };
    if points == 0 {
        set_error("points must be at least 1".into());
        return std::ptr::null_mut();
    }
    let tol = (tol > 0.0).then_some(tol);
    let spec = m.spec.clone();
    let ids = vec![id.to_string()];
    run_guarded(move || {
        let plan = sample_points(&spec, points as usize, seed).map_err(|e| e.to_string())?;
        run_ids(&ids, &spec, &plan, tol).map_err(|e| e.to_string())
    })
}

/// Number of rows in a report; 0 for null.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bianchi_report_len(report: *const BianchiReport) -> usize {
    report.as_ref().map_or(0, |r| r.rows.len())
}

/// True when every applicable row passed.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bianchi_report_pass(report: *const BianchiReport) -> bool {
    report
        .as_ref()
        .is_some_and(|r| r.rows.iter().all(|row| !row.is_applicable() || row.pass))
}

/// Report rows as a JSON array (fixed schema: check_id, model, points,
/// max_residual, mean_residual, argmax_point, pass, tolerance). Free with
/// `bianchi_string_free`.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bianchi_report_json(report: *const BianchiReport) -> *mut c_char {
    match report.as_ref() {
        Some(r) => CString::new(reports_to_json(&r.rows))
            .map(CString::into_raw)
            .unwrap_or(std::ptr::null_mut()),
        None => std::ptr::null_mut(),
    }
}

/// Releases a report handle.
///
/// # Safety
/// `report` must come from a run function and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn bianchi_report_free(report: *mut BianchiReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

fn classify_inner(
    spec: ModelSpec,
    points: u32,
    seed: u64,
    tol: f64,
) -> Result<bianchi::verify::ClassificationResult, String> {
    let plan = sample_points(&spec, points as usize, seed).map_err(|e| e.to_string())?;
    classify_model(&spec, &plan, tol).map_err(|e| e.to_string())
}

/// Classifies a four-dimensional model; returns a verdict code or a
/// negative error code.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bianchi_classify(
    model: *const BianchiModel,
    points: u32,
    seed: u64,
    tol: f64,
) -> BianchiCode {
    let Some(m) = model.as_ref() else {
        set_error("null model handle".into());
        return BianchiCode::ErrNullArgument;
    };
    if points == 0 {
        set_error("points must be at least 1".into());
        return BianchiCode::ErrNullArgument;
    }
    let spec = m.spec.clone();
    match catch_unwind(AssertUnwindSafe(move || classify_inner(spec, points, seed, tol))) {
        Ok(Ok(out)) => {
            clear_error();
            match out.verdict {
                Verdict::Einstein => BianchiCode::VerdictEinstein,
                Verdict::GaussianR4 => BianchiCode::VerdictGaussian,
                Verdict::R2xS2 => BianchiCode::VerdictR2xS2,
                Verdict::RxS3 => BianchiCode::VerdictRxS3,
                Verdict::NotRigidOrUnknown => BianchiCode::VerdictNotRigid,
                Verdict::NotASoliton => BianchiCode::VerdictNotASoliton,
            }
        }
        Ok(Err(msg)) => {
            set_error(msg);
            BianchiCode::ErrVerify
        }
        Err(_) => {
            set_error("panic inside the classifier".into());
            BianchiCode::ErrPanic
        }
    }
}

/// Full classification result as JSON; null on failure. Free with
/// `bianchi_string_free`.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bianchi_classify_json(
    model: *const BianchiModel,
    points: u32,
    seed: u64,
    tol: f64,
) -> *mut c_char {
    let Some(m) = model.as_ref() else {
        set_error("null model handle".into());
        return std::ptr::null_mut();
    };
    if points == 0 {
        set_error("points must be at least 1".into());
        return std::ptr::null_mut();
    }
    let spec = m.spec.clone();
    match catch_unwind(AssertUnwindSafe(move || classify_inner(spec, points, seed, tol))) {
        Ok(Ok(out)) => {
            clear_error();
            CString::new(serde_json::to_string_pretty(&out).expect("classification json"))
                .map(CString::into_raw)
                .unwrap_or(std::ptr::null_mut())
        }
        Ok(Err(msg)) => {
            set_error(msg);
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("panic inside the classifier".into());
            std::ptr::null_mut()
        }
    }
}
