//! C ABI over the `qags` optimizer.
//!
//! Objects cross the boundary as opaque handles created by `*_new` /
//! `qags_run*` and released by the matching `*_free`. Every fallible call
//! returns a `QagsStatus`; on failure the message is available from
//! `qags_last_error_message` on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qags::{
    run, run_ags, AgsConfig, EncodingLaw, Objective, QagsConfig, QagsError, RunReport, SearchBox,
};

/// Result codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QagsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    InvalidArity = 3,
    UnknownFunction = 4,
    Config = 5,
    Evaluation = 6,
    Refinement = 7,
    Internal = 8,
}

/// Encoding law selector for `QagsOptions::law`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QagsLaw {
    BoltzmannProbability = 0,
    BoltzmannAmplitude = 1,
}

/// Opaque objective function handle.
pub struct QagsObjective {
    inner: Objective,
}

/// Opaque run report handle.
pub struct QagsReport {
    inner: RunReport,
}

/// Tunables for `qags_run`. Obtain defaults from `qags_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct QagsOptions {
    pub qubits_per_dim: u32,
    pub quantile: f64,
    pub law: QagsLaw,
    /// 0 reads probabilities exactly.
    pub shots: u64,
    pub seed: u64,
    pub k_max: usize,
    pub delta: f64,
    pub entropy_floor: f64,
    pub max_qubits: u32,
}

/// Objective callback: receives `len` coordinates and the user pointer.
pub type QagsCallback = extern "C" fn(x: *const f64, len: usize, user_data: *mut c_void) -> f64;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &QagsError) -> QagsStatus {
    match e {
        QagsError::InvalidInput(_)
        | QagsError::IndexOutOfRange { .. }
        | QagsError::NoSuchPoint(_) => QagsStatus::InvalidInput,
        QagsError::InvalidArity { .. } => QagsStatus::InvalidArity,
        QagsError::Evaluation { .. } => QagsStatus::Evaluation,
        QagsError::Iteration { source, .. } => status_of(source),
        QagsError::Refinement { .. } => QagsStatus::Refinement,
        QagsError::UnknownFunction { .. } => QagsStatus::UnknownFunction,
        QagsError::Config(_) => QagsStatus::Config,
    }
}

fn fail(e: QagsError) -> QagsStatus {
    let status = status_of(&e);
    set_error(e.to_string());
    status
}

fn null(what: &str) -> QagsStatus {
    set_error(format!("{what} must not be null"));
    QagsStatus::NullPointer
}

/// Runs `body`, turning panics into `Internal`.
fn guard(body: impl FnOnce() -> QagsStatus) -> QagsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic".into());
            QagsStatus::Internal
        }
    }
}

unsafe fn slice<'a>(p: *const f64, len: usize) -> &'a [f64] {
    if len == 0 {
        &[]
    } else {
        std::slice::from_raw_parts(p, len)
    }
}

/// Message for the last failure on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qags_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Creates a registry benchmark by name. `shift` (length `shift_len`) is
/// only used by `sphere`; pass null for the origin.
///
/// # Safety
/// `name` must be a NUL-terminated string; `shift` must point to
/// `shift_len` doubles or be null; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qags_objective_new(
    name: *const c_char,
    dim: usize,
    shift: *const f64,
    shift_len: usize,
    out: *mut *mut QagsObjective,
) -> QagsStatus {
    guard(|| {
        if name.is_null() {
            return null("name");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            set_error("name is not valid UTF-8".into());
            return QagsStatus::InvalidInput;
        };
        let shift = (!shift.is_null()).then(|| slice(shift, shift_len).to_vec());
        match Objective::by_name(name, dim, shift) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QagsObjective { inner }));
                QagsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

struct Callback {
    f: QagsCallback,
    user_data: *mut c_void,
}

// The caller promises the callback and its data are usable from any thread.
unsafe impl Send for Callback {}
unsafe impl Sync for Callback {}

/// Wraps a C callback as an objective. The callback must not unwind and
/// must be safe to call from the thread that runs the optimizer.
///
/// # Safety
/// `name` must be a NUL-terminated string; `user_data` must outlive the
/// returned handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qags_objective_from_callback(
    name: *const c_char,
    dim: usize,
    callback: Option<extern "C" fn(x: *const f64, len: usize, user_data: *mut c_void) -> f64>,
    user_data: *mut c_void,
    out: *mut *mut QagsObjective,
) -> QagsStatus {
    guard(|| {
        let Some(f) = callback else {
            return null("callback");
        };
        if name.is_null() {
            return null("name");
        }
        if out.is_null() {
            return null("out");
        }
        let Ok(name) = CStr::from_ptr(name).to_str() else {
            set_error("name is not valid UTF-8".into());
            return QagsStatus::InvalidInput;
        };
        let cb = Callback { f, user_data };
        let result = Objective::custom(name, dim, move |x: &[f64]| {
            let cb = &cb;
            (cb.f)(x.as_ptr(), x.len(), cb.user_data)
        });
        match result {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(QagsObjective { inner }));
                QagsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases an objective. Null is ignored.
///
/// # Safety
/// `obj` must come from a `qags_objective_*` constructor and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qags_objective_free(obj: *mut QagsObjective) {
    if !obj.is_null() {
        drop(Box::from_raw(obj));
    }
}

/// Evaluates the objective at `x` (length `len`).
///
/// # Safety
/// `obj` must be a live handle, `x` must point to `len` doubles, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qags_objective_evaluate(
    obj: *const QagsObjective,
    x: *const f64,
    len: usize,
    out: *mut f64,
) -> QagsStatus {
    guard(|| {
        if obj.is_null() {
            return null("obj");
        }
        if x.is_null() && len > 0 {
            return null("x");
        }
        if out.is_null() {
            return null("out");
        }
        match (*obj).inner.evaluate(slice(x, len)) {
            Ok(v) => {
                *out = v;
                QagsStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Default options for a given register width per dimension.
#[no_mangle]
pub extern "C" fn qags_options_default(qubits_per_dim: u32) -> QagsOptions {
    let c = QagsConfig::new(qubits_per_dim);
    QagsOptions {
        qubits_per_dim,
        quantile: c.quantile,
        law: QagsLaw::BoltzmannProbability,
        shots: c.shots,
        seed: c.seed,
        k_max: c.termination.k_max,
        delta: c.termination.delta,
        entropy_floor: c.termination.entropy_floor,
        max_qubits: c.max_qubits,
    }
}

impl From<&QagsOptions> for QagsConfig {
    fn from(o: &QagsOptions) -> Self {
        let mut c = QagsConfig::new(o.qubits_per_dim);
        c.quantile = o.quantile;
        c.law = match o.law {
            QagsLaw::BoltzmannProbability => EncodingLaw::BoltzmannProbability,
            QagsLaw::BoltzmannAmplitude => EncodingLaw::BoltzmannAmplitude,
        };
        c.shots = o.shots;
        c.seed = o.seed;
        c.termination.k_max = o.k_max;
        c.termination.delta = o.delta;
        c.termination.entropy_floor = o.entropy_floor;
        c.max_qubits = o.max_qubits;
        c
    }
}

unsafe fn run_with(
    obj: *const QagsObjective,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    out: *mut *mut QagsReport,
    go: impl FnOnce(&Objective, &SearchBox) -> qags::Result<RunReport>,
) -> QagsStatus {
    if obj.is_null() {
        return null("obj");
    }
    if lower.is_null() || upper.is_null() {
        return null("bounds");
    }
    if out.is_null() {
        return null("out");
    }
    let bounds = match SearchBox::new(slice(lower, dim).to_vec(), slice(upper, dim).to_vec()) {
        Ok(b) => b,
        Err(e) => return fail(e),
    };
    match go(&(*obj).inner, &bounds) {
        Ok(inner) => {
            *out = Box::into_raw(Box::new(QagsReport { inner }));
            QagsStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Runs QAGS over the box `[lower, upper]` (each of length `dim`).
/// `options` may be null to use `qags_options_default` with 5 qubits.
///
/// # Safety
/// Pointers must be live and sized as described; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qags_run(
    obj: *const QagsObjective,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    options: *const QagsOptions,
    out: *mut *mut QagsReport,
) -> QagsStatus {
    guard(|| {
        let opts = if options.is_null() {
            qags_options_default(5)
        } else {
            *options
        };
        let cfg = QagsConfig::from(&opts);
        run_with(obj, lower, upper, dim, out, |f, b| run(f, b, &cfg))
    })
}

/// Runs the adaptive grid search baseline with default settings.
///
/// # Safety
/// Pointers must be live and sized as described; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qags_run_ags(
    obj: *const QagsObjective,
    lower: *const f64,
    upper: *const f64,
    dim: usize,
    out: *mut *mut QagsReport,
) -> QagsStatus {
    guard(|| {
        run_with(obj, lower, upper, dim, out, |f, b| {
            run_ags(f, b, &AgsConfig::default())
        })
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `report` must come from `qags_run*` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qags_report_free(report: *mut QagsReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Dimension of the reported point, or 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qags_report_dim(report: *const QagsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.dim)
}

/// Best objective value found, or NaN for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qags_report_found_value(report: *const QagsReport) -> f64 {
    report.as_ref().map_or(f64::NAN, |r| r.inner.found_value)
}

/// Number of contraction iterations, or 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qags_report_iterations(report: *const QagsReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.iterations.len())
}

/// Total objective evaluations, or 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qags_report_total_evals(report: *const QagsReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.total_f_evals)
}

/// Peak bytes held by the search model, or 0 for null.
///
/// # Safety
/// `report` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn qags_report_peak_model_bytes(report: *const QagsReport) -> u64 {
    report.as_ref().map_or(0, |r| r.inner.peak_model_bytes)
}

/// Copies the found point into `buf`, which must hold `len == dim` doubles.
///
/// # Safety
/// `report` must be a live handle and `buf` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qags_report_found_point(
    report: *const QagsReport,
    buf: *mut f64,
    len: usize,
) -> QagsStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return null("report");
        };
        if buf.is_null() {
            return null("buf");
        }
        let p = &r.inner.found_point;
        if len != p.len() {
            return fail(QagsError::InvalidArity {
                expected: p.len().to_string(),
                got: len,
            });
        }
        ptr::copy_nonoverlapping(p.as_ptr(), buf, len);
        QagsStatus::Ok
    })
}

/// Serializes the report as JSON. Free the string with `qags_string_free`.
///
/// # Safety
/// `report` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qags_report_to_json(
    report: *const QagsReport,
    out: *mut *mut c_char,
) -> QagsStatus {
    guard(|| {
        let Some(r) = report.as_ref() else {
            return null("report");
        };
        if out.is_null() {
            return null("out");
        }
        let json = CString::new(r.inner.to_json()).expect("JSON has no interior NUL");
        *out = json.into_raw();
        QagsStatus::Ok
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn qags_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
