//! C ABI for the `pomdp-finmem` solver.
//!
//! Every function returns a [`PfmStatus`]. On failure a message is stored per thread and can be
//! read with [`pfm_last_error_message`] until the next failing call on the same thread. Models,
//! strategies and decisions are opaque handles released with their `_free` function. Strings
//! returned by this library are released with [`pfm_string_free`].
//!
//! Handles are not synchronized. A handle may move between threads but must not be used from two
//! threads at once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pomdp_finmem::beliefobs::{BuildOptions, MemoryDomain};
use pomdp_finmem::model::{Objective, Pomdp, WinningMode};
use pomdp_finmem::solve::Decision;
use pomdp_finmem::strategy::FiniteMemoryStrategy;
use pomdp_finmem::{chain, io, solve, Error};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfmStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input text could not be parsed.
    Parse = 3,
    /// The model or objective is well formed but invalid.
    InvalidModel = 4,
    /// A strategy is malformed or does not fit the model.
    InvalidStrategy = 5,
    /// The objective cannot be handled by the requested operation.
    Unsupported = 6,
    /// The state budget was exceeded.
    Budget = 7,
    /// An enum argument was out of range.
    InvalidArgument = 8,
    /// An internal consistency check failed.
    Internal = 9,
    /// A panic was caught at the boundary.
    Panic = 10,
}

/// Winning mode.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfmMode {
    AlmostSure = 0,
    Positive = 1,
}

/// Memory domain of the belief-observation construction.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PfmDomain {
    Local = 0,
    Verbatim = 1,
}

/// Parsed model with its objective.
pub struct PfmModel {
    pomdp: Pomdp,
    objective: Objective,
    warnings: Vec<String>,
}

/// Finite-memory strategy bound to the model it was parsed or solved against.
pub struct PfmStrategy {
    sigma: FiniteMemoryStrategy,
}

/// Result of a solver run.
pub struct PfmDecision {
    decision: Decision,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PfmStatus {
    match err {
        Error::Parse { .. } => PfmStatus::Parse,
        Error::Invalid(_) => PfmStatus::InvalidModel,
        Error::Strategy(_) => PfmStatus::InvalidStrategy,
        Error::Unsupported(_) => PfmStatus::Unsupported,
        Error::Budget { .. } => PfmStatus::Budget,
        Error::MalformedBelief(_) | Error::Contract(_) | Error::Unverified(_) | Error::Io(_) => PfmStatus::Internal,
    }
}

struct Fail(PfmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PfmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PfmStatus::Ok,
        Ok(Err(Fail(status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            set_last_error(format!("panic: {message}"));
            PfmStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(PfmStatus::NullArgument, format!("`{name}` is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(PfmStatus::NullArgument, format!("`{name}` is null")))
}

unsafe fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(PfmStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Fail(PfmStatus::InvalidUtf8, format!("`{name}`: {e}")))
}

fn owned_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Fail(PfmStatus::Internal, "output contains a NUL byte".to_string()))
}

fn mode_of(mode: PfmMode) -> WinningMode {
    match mode {
        PfmMode::AlmostSure => WinningMode::AlmostSure,
        PfmMode::Positive => WinningMode::Positive,
    }
}

fn mode_from_raw(mode: i32) -> Result<WinningMode, Fail> {
    match mode {
        0 => Ok(mode_of(PfmMode::AlmostSure)),
        1 => Ok(mode_of(PfmMode::Positive)),
        m => Err(Fail(PfmStatus::InvalidArgument, format!("unknown mode {m}"))),
    }
}

fn domain_from_raw(domain: i32) -> Result<MemoryDomain, Fail> {
    match domain {
        0 => Ok(MemoryDomain::Local),
        1 => Ok(MemoryDomain::Verbatim),
        d => Err(Fail(PfmStatus::InvalidArgument, format!("unknown domain {d}"))),
    }
}

/// Message of the last failing call on this thread, or null if none failed yet. The pointer stays
/// valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn pfm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pfm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string returned by this library that was not released yet.
#[no_mangle]
pub unsafe extern "C" fn pfm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses and validates a model. On success `*out_model` receives a new handle.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out_model` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_parse(text: *const c_char, out_model: *mut *mut PfmModel) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_model, "out_model")?;
        *slot = ptr::null_mut();
        let (pomdp, objective, warnings) = io::parse_model(c_str(text, "text")?)?;
        *slot = Box::into_raw(Box::new(PfmModel { pomdp, objective, warnings }));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`pfm_model_parse`] that was not released yet.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_free(model: *mut PfmModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes the number of states, actions and observations. Any output pointer may be null.
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_sizes(
    model: *const PfmModel,
    states: *mut usize,
    actions: *mut usize,
    observations: *mut usize,
) -> PfmStatus {
    guard(|| {
        let m = arg(model, "model")?;
        if let Some(s) = states.as_mut() {
            *s = m.pomdp.num_states();
        }
        if let Some(a) = actions.as_mut() {
            *a = m.pomdp.num_actions();
        }
        if let Some(o) = observations.as_mut() {
            *o = m.pomdp.num_observations();
        }
        Ok(())
    })
}

/// Number of warnings produced while parsing the model.
///
/// # Safety
/// `model` must be a live handle and `count` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_warning_count(model: *const PfmModel, count: *mut usize) -> PfmStatus {
    guard(|| {
        *out_ref(count, "count")? = arg(model, "model")?.warnings.len();
        Ok(())
    })
}

/// Copy of warning `index`, released with [`pfm_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out_text` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_warning(model: *const PfmModel, index: usize, out_text: *mut *mut c_char) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_text, "out_text")?;
        *slot = ptr::null_mut();
        let m = arg(model, "model")?;
        let w = m
            .warnings
            .get(index)
            .ok_or_else(|| Fail(PfmStatus::InvalidArgument, format!("warning index {index} out of range")))?;
        *slot = owned_string(w.clone())?;
        Ok(())
    })
}

/// Canonical text of the model, released with [`pfm_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out_text` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_model_serialize(model: *const PfmModel, out_text: *mut *mut c_char) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_text, "out_text")?;
        *slot = ptr::null_mut();
        let m = arg(model, "model")?;
        *slot = owned_string(io::serialize_model(&m.pomdp, &m.objective))?;
        Ok(())
    })
}

/// Parses a strategy against `model`. On success `*out_strategy` receives a new handle.
///
/// # Safety
/// `model` must be a live handle, `text` a NUL-terminated string and `out_strategy` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_strategy_parse(
    model: *const PfmModel,
    text: *const c_char,
    out_strategy: *mut *mut PfmStrategy,
) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_strategy, "out_strategy")?;
        *slot = ptr::null_mut();
        let m = arg(model, "model")?;
        let sigma = io::parse_strategy(c_str(text, "text")?, &m.pomdp)?;
        *slot = Box::into_raw(Box::new(PfmStrategy { sigma }));
        Ok(())
    })
}

/// Releases a strategy. Null is ignored.
///
/// # Safety
/// `strategy` must be null or a live strategy handle.
#[no_mangle]
pub unsafe extern "C" fn pfm_strategy_free(strategy: *mut PfmStrategy) {
    if !strategy.is_null() {
        drop(Box::from_raw(strategy));
    }
}

/// Number of memory elements of the strategy.
///
/// # Safety
/// `strategy` must be a live handle and `count` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_strategy_memory_count(strategy: *const PfmStrategy, count: *mut usize) -> PfmStatus {
    guard(|| {
        *out_ref(count, "count")? = arg(strategy, "strategy")?.sigma.memory_names().len();
        Ok(())
    })
}

/// Canonical text of the strategy for `model`, released with [`pfm_string_free`].
///
/// # Safety
/// Both handles must be live and `out_text` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_strategy_serialize(
    model: *const PfmModel,
    strategy: *const PfmStrategy,
    out_text: *mut *mut c_char,
) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_text, "out_text")?;
        *slot = ptr::null_mut();
        let m = arg(model, "model")?;
        let s = arg(strategy, "strategy")?;
        *slot = owned_string(io::serialize_strategy(&s.sigma, &m.pomdp))?;
        Ok(())
    })
}

/// Checks whether `strategy` wins the model's objective in `mode` (a [`PfmMode`] value).
///
/// # Safety
/// Both handles must be live and `wins` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_verify(
    model: *const PfmModel,
    strategy: *const PfmStrategy,
    mode: i32,
    wins: *mut bool,
) -> PfmStatus {
    guard(|| {
        let slot = out_ref(wins, "wins")?;
        let m = arg(model, "model")?;
        let s = arg(strategy, "strategy")?;
        *slot = chain::verify(&m.pomdp, &s.sigma, &m.objective, mode_from_raw(mode)?)?;
        Ok(())
    })
}

/// Decides whether a finite-memory strategy wins the model's objective in `mode` (a [`PfmMode`]).
/// `domain` is a [`PfmDomain`] value and `budget` caps the constructed states, with 0 meaning the
/// library default. On success `*out_decision` receives a new decision handle.
///
/// # Safety
/// `model` must be a live handle and `out_decision` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_solve(
    model: *const PfmModel,
    mode: i32,
    domain: i32,
    budget: usize,
    out_decision: *mut *mut PfmDecision,
) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_decision, "out_decision")?;
        *slot = ptr::null_mut();
        let m = arg(model, "model")?;
        let mut opts = BuildOptions { domain: domain_from_raw(domain)?, ..BuildOptions::default() };
        if budget > 0 {
            opts.budget = budget;
        }
        let decision = solve::solve(&m.pomdp, &m.objective, mode_from_raw(mode)?, opts)?;
        *slot = Box::into_raw(Box::new(PfmDecision { decision }));
        Ok(())
    })
}

/// Releases a decision. Null is ignored.
///
/// # Safety
/// `decision` must be null or a live decision handle.
#[no_mangle]
pub unsafe extern "C" fn pfm_decision_free(decision: *mut PfmDecision) {
    if !decision.is_null() {
        drop(Box::from_raw(decision));
    }
}

/// Verdict of the decision.
///
/// # Safety
/// `decision` must be a live handle and `verdict` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_decision_verdict(decision: *const PfmDecision, verdict: *mut bool) -> PfmStatus {
    guard(|| {
        *out_ref(verdict, "verdict")? = arg(decision, "decision")?.decision.verdict;
        Ok(())
    })
}

/// One-line `key=value` summary, released with [`pfm_string_free`].
///
/// # Safety
/// `decision` must be a live handle and `out_text` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_decision_summary(decision: *const PfmDecision, out_text: *mut *mut c_char) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_text, "out_text")?;
        *slot = ptr::null_mut();
        *slot = owned_string(arg(decision, "decision")?.decision.summary())?;
        Ok(())
    })
}

/// Copy of the verified witness as a new strategy handle, or null in `*out_strategy` on a no verdict.
///
/// # Safety
/// `decision` must be a live handle and `out_strategy` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn pfm_decision_witness(decision: *const PfmDecision, out_strategy: *mut *mut PfmStrategy) -> PfmStatus {
    guard(|| {
        let slot = out_ref(out_strategy, "out_strategy")?;
        *slot = ptr::null_mut();
        if let Some(sigma) = &arg(decision, "decision")?.decision.witness {
            *slot = Box::into_raw(Box::new(PfmStrategy { sigma: sigma.clone() }));
        }
        Ok(())
    })
}
