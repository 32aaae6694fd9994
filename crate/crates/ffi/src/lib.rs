//! C ABI over `one3probe`.
//!
//! Formulas and solve results are opaque handles created by this library and
//! released with their `_free` function. Every fallible call returns a
//! [`One3Status`]; on failure, [`one3_last_error`] describes the most recent
//! error on the calling thread. Strings handed out by the library are
//! NUL-terminated and released with [`one3_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use one3probe::formula::parse_pos3cnf;
use one3probe::oracle::brute_force_one_in_three;
use one3probe::preprocess::expand;
use one3probe::search::{solve, SolveOutcome};
use one3probe::{Error, PosCnf, RDecode, SearchConfig, SearchMode};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum One3Status {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidFormula = 4,
    GuardExceeded = 5,
    InvalidArgument = 6,
    NoWitness = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum One3Mode {
    Repaired = 0,
    Faithful = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum One3Decode {
    FConsistent = 0,
    PaperLiteral = 1,
}

/// Search counters.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct One3Stats {
    pub calls: u64,
    pub max_depth: u64,
    pub cells_evaluated: u64,
    pub budget_exhausted: bool,
}

/// A parsed, validated positive 3CNF formula.
pub struct One3Formula {
    inner: PosCnf,
}

/// The outcome of [`one3_solve`].
pub struct One3SolveResult {
    inner: SolveOutcome,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).expect("NUL bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> One3Status {
    match e {
        Error::Parse { .. } => One3Status::Parse,
        Error::Invalid(_) => One3Status::InvalidFormula,
        Error::GuardExceeded { .. } => One3Status::GuardExceeded,
        Error::Config(_)
        | Error::OutOfRange { .. }
        | Error::LengthMismatch { .. }
        | Error::Infeasible(_) => One3Status::InvalidArgument,
        _ => One3Status::Internal,
    }
}

fn guarded(f: impl FnOnce() -> Result<(), (One3Status, String)>) -> One3Status {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => One3Status::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            One3Status::Internal
        }
    }
}

fn lib_err(e: Error) -> (One3Status, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (One3Status, String) {
    (One3Status::NullPointer, format!("{what} is null"))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s)
        .expect("library strings contain no NUL")
        .into_raw()
}

/// Parses `p3cnf` text into a new formula handle stored in `*out`.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn one3_formula_parse(
    text: *const c_char,
    out: *mut *mut One3Formula,
) -> One3Status {
    guarded(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (One3Status::InvalidUtf8, e.to_string()))?;
        let f = parse_pos3cnf(s).map_err(lib_err)?;
        one3probe::formula::ensure_valid(&f).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(One3Formula { inner: f }));
        Ok(())
    })
}

/// Releases a formula handle. Null is ignored.
///
/// # Safety
/// `f` must come from [`one3_formula_parse`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn one3_formula_free(f: *mut One3Formula) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of variables, or 0 for null.
///
/// # Safety
/// `f` must be null or a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn one3_formula_num_vars(f: *const One3Formula) -> usize {
    f.as_ref().map_or(0, |f| f.inner.num_vars())
}

/// Number of clauses, or 0 for null.
///
/// # Safety
/// `f` must be null or a live formula handle.
#[no_mangle]
pub unsafe extern "C" fn one3_formula_num_clauses(f: *const One3Formula) -> usize {
    f.as_ref().map_or(0, |f| f.inner.num_clauses())
}

/// Writes the expanded formula as `p3cnf` text to `*out`.
///
/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn one3_formula_expand(
    f: *const One3Formula,
    out: *mut *mut c_char,
) -> One3Status {
    guarded(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let e = expand(&f.inner).map_err(lib_err)?;
        *out = to_c_string(e.phi.to_text());
        Ok(())
    })
}

/// Brute-force 1-in-3 satisfiability. On success `*satisfiable` is set and,
/// if `witness` is non-null, `*witness` receives the smallest witness as a
/// `0`/`1` string (`z_1` first), or null when unsatisfiable.
///
/// # Safety
/// `f` must be a live formula handle; `satisfiable` must be writable;
/// `witness` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn one3_oracle(
    f: *const One3Formula,
    satisfiable: *mut bool,
    witness: *mut *mut c_char,
) -> One3Status {
    guarded(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if satisfiable.is_null() {
            return Err(null("satisfiable"));
        }
        let w = brute_force_one_in_three(&f.inner).map_err(lib_err)?;
        *satisfiable = w.is_some();
        if !witness.is_null() {
            *witness = w.map_or(ptr::null_mut(), |a| to_c_string(a.into()));
        }
        Ok(())
    })
}

/// Expands and searches `f`. A `call_budget` of 0 selects the default.
///
/// # Safety
/// `f` must be a live formula handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn one3_solve(
    f: *const One3Formula,
    mode: One3Mode,
    decode: One3Decode,
    call_budget: u64,
    out: *mut *mut One3SolveResult,
) -> One3Status {
    guarded(|| {
        let f = f.as_ref().ok_or_else(|| null("formula"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let mut cfg = SearchConfig::new(
            match mode {
                One3Mode::Repaired => SearchMode::Repaired,
                One3Mode::Faithful => SearchMode::Faithful,
            },
            match decode {
                One3Decode::FConsistent => RDecode::FConsistent,
                One3Decode::PaperLiteral => RDecode::PaperLiteral,
            },
        );
        if call_budget > 0 {
            cfg.call_budget = call_budget;
        }
        let o = solve(&f.inner, cfg).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(One3SolveResult { inner: o }));
        Ok(())
    })
}

/// Releases a solve result. Null is ignored.
///
/// # Safety
/// `r` must come from [`one3_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn one3_result_free(r: *mut One3SolveResult) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Whether the search reported the target as found; false for null.
///
/// # Safety
/// `r` must be null or a live result handle.
#[no_mangle]
pub unsafe extern "C" fn one3_result_found(r: *const One3SolveResult) -> bool {
    r.as_ref().is_some_and(|r| r.inner.result.found)
}

/// Copies the search counters into `*out`.
///
/// # Safety
/// `r` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn one3_result_stats(
    r: *const One3SolveResult,
    out: *mut One3Stats,
) -> One3Status {
    guarded(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = r.inner.result.stats;
        *out = One3Stats {
            calls: s.calls,
            max_depth: s.max_depth,
            cells_evaluated: s.cells_evaluated,
            budget_exhausted: s.budget_exhausted,
        };
        Ok(())
    })
}

/// The witness over the input's variables as a `0`/`1` string. Returns
/// `NoWitness` when the search produced none (faithful mode never does).
///
/// # Safety
/// `r` must be a live result handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn one3_result_witness(
    r: *const One3SolveResult,
    out: *mut *mut c_char,
) -> One3Status {
    guarded(|| {
        let r = r.as_ref().ok_or_else(|| null("result"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let w = r
            .inner
            .original_witness
            .clone()
            .ok_or((One3Status::NoWitness, "no witness".to_string()))?;
        *out = to_c_string(w.into());
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn one3_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn one3_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn one3_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
