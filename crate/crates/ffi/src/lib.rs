//! C interface to the plp engine.
//!
//! Programs and answer sets are opaque handles owned by the caller and
//! released with their `_free` functions. Every fallible call returns a
//! [`PlpStatus`]; the message of the last failure on the calling thread is
//! available from [`plp_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use plp_core::cli::{answer_conditional_query, QueryOptions};
use plp_core::ground::GroundOptions;
use plp_core::stratify::check_sbtp;
use plp_core::syntax::{parse_program, parse_query, Program};
use plp_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlpStatus {
    Ok = 0,
    /// A null pointer or a string that is not UTF-8.
    InvalidArgument = 1,
    Syntax = 2,
    /// The program is not stratified by time and predicates.
    NotStratified = 3,
    /// Rejected program or query, for example a bad head probability.
    InvalidInput = 4,
    EvidenceZero = 5,
    OracleGuard = 6,
    Admissibility = 7,
    Internal = 8,
}

/// A parsed and stratified program.
pub struct PlpProgram {
    program: Program,
}

struct Answer {
    bindings: CString,
    probability: f64,
}

/// Answers to one conditional query.
pub struct PlpAnswerSet {
    answers: Vec<Answer>,
    evidence_probability: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PlpQueryOptions {
    /// End of time, used when `has_eot` is true.
    pub eot: i64,
    pub has_eot: bool,
    pub unguided: bool,
    pub no_pruning: bool,
    pub no_cache: bool,
    /// Enumerate choices instead of running variable elimination.
    pub oracle: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PlpStatus {
    match e {
        Error::Syntax { .. } => PlpStatus::Syntax,
        Error::NotTimeConstrained { .. } | Error::NegationCycle(_) => PlpStatus::NotStratified,
        Error::EvidenceZero => PlpStatus::EvidenceZero,
        Error::OracleGuard(..) => PlpStatus::OracleGuard,
        Error::Admissibility(..) => PlpStatus::Admissibility,
        Error::Internal(_) => PlpStatus::Internal,
        _ => PlpStatus::InvalidInput,
    }
}

fn fail(status: PlpStatus, msg: String) -> PlpStatus {
    set_error(msg);
    status
}

/// Run `f`, turning errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), PlpStatus>) -> PlpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlpStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PlpStatus::Internal, "panic inside plp".into()),
    }
}

fn core(e: Error) -> PlpStatus {
    fail(status_of(&e), e.to_string())
}

unsafe fn text<'a>(s: *const c_char, what: &str) -> Result<&'a str, PlpStatus> {
    if s.is_null() {
        return Err(fail(PlpStatus::InvalidArgument, format!("{what} is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| fail(PlpStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn plp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn plp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Default query options: guided grounding, pruning and caching on.
#[no_mangle]
pub extern "C" fn plp_query_options_default() -> PlpQueryOptions {
    PlpQueryOptions {
        eot: 0,
        has_eot: false,
        unguided: false,
        no_pruning: false,
        no_cache: false,
        oracle: false,
    }
}

/// Parse and stratify a program.
///
/// # Safety
/// `source` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plp_program_parse(
    source: *const c_char,
    out: *mut *mut PlpProgram,
) -> PlpStatus {
    guard(|| {
        if out.is_null() {
            return Err(fail(PlpStatus::InvalidArgument, "out is null".into()));
        }
        *out = ptr::null_mut();
        let src = text(source, "source")?;
        let program = parse_program(src).map_err(core)?;
        check_sbtp(&program).map_err(core)?;
        *out = Box::into_raw(Box::new(PlpProgram { program }));
        Ok(())
    })
}

/// # Safety
/// `program` must come from [`plp_program_parse`] and not be freed yet, or
/// be null.
#[no_mangle]
pub unsafe extern "C" fn plp_program_free(program: *mut PlpProgram) {
    if !program.is_null() {
        drop(Box::from_raw(program));
    }
}

/// Answer a conditional query `?- B | E.` against a program. `options` may
/// be null for the defaults.
///
/// # Safety
/// `program` must be a live handle, `query` a NUL-terminated string,
/// `options` null or valid, and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn plp_query(
    program: *const PlpProgram,
    query: *const c_char,
    options: *const PlpQueryOptions,
    out: *mut *mut PlpAnswerSet,
) -> PlpStatus {
    guard(|| {
        if out.is_null() || program.is_null() {
            return Err(fail(
                PlpStatus::InvalidArgument,
                "program or out is null".into(),
            ));
        }
        *out = ptr::null_mut();
        let q = parse_query(text(query, "query")?).map_err(core)?;
        let o = if options.is_null() {
            plp_query_options_default()
        } else {
            *options
        };
        let mut opts = QueryOptions {
            eot: o.has_eot.then_some(o.eot),
            oracle: o.oracle,
            ground: if o.unguided {
                GroundOptions::unguided()
            } else {
                GroundOptions::default()
            },
            ..QueryOptions::default()
        };
        opts.ve.pruning = !o.no_pruning;
        opts.ve.cache = !o.no_cache;
        let a = answer_conditional_query(&(*program).program, &q, opts).map_err(core)?;
        let answers = a
            .answers
            .iter()
            .map(|x| Answer {
                bindings: CString::new(x.subst.to_string()).unwrap_or_default(),
                probability: x.probability,
            })
            .collect();
        *out = Box::into_raw(Box::new(PlpAnswerSet {
            answers,
            evidence_probability: a.evidence_prob,
        }));
        Ok(())
    })
}

/// Number of answers, including those with probability 0.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plp_answer_set_len(set: *const PlpAnswerSet) -> usize {
    set.as_ref().map_or(0, |s| s.answers.len())
}

/// Conditional probability of answer `i`, or NaN when out of range.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plp_answer_set_probability(set: *const PlpAnswerSet, i: usize) -> f64 {
    set.as_ref()
        .and_then(|s| s.answers.get(i))
        .map_or(f64::NAN, |a| a.probability)
}

/// Bindings of answer `i` as text such as `{X=rainy}`, owned by the set;
/// null when out of range.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plp_answer_set_bindings(
    set: *const PlpAnswerSet,
    i: usize,
) -> *const c_char {
    set.as_ref()
        .and_then(|s| s.answers.get(i))
        .map_or(ptr::null(), |a| a.bindings.as_ptr())
}

/// Probability of the evidence, 1 without evidence.
///
/// # Safety
/// `set` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn plp_answer_set_evidence_probability(set: *const PlpAnswerSet) -> f64 {
    set.as_ref().map_or(f64::NAN, |s| s.evidence_probability)
}

/// # Safety
/// `set` must come from [`plp_query`] and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn plp_answer_set_free(set: *mut PlpAnswerSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}
