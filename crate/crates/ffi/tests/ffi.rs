use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use plp_ffi::*;

const HMM: &str = include_str!("../../core/corpus/hmm.plp");

fn parse(src: &str) -> (PlpStatus, *mut PlpProgram) {
    let src = CString::new(src).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { plp_program_parse(src.as_ptr(), &mut p) };
    (s, p)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(plp_last_error()) }
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn filtering_query() {
    let (s, p) = parse(HMM);
    assert_eq!(s, PlpStatus::Ok);
    let q = CString::new("?- state=X@1 | obs=0@0.").unwrap();
    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(plp_query(p, q.as_ptr(), ptr::null(), &mut a), PlpStatus::Ok);
        assert_eq!(plp_answer_set_len(a), 2);
        let mut total = 0.0;
        let mut names = Vec::new();
        for i in 0..plp_answer_set_len(a) {
            total += plp_answer_set_probability(a, i);
            names.push(
                CStr::from_ptr(plp_answer_set_bindings(a, i))
                    .to_str()
                    .unwrap()
                    .to_string(),
            );
        }
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(names, ["{X=rainy}", "{X=sunny}"]);
        assert!(plp_answer_set_bindings(a, 2).is_null());
        assert!(plp_answer_set_probability(a, 2).is_nan());
        assert!(plp_answer_set_evidence_probability(a) > 0.0);
        plp_answer_set_free(a);
        plp_program_free(p);
    }
}

#[test]
fn options_change_nothing_but_cost() {
    let (_, p) = parse(HMM);
    let q = CString::new("?- state=X@2 | obs=0@1, obs=4@2.").unwrap();
    let mut probs = Vec::new();
    for unguided in [false, true] {
        let mut o = plp_query_options_default();
        o.unguided = unguided;
        o.no_pruning = unguided;
        o.has_eot = true;
        o.eot = 2;
        let mut a = ptr::null_mut();
        unsafe {
            assert_eq!(plp_query(p, q.as_ptr(), &o, &mut a), PlpStatus::Ok);
            probs.push(plp_answer_set_probability(a, 0));
            plp_answer_set_free(a);
        }
    }
    assert!((probs[0] - probs[1]).abs() < 1e-9);
    unsafe { plp_program_free(p) };
}

#[test]
fn error_codes() {
    let (s, p) = parse("p :- \\+ q. q :- \\+ p.");
    assert_eq!(s, PlpStatus::NotStratified);
    assert!(p.is_null());
    assert!(last_error().contains("negation cycle"));

    assert_eq!(parse("p :- .").0, PlpStatus::Syntax);

    let (_, p) = parse(HMM);
    let q = CString::new("?- state=X@0 | obs=40@0.").unwrap();
    let mut a = ptr::null_mut();
    unsafe {
        assert_eq!(
            plp_query(p, q.as_ptr(), ptr::null(), &mut a),
            PlpStatus::EvidenceZero
        );
        assert!(a.is_null());
        assert_eq!(
            plp_query(p, ptr::null(), ptr::null(), &mut a),
            PlpStatus::InvalidArgument
        );
        assert_eq!(
            plp_program_parse(ptr::null(), ptr::null_mut()),
            PlpStatus::InvalidArgument
        );
        plp_program_free(p);
        plp_program_free(ptr::null_mut());
        plp_answer_set_free(ptr::null_mut());
        assert_eq!(plp_answer_set_len(ptr::null()), 0);
    }
}

#[test]
fn version() {
    let v = unsafe { CStr::from_ptr(plp_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_is_valid_c() {
    let header = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/plp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "plp_program_parse",
        "plp_query",
        "plp_answer_set_free",
        "typedef struct PlpProgram PlpProgram",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    let Ok(o) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c"])
        .arg(&header)
        .output()
    else {
        return;
    };
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}
