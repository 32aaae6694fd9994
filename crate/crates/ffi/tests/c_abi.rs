use std::ffi::{CStr, CString};
use std::ptr;

use one3probe_ffi::*;

const PSI1: &str = "p p3cnf 4 2\n1 2 3\n1 2 4\n";
const ALL_TRIPLES_4: &str = "p p3cnf 4 4\n2 3 4\n1 3 4\n1 2 4\n1 2 3\n";

fn parse(text: &str) -> *mut One3Formula {
    let c = CString::new(text).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(
        unsafe { one3_formula_parse(c.as_ptr(), &mut f) },
        One3Status::Ok
    );
    assert!(!f.is_null());
    f
}

unsafe fn take_string(s: *mut std::ffi::c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    one3_string_free(s);
    out
}

fn last_error() -> Option<String> {
    let p = one3_last_error();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

#[test]
fn parse_and_query() {
    let f = parse(PSI1);
    unsafe {
        assert_eq!(one3_formula_num_vars(f), 4);
        assert_eq!(one3_formula_num_clauses(f), 2);
        one3_formula_free(f);
        assert_eq!(one3_formula_num_vars(ptr::null()), 0);
    }
}

#[test]
fn parse_errors_set_status_and_message() {
    let mut f = ptr::null_mut();
    let bad = CString::new("p p3cnf 4 1\n1 2 -3\n").unwrap();
    assert_eq!(
        unsafe { one3_formula_parse(bad.as_ptr(), &mut f) },
        One3Status::Parse
    );
    assert!(f.is_null());
    assert!(last_error().unwrap().contains("line 2"));

    let invalid = CString::new("p p3cnf 3 1\n1 2 3\n").unwrap();
    assert_eq!(
        unsafe { one3_formula_parse(invalid.as_ptr(), &mut f) },
        One3Status::InvalidFormula
    );

    assert_eq!(
        unsafe { one3_formula_parse(ptr::null(), &mut f) },
        One3Status::NullPointer
    );
    let ok = CString::new(PSI1).unwrap();
    assert_eq!(
        unsafe { one3_formula_parse(ok.as_ptr(), ptr::null_mut()) },
        One3Status::NullPointer
    );

    let f = parse(PSI1);
    assert!(last_error().is_none());
    unsafe { one3_formula_free(f) };
}

#[test]
fn expand_text() {
    let f = parse(PSI1);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(one3_formula_expand(f, &mut s), One3Status::Ok);
        assert_eq!(
            take_string(s),
            "p p3cnf 10 8\n10 9 4\n10 8 3\n10 4 3\n4 3 2\n7 6 4\n7 5 3\n7 4 3\n4 3 1\n"
        );
        one3_formula_free(f);
    }
}

#[test]
fn oracle_verdicts() {
    unsafe {
        let f = parse(PSI1);
        let mut sat = false;
        let mut w = ptr::null_mut();
        assert_eq!(one3_oracle(f, &mut sat, &mut w), One3Status::Ok);
        assert!(sat);
        assert_eq!(take_string(w), "1000");
        one3_formula_free(f);

        let g = parse(ALL_TRIPLES_4);
        assert_eq!(one3_oracle(g, &mut sat, &mut w), One3Status::Ok);
        assert!(!sat);
        assert!(w.is_null());
        assert_eq!(one3_oracle(g, &mut sat, ptr::null_mut()), One3Status::Ok);
        one3_formula_free(g);
    }
}

#[test]
fn solve_repaired_and_faithful() {
    unsafe {
        let f = parse(PSI1);
        let mut r = ptr::null_mut();
        assert_eq!(
            one3_solve(f, One3Mode::Repaired, One3Decode::FConsistent, 0, &mut r),
            One3Status::Ok
        );
        assert!(one3_result_found(r));
        let mut st = One3Stats::default();
        assert_eq!(one3_result_stats(r, &mut st), One3Status::Ok);
        assert!(st.calls >= 1 && !st.budget_exhausted);
        let mut w = ptr::null_mut();
        assert_eq!(one3_result_witness(r, &mut w), One3Status::Ok);
        let w = take_string(w);
        assert_eq!(w.len(), 4);
        // exactly one true literal in (z1 z2 z3) and in (z1 z2 z4)
        let b: Vec<bool> = w.chars().map(|c| c == '1').collect();
        assert_eq!([b[0], b[1], b[2]].iter().filter(|x| **x).count(), 1);
        assert_eq!([b[0], b[1], b[3]].iter().filter(|x| **x).count(), 1);
        one3_result_free(r);

        assert_eq!(
            one3_solve(f, One3Mode::Faithful, One3Decode::FConsistent, 0, &mut r),
            One3Status::Ok
        );
        let mut w = ptr::null_mut();
        assert_eq!(one3_result_witness(r, &mut w), One3Status::NoWitness);
        assert!(w.is_null());
        one3_result_free(r);

        assert_eq!(
            one3_solve(f, One3Mode::Repaired, One3Decode::FConsistent, 1, &mut r),
            One3Status::Ok
        );
        assert_eq!(one3_result_stats(r, &mut st), One3Status::Ok);
        assert!(st.budget_exhausted);
        assert!(!one3_result_found(r));
        one3_result_free(r);
        one3_formula_free(f);
    }
}

#[test]
fn null_handles_are_rejected() {
    unsafe {
        let mut r = ptr::null_mut();
        assert_eq!(
            one3_solve(
                ptr::null(),
                One3Mode::Repaired,
                One3Decode::FConsistent,
                0,
                &mut r
            ),
            One3Status::NullPointer
        );
        assert!(!one3_result_found(ptr::null()));
        let mut st = One3Stats::default();
        assert_eq!(
            one3_result_stats(ptr::null(), &mut st),
            One3Status::NullPointer
        );
        one3_result_free(ptr::null_mut());
        one3_formula_free(ptr::null_mut());
        one3_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(one3_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
