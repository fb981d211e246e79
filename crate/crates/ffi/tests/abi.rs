use std::ffi::{c_char, CStr, CString};
use std::ptr;

use nonadditive_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_str().unwrap().to_owned();
    na_string_free(s);
    out
}

const NONCONVEX2: &str = r#"{"n": 2, "values": {"0": "0", "1": "3/5", "2": "3/5", "3": "1"}}"#;

#[test]
fn integrals_through_handles() {
    unsafe {
        let mut v = ptr::null_mut();
        let mut f = ptr::null_mut();
        assert_eq!(na_capacity_from_json(cstr(NONCONVEX2).as_ptr(), &mut v), NaStatus::Ok);
        assert_eq!(na_function_from_json(cstr(r#"{"n": 2, "values": ["1", "1"]}"#).as_ptr(), &mut f), NaStatus::Ok);

        let mut out = ptr::null_mut();
        assert_eq!(na_choquet(v, f, &mut out), NaStatus::Ok);
        assert_eq!(take(out), "1");
        assert_eq!(na_concave(v, f, &mut out), NaStatus::Ok);
        assert_eq!(take(out), "6/5");

        let mut cover = ptr::null_mut();
        assert_eq!(na_balanced_cover(v, &mut cover), NaStatus::Ok);
        assert_eq!(na_capacity_value(cover, 3, &mut out), NaStatus::Ok);
        assert_eq!(take(out), "6/5");
        assert_eq!(na_capacity_to_json(cover, &mut out), NaStatus::Ok);
        assert!(take(out).contains("\"6/5\""));

        let mut holds = true;
        let mut witness = ptr::null_mut();
        assert_eq!(na_check_convex(v, &mut holds, &mut witness), NaStatus::Ok);
        assert!(!holds);
        assert!(take(witness).contains("convex"));

        na_capacity_free(cover);
        na_capacity_free(v);
        na_function_free(f);
    }
}

#[test]
fn induced_capacity_and_psa() {
    unsafe {
        let mut p = ptr::null_mut();
        let mut a = ptr::null_mut();
        let mut f = ptr::null_mut();
        assert_eq!(
            na_measure_from_json(cstr(r#"{"n": 4, "weights": ["1/4","1/4","1/4","1/4"]}"#).as_ptr(), &mut p),
            NaStatus::Ok
        );
        assert_eq!(
            na_partition_from_json(cstr(r#"{"n": 4, "blocks": [["0","1"],["2","3"]]}"#).as_ptr(), &mut a),
            NaStatus::Ok
        );
        assert_eq!(
            na_function_from_json(cstr(r#"{"n": 4, "values": ["3","1","2","2"]}"#).as_ptr(), &mut f),
            NaStatus::Ok
        );

        let mut out = ptr::null_mut();
        assert_eq!(na_psa(p, a, f, &mut out), NaStatus::Ok);
        assert_eq!(take(out), "3/2");

        let mut v = ptr::null_mut();
        assert_eq!(na_induce(p, a, &mut v), NaStatus::Ok);
        assert_eq!(na_choquet(v, f, &mut out), NaStatus::Ok);
        assert_eq!(take(out), "3/2");

        let mut holds = false;
        let mut witness = ptr::null_mut();
        assert_eq!(na_check_null_additive(v, &mut holds, &mut witness), NaStatus::Ok);
        assert!(!holds);
        assert!(take(witness).contains("null_additive"));
        assert_eq!(na_check_convex(v, &mut holds, ptr::null_mut()), NaStatus::Ok);
        assert!(holds);

        na_capacity_free(v);
        na_measure_free(p);
        na_partition_free(a);
        na_function_free(f);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut v = ptr::null_mut();
        assert_eq!(na_capacity_from_json(cstr("{not json").as_ptr(), &mut v), NaStatus::Parse);
        assert!(!na_last_error().is_null());
        let bad = r#"{"n": 2, "values": {"0": "0", "1": "1", "2": "1", "3": "1/2"}}"#;
        assert_eq!(na_capacity_from_json(cstr(bad).as_ptr(), &mut v), NaStatus::Invalid);
        let msg = CStr::from_ptr(na_last_error()).to_str().unwrap();
        assert!(msg.contains("monotone"), "{msg}");
        assert_eq!(na_capacity_from_json(ptr::null(), &mut v), NaStatus::NullPointer);
        assert!(v.is_null());

        let mut c = ptr::null_mut();
        let mut f = ptr::null_mut();
        assert_eq!(na_capacity_from_json(cstr(NONCONVEX2).as_ptr(), &mut c), NaStatus::Ok);
        assert!(na_last_error().is_null());
        assert_eq!(na_function_from_json(cstr(r#"{"n": 3, "values": ["1","1","1"]}"#).as_ptr(), &mut f), NaStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(na_choquet(c, f, &mut out), NaStatus::Mismatch);
        assert_eq!(na_capacity_value(c, 9, &mut out), NaStatus::Mismatch);
        na_capacity_free(c);
        na_function_free(f);
        na_capacity_free(ptr::null_mut());
    }
}
