use std::ffi::{c_char, CStr, CString};
use std::ptr;

use diolab_ffi::*;

unsafe fn take(s: *mut c_char) -> String {
    let v = CStr::from_ptr(s).to_str().unwrap().to_owned();
    diolab_string_free(s);
    v
}

fn alpha(name: &str) -> *mut DiolabAlpha {
    let c = CString::new(name).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { diolab_alpha_new(c.as_ptr(), &mut a) }, DiolabStatus::Ok);
    a
}

#[test]
fn convergents_of_golden() {
    let a = alpha("golden");
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(diolab_alpha_term(a, b'q' as c_char, 20, &mut s), DiolabStatus::Ok);
        assert_eq!(take(s), "10946");
        let mut d = 0usize;
        assert_eq!(diolab_alpha_depth(a, &mut d), DiolabStatus::Ok);
        assert!(d >= 20);
        diolab_alpha_free(a);
    }
}

#[test]
fn qdist_encloses_float_value() {
    let a = alpha(r#"{"kind":"quadratic","preperiod":[0],"period":[2]}"#);
    unsafe {
        let (mut lo, mut hi) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(diolab_qdist(a, 5, 60, &mut lo, &mut hi), DiolabStatus::Ok);
        let parse = |s: String| {
            let (n, d) = s.split_once('/').unwrap();
            n.parse::<f64>().unwrap() / d.parse::<f64>().unwrap()
        };
        let (l, h) = (parse(take(lo)), parse(take(hi)));
        let want = 5.0 * (2f64.sqrt() - 1.0) - 2.0;
        assert!(l <= want + 1e-15 && want - 1e-15 <= h);
        diolab_alpha_free(a);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let bad = CString::new("not-a-fixture").unwrap();
        let mut a = ptr::null_mut();
        assert_eq!(diolab_alpha_new(bad.as_ptr(), &mut a), DiolabStatus::Precondition);
        assert!(a.is_null());
        let msg = CStr::from_ptr(diolab_last_error()).to_str().unwrap();
        assert!(msg.contains("not-a-fixture"), "{msg}");
        assert_eq!(diolab_alpha_new(ptr::null(), &mut a), DiolabStatus::NullArgument);
        let g = alpha("golden");
        let mut n = 0u32;
        assert_eq!(diolab_singular_count(g, -1, 4, 10, &mut n), DiolabStatus::Precondition);
        assert_eq!(diolab_singular_count(g, 1, 1, 30, &mut n), DiolabStatus::Ok);
        assert_eq!(n, 30);
        diolab_alpha_free(g);
    }
}

#[test]
fn scan_and_best_approx_json() {
    let a = alpha("golden");
    unsafe {
        let mut js = ptr::null_mut();
        assert_eq!(diolab_scan(a, 1, 2, 1, 10_000, false, &mut js), DiolabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
        assert_eq!(v["mode"], "two_sided");
        diolab_alpha_free(a);
        let spec = CString::new(r#"{"n":1,"m":1,"entries":[[{"kind":"quadratic","preperiod":[0],"period":[2]}]]}"#).unwrap();
        let mut m = ptr::null_mut();
        assert_eq!(diolab_matrix_new(spec.as_ptr(), &mut m), DiolabStatus::Ok);
        let mut js = ptr::null_mut();
        assert_eq!(diolab_best_approx(m, 100, &mut js), DiolabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
        let ys: Vec<i64> = v["items"].as_array().unwrap().iter().map(|b| b["Y"].as_i64().unwrap()).collect();
        assert_eq!(ys, [1, 2, 5, 12, 29, 70]);
        diolab_matrix_free(m);
    }
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/diolab.h")).unwrap();
    for name in ["diolab_alpha_new", "diolab_string_free", "diolab_last_error", "DIOLAB_STATUS_BUDGET", "typedef struct DiolabAlpha"] {
        assert!(h.contains(name), "{name}");
    }
    let v = unsafe { CStr::from_ptr(diolab_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
