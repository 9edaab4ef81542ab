use std::ffi::{CStr, CString};
use std::ptr;

use interlace_ffi::*;

const PAIR_JSON: &str = r#"{"schema_version":"1","dim":2,
  "matrices":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;

fn last_error() -> String {
    let p = interlace_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn diag_pair() -> *mut InterlaceEnsemble {
    // diag(1,-1), diag(-1,1)
    let re = [1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0, 1.0];
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { interlace_ensemble_new(2, 2, re.as_ptr(), ptr::null(), &mut e) }, InterlaceStatus::Ok);
    e
}

fn coeffs(p: *const InterlacePolynomial) -> Vec<f64> {
    let mut len = 0;
    assert_eq!(unsafe { interlace_polynomial_coeffs(p, ptr::null_mut(), 0, &mut len) }, InterlaceStatus::BufferTooSmall);
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { interlace_polynomial_coeffs(p, buf.as_mut_ptr(), len, &mut len) }, InterlaceStatus::Ok);
    buf
}

#[test]
fn mixed_char_poly_of_signed_pair() {
    let e = diag_pair();
    let (mut dim, mut len) = (0, 0);
    assert_eq!(unsafe { interlace_ensemble_shape(e, &mut dim, &mut len) }, InterlaceStatus::Ok);
    assert_eq!((dim, len), (2, 2));

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { interlace_mixed_char_poly(e, [1.0, 1.0].as_ptr(), 2, &mut p) }, InterlaceStatus::Ok);
    assert_eq!(coeffs(p), vec![2.0, 0.0, 1.0]);
    // x^2 + 2 has no real roots
    let mut root = 0.0;
    assert_eq!(unsafe { interlace_polynomial_maxroot(p, 1e-12, &mut root) }, InterlaceStatus::NotRealRooted);
    assert!(!last_error().is_empty());
    unsafe {
        interlace_polynomial_free(p);
        interlace_ensemble_free(e);
    }
}

#[test]
fn psd_pair_roots_and_solvers() {
    let json = CString::new(PAIR_JSON).unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { interlace_ensemble_from_json(json.as_ptr(), &mut e) }, InterlaceStatus::Ok);

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { interlace_mixed_char_poly(e, [1.0, 1.0].as_ptr(), 2, &mut p) }, InterlaceStatus::Ok);
    // (x - 1)^2
    assert_eq!(coeffs(p), vec![1.0, -2.0, 1.0]);
    let mut root = 0.0;
    assert_eq!(unsafe { interlace_polynomial_maxroot(p, 1e-12, &mut root) }, InterlaceStatus::Ok);
    assert!((root - 1.0).abs() < 1e-9, "{root}");
    unsafe { interlace_polynomial_free(p) };

    let mut q = ptr::null_mut();
    assert_eq!(unsafe { interlace_quadratic_mixed_char_poly(e, &mut q) }, InterlaceStatus::Ok);
    assert_eq!(coeffs(q).len(), 5);
    unsafe { interlace_polynomial_free(q) };

    let values = [-1.0, 1.0, -1.0, 1.0];
    let probs = [0.5; 4];
    let sizes = [2usize, 2];
    let mut outcome = [0.0; 2];
    let (mut achieved, mut bound) = (0.0, 0.0);
    let st = unsafe {
        interlace_solve_kls(e, values.as_ptr(), probs.as_ptr(), sizes.as_ptr(), true, outcome.as_mut_ptr(), &mut achieved, &mut bound)
    };
    assert_eq!(st, InterlaceStatus::Ok);
    assert!(outcome.iter().all(|v| v.abs() == 1.0));
    assert_eq!((achieved, bound), (1.0, 4.0));

    unsafe { interlace_ensemble_free(e) };
}

#[test]
fn lyapunov_and_partition_on_small_rank_one_family() {
    // e1 e1^T / 4, e2 e2^T / 4, twice each: sum is I/2
    let d = 2;
    let mut re = Vec::new();
    for k in 0..4 {
        let mut m = [0.0; 4];
        m[if k % 2 == 0 { 0 } else { 3 }] = 0.25;
        re.extend_from_slice(&m);
    }
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { interlace_ensemble_new(d, 4, re.as_ptr(), ptr::null(), &mut e) }, InterlaceStatus::Ok);

    let weights = [0.5; 4];
    let mut selected = [9u8; 4];
    let (mut achieved, mut bound) = (0.0, 0.0);
    let st = unsafe { interlace_lyapunov_select(e, weights.as_ptr(), selected.as_mut_ptr(), &mut achieved, &mut bound) };
    assert_eq!(st, InterlaceStatus::Ok, "{}", last_error());
    assert!(selected.iter().all(|&s| s <= 1));
    assert!(achieved <= bound + 1e-9);

    let t = [0.5, 0.5];
    let mut block_of = [7usize; 4];
    let (mut norms, mut bounds) = ([0.0; 2], [0.0; 2]);
    let st = unsafe { interlace_ks_r_partition(e, t.as_ptr(), 2, block_of.as_mut_ptr(), norms.as_mut_ptr(), bounds.as_mut_ptr()) };
    assert_eq!(st, InterlaceStatus::Ok, "{}", last_error());
    assert!(block_of.iter().all(|&b| b < 2));
    assert!(norms.iter().zip(&bounds).all(|(n, b)| n <= &(b + 1e-9)));

    unsafe { interlace_ensemble_free(e) };
}

#[test]
fn errors_set_status_and_message() {
    let mut e = ptr::null_mut();
    let skew = [1.0, 1.0, 0.0, 1.0];
    assert_eq!(unsafe { interlace_ensemble_new(2, 1, skew.as_ptr(), ptr::null(), &mut e) }, InterlaceStatus::NotHermitian);
    assert!(e.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { interlace_ensemble_new(2, 1, ptr::null(), ptr::null(), &mut e) }, InterlaceStatus::NullPointer);
    assert!(last_error().contains("re"));

    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { interlace_ensemble_from_json(bad.as_ptr(), &mut e) }, InterlaceStatus::Parse);

    let pair = diag_pair();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { interlace_mixed_char_poly(pair, [1.0].as_ptr(), 1, &mut p) }, InterlaceStatus::InvalidArgument);
    assert_eq!(unsafe { interlace_mixed_char_poly(ptr::null(), [1.0].as_ptr(), 1, &mut p) }, InterlaceStatus::NullPointer);

    // signed matrices are not PSD, so the discrepancy solver rejects them
    let sizes = [1usize, 1];
    let (vals, probs) = ([0.0, 0.0], [1.0, 1.0]);
    let mut outcome = [0.0; 2];
    let (mut a, mut b) = (0.0, 0.0);
    let st = unsafe { interlace_solve_kls(pair, vals.as_ptr(), probs.as_ptr(), sizes.as_ptr(), false, outcome.as_mut_ptr(), &mut a, &mut b) };
    assert_eq!(st, InterlaceStatus::NotPsd, "{}", last_error());

    unsafe {
        interlace_ensemble_free(pair);
        interlace_ensemble_free(ptr::null_mut());
        interlace_polynomial_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/interlace.h")).unwrap();
    for name in [
        "interlace_last_error_message",
        "interlace_ensemble_new",
        "interlace_ensemble_from_json",
        "interlace_ensemble_free",
        "interlace_ensemble_shape",
        "interlace_mixed_char_poly",
        "interlace_quadratic_mixed_char_poly",
        "interlace_polynomial_coeffs",
        "interlace_polynomial_maxroot",
        "interlace_polynomial_free",
        "interlace_solve_kls",
        "interlace_lyapunov_select",
        "interlace_ks_r_partition",
        "typedef struct InterlaceEnsemble InterlaceEnsemble",
        "INTERLACE_STATUS_OK = 0",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}
