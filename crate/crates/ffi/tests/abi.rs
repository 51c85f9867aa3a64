use std::ffi::{CStr, CString};
use std::ptr;

use nbmlc_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(nbmlc_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn field_arithmetic() {
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_field_new(2, 0, &mut f) }, NbmlcStatus::Ok);
    assert_eq!(unsafe { nbmlc_field_order(f) }, 4);
    let mut v = 0u8;
    assert_eq!(unsafe { nbmlc_field_mul(f, 2, 3, &mut v) }, NbmlcStatus::Ok);
    assert_eq!(v, 1);
    assert_eq!(unsafe { nbmlc_field_inv(f, 2, &mut v) }, NbmlcStatus::Ok);
    assert_eq!(v, 3);
    assert_eq!(unsafe { nbmlc_field_inv(f, 0, &mut v) }, NbmlcStatus::ZeroInverse);
    assert_eq!(unsafe { nbmlc_field_mul(f, 4, 1, &mut v) }, NbmlcStatus::SymbolOutOfRange);
    unsafe { nbmlc_field_free(f) };
}

#[test]
fn code_encode_decode_roundtrip() {
    let mut code = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_code_peg(4, 60, 12, 2, 3, &mut code) }, NbmlcStatus::Ok);
    let (mut n, mut m, mut k, mut q) = (0usize, 0usize, 0usize, 0usize);
    assert_eq!(unsafe { nbmlc_code_dims(code, &mut n, &mut m, &mut k, &mut q) }, NbmlcStatus::Ok);
    assert_eq!((n, m, q), (60, 12, 16));
    assert_eq!(k, 48);

    let info: Vec<u8> = (0..k).map(|i| (i * 7 % 16) as u8).collect();
    let mut word = vec![0u8; n];
    assert_eq!(unsafe { nbmlc_code_encode(code, info.as_ptr(), k, word.as_mut_ptr(), n) }, NbmlcStatus::Ok);
    let mut syn = vec![1u8; m];
    assert_eq!(unsafe { nbmlc_code_syndrome(code, word.as_ptr(), n, syn.as_mut_ptr(), m) }, NbmlcStatus::Ok);
    assert!(syn.iter().all(|&s| s == 0));

    // soft priors leaning 70% toward the sent symbol
    let mut priors = vec![0.3 / 15.0; n * q];
    for (j, &s) in word.iter().enumerate() {
        priors[j * q + s as usize] = 0.7;
    }
    let mut decided = vec![0u8; n];
    let (mut its, mut conv) = (0u32, false);
    let status = unsafe {
        nbmlc_code_decode(code, priors.as_ptr(), priors.len(), 30, decided.as_mut_ptr(), n, &mut its, &mut conv)
    };
    assert_eq!(status, NbmlcStatus::Ok);
    assert!(conv && its >= 1);
    assert_eq!(decided, word);

    assert_eq!(
        unsafe { nbmlc_code_encode(code, info.as_ptr(), k - 1, word.as_mut_ptr(), n) },
        NbmlcStatus::LengthMismatch
    );
    assert!(last_error().starts_with("length-mismatch"));
    unsafe { nbmlc_code_free(code) };
}

#[test]
fn alist_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("c.alist").to_str().unwrap()).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_code_peg(3, 30, 6, 2, 1, &mut a) }, NbmlcStatus::Ok);
    assert_eq!(unsafe { nbmlc_code_save(a, path.as_ptr()) }, NbmlcStatus::Ok);
    let mut b = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_code_load(path.as_ptr(), &mut b) }, NbmlcStatus::Ok);
    let mut kb = 0;
    unsafe { nbmlc_code_dims(b, ptr::null_mut(), ptr::null_mut(), &mut kb, ptr::null_mut()) };
    assert_eq!(kb, 24);
    let missing = CString::new(dir.path().join("nope.alist").to_str().unwrap()).unwrap();
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_code_load(missing.as_ptr(), &mut c) }, NbmlcStatus::Io);
    assert!(c.is_null());
    unsafe {
        nbmlc_code_free(a);
        nbmlc_code_free(b);
    }
}

#[test]
fn scheme_and_simulation() {
    let name = CString::new("qam64-gf16-mlc").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { nbmlc_scheme_preset(name.as_ptr(), 50, 2, &mut s) }, NbmlcStatus::Ok);
    assert_eq!(unsafe { nbmlc_scheme_info_bits(s) }, 240);
    assert!((unsafe { nbmlc_scheme_total_rate(s) } - 0.8).abs() < 1e-12);
    let mut p = NbmlcSimPoint::default();
    assert_eq!(unsafe { nbmlc_sim_run_point(s, 30.0, 10, 50, 30, 1, 4, &mut p) }, NbmlcStatus::Ok);
    assert_eq!((p.trials, p.block_errors, p.bits), (50, 0, 50 * 240));
    unsafe { nbmlc_scheme_free(s) };

    let bad = CString::new("qam8-none").unwrap();
    assert_eq!(unsafe { nbmlc_scheme_preset(bad.as_ptr(), 0, 0, &mut s) }, NbmlcStatus::UnknownPreset);
}

#[test]
fn analysis_entry_points() {
    let mut c = NbmlcComplexity::default();
    assert_eq!(unsafe { nbmlc_complexity(2000, 0.8, 64, 10.0, 2.0, 11, &mut c) }, NbmlcStatus::Ok);
    assert_eq!((c.gf_mul, c.float_add, c.float_mul, c.memory), (8000, 3_072_000, 856_800, 277_200));
    assert_eq!(unsafe { nbmlc_complexity(2000, 1.5, 64, 10.0, 2.0, 11, &mut c) }, NbmlcStatus::InvalidArgument);
    let mut limit = 0.0;
    assert_eq!(unsafe { nbmlc_shannon_limit(6, 0.8, &mut limit) }, NbmlcStatus::Ok);
    assert!((limit - 8.61).abs() < 0.1);
}
