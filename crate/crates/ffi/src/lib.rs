//! C ABI over `nbmlc`.
//!
//! Objects are opaque heap handles created by `*_new`/`*_load`/`*_preset`
//! functions and released by the matching `*_free`. Every fallible function
//! returns an [`NbmlcStatus`]; on failure a description is available from
//! [`nbmlc_last_error`] on the same thread until the next failing call.
//! Panics never cross the boundary; they surface as `NBMLC_STATUS_PANIC`.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nbmlc::analysis::{self, ComplexityParams};
use nbmlc::channel_sim::{self, SimConfig, StopRule};
use nbmlc::codes::{load_alist, peg_construct, save_alist, Code, DegreeProfile};
use nbmlc::galois::Field;
use nbmlc::mlc::{Scheme, SchemeSpec};
use nbmlc::qspa::{Decoder, DecoderOptions};
use nbmlc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NbmlcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidField = 3,
    ZeroInverse = 4,
    DegenerateMessage = 5,
    InfeasibleProfile = 6,
    LengthMismatch = 7,
    SymbolOutOfRange = 8,
    AlistParse = 9,
    UnknownPreset = 10,
    InvalidScheme = 11,
    Io = 12,
    InvalidUtf8 = 13,
    Panic = 14,
}

impl From<&Error> for NbmlcStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidField(_) => NbmlcStatus::InvalidField,
            Error::ZeroInverse => NbmlcStatus::ZeroInverse,
            Error::DegenerateMessage => NbmlcStatus::DegenerateMessage,
            Error::InvalidArgument(_) => NbmlcStatus::InvalidArgument,
            Error::InfeasibleProfile(_) => NbmlcStatus::InfeasibleProfile,
            Error::LengthMismatch { .. } => NbmlcStatus::LengthMismatch,
            Error::SymbolOutOfRange { .. } => NbmlcStatus::SymbolOutOfRange,
            Error::Alist { .. } => NbmlcStatus::AlistParse,
            Error::UnknownPreset(_) => NbmlcStatus::UnknownPreset,
            Error::InvalidScheme(_) => NbmlcStatus::InvalidScheme,
            Error::Io { .. } => NbmlcStatus::Io,
        }
    }
}

/// Finite field GF(2^m).
pub struct NbmlcField(Field);

/// LDPC code with its encoder and a decoder workspace.
pub struct NbmlcCode {
    code: Code,
    decoder: Decoder,
}

/// Coded modulation scheme.
pub struct NbmlcScheme(Scheme);

/// Result of one simulated Eb/N0 point.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NbmlcSimPoint {
    pub trials: u64,
    pub block_errors: u64,
    pub bit_errors: u64,
    pub bits: u64,
    pub avg_iterations: f64,
}

/// Per-iteration decoding cost.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NbmlcComplexity {
    pub gf_mul: u64,
    pub float_add: u64,
    pub float_mul: u64,
    pub memory: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Lib(Error),
    Status(NbmlcStatus, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> NbmlcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NbmlcStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            set_error(format!("{}: {e}", e.kind()));
            NbmlcStatus::from(&e)
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside nbmlc".into());
            NbmlcStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(NbmlcStatus::NullPointer, format!("null pointer: {what}"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Status(NbmlcStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn check_len(expected: usize, got: usize) -> Result<(), Failure> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, got }.into())
    }
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    Ok(())
}

/// Message of the last failure on this thread; empty if none. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn nbmlc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// GF(2^m) for `m` in 1..=8; `poly` 0 selects the default primitive
/// polynomial.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_field_new(m: u32, poly: u32, out: *mut *mut NbmlcField) -> NbmlcStatus {
    guard(|| {
        let f = Field::new(m, (poly != 0).then_some(poly))?;
        boxed(out, NbmlcField(f))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_field_free(field: *mut NbmlcField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_field_order(field: *const NbmlcField) -> u32 {
    field.as_ref().map_or(0, |f| f.0.q() as u32)
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_field_mul(field: *const NbmlcField, a: u8, b: u8, out: *mut u8) -> NbmlcStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        let q = f.q();
        if let Some(&bad) = [a, b].iter().find(|&&v| v as usize >= q) {
            return Err(Error::SymbolOutOfRange { value: bad as u32, q }.into());
        }
        *deref_mut(out, "out")? = f.mul(a, b);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_field_inv(field: *const NbmlcField, a: u8, out: *mut u8) -> NbmlcStatus {
    guard(|| {
        let f = &deref(field, "field")?.0;
        if a as usize >= f.q() {
            return Err(Error::SymbolOutOfRange { value: a as u32, q: f.q() }.into());
        }
        *deref_mut(out, "out")? = f.inv(a)?;
        Ok(())
    })
}

fn wrap_code(code: Code) -> NbmlcCode {
    let decoder = Decoder::new(&code);
    NbmlcCode { code, decoder }
}

/// Column-regular PEG code over GF(2^m) (default polynomial) with `n`
/// columns, `checks` rows and column weight `column_weight`.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_peg(
    m: u32,
    n: usize,
    checks: usize,
    column_weight: usize,
    seed: u64,
    out: *mut *mut NbmlcCode,
) -> NbmlcStatus {
    guard(|| {
        let field = Field::new(m, None)?;
        let code = peg_construct(&field, &DegreeProfile::regular(n, checks, column_weight), seed)?;
        boxed(out, wrap_code(code))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_load(path: *const c_char, out: *mut *mut NbmlcCode) -> NbmlcStatus {
    guard(|| {
        let code = load_alist(string(path, "path")?)?;
        boxed(out, wrap_code(code))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_save(code: *const NbmlcCode, path: *const c_char) -> NbmlcStatus {
    guard(|| {
        save_alist(&deref(code, "code")?.code, string(path, "path")?)?;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_free(code: *mut NbmlcCode) {
    if !code.is_null() {
        drop(Box::from_raw(code));
    }
}

/// Length `n`, rows `m`, dimension `k` and field order `q`; any output may
/// be null.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_dims(
    code: *const NbmlcCode,
    n: *mut usize,
    m: *mut usize,
    k: *mut usize,
    q: *mut usize,
) -> NbmlcStatus {
    guard(|| {
        let c = &deref(code, "code")?.code;
        for (p, v) in [(n, c.n()), (m, c.m()), (k, c.k()), (q, c.field().q())] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Systematic encoding of `k` symbols into `n`.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_encode(
    code: *const NbmlcCode,
    info: *const u8,
    info_len: usize,
    word: *mut u8,
    word_len: usize,
) -> NbmlcStatus {
    guard(|| {
        let c = &deref(code, "code")?.code;
        let info = slice(info, info_len, "info")?;
        let out = slice_mut(word, word_len, "word")?;
        check_len(c.n(), word_len)?;
        out.copy_from_slice(&c.encode(info)?);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_syndrome(
    code: *const NbmlcCode,
    word: *const u8,
    word_len: usize,
    syndrome: *mut u8,
    syndrome_len: usize,
) -> NbmlcStatus {
    guard(|| {
        let c = &deref(code, "code")?.code;
        let word = slice(word, word_len, "word")?;
        let out = slice_mut(syndrome, syndrome_len, "syndrome")?;
        check_len(c.m(), syndrome_len)?;
        out.copy_from_slice(&c.syndrome(word)?);
        Ok(())
    })
}

/// FFT-QSPA decoding of `n` symbol priors laid out as `n * q` weights.
/// Writes the decided word; `iterations` and `converged` may be null.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_code_decode(
    code: *mut NbmlcCode,
    priors: *const f64,
    priors_len: usize,
    max_iterations: u32,
    word: *mut u8,
    word_len: usize,
    iterations: *mut u32,
    converged: *mut bool,
) -> NbmlcStatus {
    guard(|| {
        let h = deref_mut(code, "code")?;
        let priors = slice(priors, priors_len, "priors")?;
        let out = slice_mut(word, word_len, "word")?;
        check_len(h.code.n(), word_len)?;
        let opts = DecoderOptions { max_iterations: max_iterations as usize, early_stop: true };
        let r = h.decoder.decode_flat(priors, opts)?;
        out.copy_from_slice(&r.word);
        if let Some(p) = iterations.as_mut() {
            *p = r.iterations as u32;
        }
        if let Some(p) = converged.as_mut() {
            *p = r.converged;
        }
        Ok(())
    })
}

/// Builds a named preset by PEG; `block_symbols` 0 keeps the full length.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_scheme_preset(
    name: *const c_char,
    block_symbols: usize,
    seed: u64,
    out: *mut *mut NbmlcScheme,
) -> NbmlcStatus {
    guard(|| {
        let mut spec = SchemeSpec::preset(string(name, "name")?)?;
        if block_symbols != 0 {
            spec = spec.with_block_symbols(block_symbols)?;
        }
        boxed(out, NbmlcScheme(spec.build(seed)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn nbmlc_scheme_free(scheme: *mut NbmlcScheme) {
    if !scheme.is_null() {
        drop(Box::from_raw(scheme));
    }
}

/// Information bits per block; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_scheme_info_bits(scheme: *const NbmlcScheme) -> usize {
    scheme.as_ref().map_or(0, |s| s.0.info_bits())
}

/// Information bits per coded bit; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_scheme_total_rate(scheme: *const NbmlcScheme) -> f64 {
    scheme.as_ref().map_or(0.0, |s| s.0.total_rate())
}

/// Monte-Carlo simulation of one Eb/N0 point; `workers` 0 uses every core.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_sim_run_point(
    scheme: *const NbmlcScheme,
    ebn0_db: f64,
    min_block_errors: u64,
    max_trials: u64,
    max_iterations: u32,
    workers: usize,
    seed: u64,
    out: *mut NbmlcSimPoint,
) -> NbmlcStatus {
    guard(|| {
        let s = &deref(scheme, "scheme")?.0;
        let out = deref_mut(out, "out")?;
        let config = SimConfig {
            stop: StopRule { min_block_errors, max_trials, max_wall_time: None },
            decoder: DecoderOptions { max_iterations: max_iterations as usize, early_stop: true },
            workers,
            genie: false,
        };
        let p = channel_sim::run_point(s, ebn0_db, &config, seed)?;
        *out = NbmlcSimPoint {
            trials: p.trials,
            block_errors: p.block_errors,
            bit_errors: p.bit_errors,
            bits: p.bits,
            avg_iterations: p.avg_iterations(),
        };
        Ok(())
    })
}

/// Per-iteration complexity estimate.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_complexity(
    n: usize,
    rate: f64,
    q: usize,
    avg_check_degree: f64,
    avg_var_degree: f64,
    max_check_degree: usize,
    out: *mut NbmlcComplexity,
) -> NbmlcStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let r = analysis::complexity_estimate(&ComplexityParams {
            n,
            rate,
            q,
            avg_check_degree,
            avg_var_degree,
            max_check_degree,
        })?;
        *out = NbmlcComplexity { gf_mul: r.gf_mul, float_add: r.float_add, float_mul: r.float_mul, memory: r.memory };
        Ok(())
    })
}

/// Shannon limit (Eb/N0, dB) of uniform square `2^bits`-QAM at `rate`.
#[no_mangle]
pub unsafe extern "C" fn nbmlc_shannon_limit(bits: u32, rate: f64, out: *mut f64) -> NbmlcStatus {
    guard(|| {
        *deref_mut(out, "out")? = analysis::shannon_limit(bits, rate)?;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    #[test]
    fn errors_set_the_message() {
        let mut f: *mut NbmlcField = ptr::null_mut();
        let s = unsafe { nbmlc_field_new(9, 0, &mut f) };
        assert_eq!(s, NbmlcStatus::InvalidField);
        assert!(f.is_null());
        let msg = unsafe { CStr::from_ptr(nbmlc_last_error()) }.to_str().unwrap();
        assert!(msg.starts_with("invalid-field"), "{msg}");
    }

    #[test]
    fn null_outputs_are_rejected() {
        assert_eq!(unsafe { nbmlc_field_new(2, 0, ptr::null_mut()) }, NbmlcStatus::NullPointer);
        assert_eq!(unsafe { nbmlc_shannon_limit(6, 0.8, ptr::null_mut()) }, NbmlcStatus::NullPointer);
        unsafe { nbmlc_code_free(ptr::null_mut()) };
    }
}
