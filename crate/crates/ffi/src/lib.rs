//! C ABI over `diolab`.
//!
//! Numbers cross the boundary as opaque handles ([`DiolabAlpha`],
//! [`DiolabMatrix`]), exact rationals as `"p/q"` strings and reports as JSON
//! strings. Every call returns a [`DiolabStatus`]; on failure the message is
//! available from [`diolab_last_error`]. Strings handed out by the library
//! must be released with [`diolab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use diolab::cf::{fixture, qdist, Alpha, RealNumberSpec};
use diolab::inhomog::{liminf_scan, Mode, ScanOptions};
use diolab::interval::{fmt_rat, rat, Rat};
use diolab::matrix::{best_approx_sequence, Matrix, MatrixSpec};
use diolab::partition::Target;
use diolab::singular::singular_average_density;
use diolab::Error;
use num_bigint::BigInt;

/// Result codes; the nonzero library codes match the CLI exit statuses.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiolabStatus {
    Ok = 0,
    Precondition = 2,
    Precision = 3,
    Budget = 4,
    Invariant = 5,
    NullArgument = 10,
    InvalidUtf8 = 11,
    Panic = 12,
}

/// Opaque real number with its expanded continued fraction.
pub struct DiolabAlpha {
    inner: Alpha,
}

/// Opaque `n×m` matrix.
pub struct DiolabMatrix {
    inner: Matrix,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> DiolabStatus {
    match e.exit_code() {
        3 => DiolabStatus::Precision,
        4 => DiolabStatus::Budget,
        5 => DiolabStatus::Invariant,
        _ => DiolabStatus::Precondition,
    }
}

enum Fail {
    Lib(Error),
    Null,
    Utf8,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> DiolabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DiolabStatus::Ok,
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            DiolabStatus::NullArgument
        }
        Ok(Err(Fail::Utf8)) => {
            set_error("string argument is not valid UTF-8".into());
            DiolabStatus::InvalidUtf8
        }
        Err(_) => {
            set_error("internal panic".into());
            DiolabStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Fail> {
    if s.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(s).to_str().map_err(|_| Fail::Utf8)
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = CString::new(s).map_err(|_| Fail::Utf8)?.into_raw();
    Ok(())
}

fn json_err(e: serde_json::Error) -> Fail {
    Fail::Lib(Error::from(e))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn diolab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the last failed call on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn diolab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned through an out-parameter. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn diolab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a number from a fixture name (`"golden"`, `"sqrt2m1"`, …) or a
/// RealNumberSpec JSON object.
///
/// # Safety
/// `spec` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn diolab_alpha_new(spec: *const c_char, out: *mut *mut DiolabAlpha) -> DiolabStatus {
    guard(|| {
        let s = read_str(spec)?;
        if out.is_null() {
            return Err(Fail::Null);
        }
        let spec: RealNumberSpec = if s.trim_start().starts_with('{') {
            serde_json::from_str(s).map_err(json_err)?
        } else {
            fixture(s)?
        };
        spec.validate()?;
        let a = Alpha::new(spec)?;
        *out = Box::into_raw(Box::new(DiolabAlpha { inner: a }));
        Ok(())
    })
}

/// # Safety
/// `a` must come from [`diolab_alpha_new`] and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn diolab_alpha_free(a: *mut DiolabAlpha) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Depth of the expanded continued fraction.
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_alpha_depth(a: *const DiolabAlpha, out: *mut usize) -> DiolabStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null)?;
        *out.as_mut().ok_or(Fail::Null)? = a.inner.max_depth();
        Ok(())
    })
}

/// Decimal string of `a_k`, `p_k` or `q_k` (`which` = 'a', 'p' or 'q').
///
/// # Safety
/// `a` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_alpha_term(a: *const DiolabAlpha, which: c_char, k: usize, out: *mut *mut c_char) -> DiolabStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null)?;
        let c = a.inner.conv();
        if k > c.last() {
            return Err(Error::Precondition(format!("k = {k} exceeds depth {}", c.last())).into());
        }
        let v = match which as u8 {
            b'a' => c.a(k).to_string(),
            b'p' => c.p(k as isize).to_string(),
            b'q' => c.q(k as isize).to_string(),
            _ => return Err(Error::Precondition("which must be 'a', 'p' or 'q'".into()).into()),
        };
        put_string(out, v)
    })
}

/// Enclosure `[lo, hi]` of `‖qα‖` with width at most `budget_bits` binary digits.
///
/// # Safety
/// `a` must be a live handle; `lo` and `hi` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_qdist(
    a: *const DiolabAlpha,
    q: u64,
    budget_bits: u32,
    lo: *mut *mut c_char,
    hi: *mut *mut c_char,
) -> DiolabStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null)?;
        let v = qdist(&a.inner, &BigInt::from(q), &diolab::interval::pow2(-(budget_bits as i64)))?;
        put_string(lo, fmt_rat(&v.lo))?;
        put_string(hi, fmt_rat(&v.hi))
    })
}

/// Number of `ℓ ∈ 1..=n` at which `‖qα‖ ≤ c 2^-ℓ` has a solution `0 < q ≤ 2^ℓ`,
/// with `c = c_num/c_den`.
///
/// # Safety
/// `a` must be a live handle and `solvable` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_singular_count(
    a: *const DiolabAlpha,
    c_num: i64,
    c_den: i64,
    n: u32,
    solvable: *mut u32,
) -> DiolabStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null)?;
        if c_den == 0 {
            return Err(Error::Precondition("zero denominator".into()).into());
        }
        let r = singular_average_density(&a.inner, &rat(c_num, c_den), n)?;
        *solvable.as_mut().ok_or(Fail::Null)? = r.solvable_count;
        Ok(())
    })
}

/// Scan of `|q|·‖qα − x‖` for `q_lo ≤ |q| ≤ q_hi`, `x = x_num/x_den`, as a JSON report
/// `{mode, q_lo, q_hi, min_lo, min_hi, argmin, below_threshold}`.
///
/// # Safety
/// `a` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_scan(
    a: *const DiolabAlpha,
    x_num: i64,
    x_den: i64,
    q_lo: u64,
    q_hi: u64,
    positive_only: bool,
    out_json: *mut *mut c_char,
) -> DiolabStatus {
    guard(|| {
        let a = a.as_ref().ok_or(Fail::Null)?;
        if x_den == 0 {
            return Err(Error::Precondition("zero denominator".into()).into());
        }
        let x: Rat = rat(x_num, x_den);
        let mode = if positive_only { Mode::Positive } else { Mode::TwoSided };
        let s = liminf_scan(
            &a.inner,
            &Target::Rational(x),
            &BigInt::from(q_lo),
            &BigInt::from(q_hi),
            mode,
            &ScanOptions::default(),
        )?;
        put_string(out_json, serde_json::to_string(&s.report()).map_err(json_err)?)
    })
}

/// Builds a matrix from MatrixSpec JSON.
///
/// # Safety
/// `json` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_matrix_new(json: *const c_char, out: *mut *mut DiolabMatrix) -> DiolabStatus {
    guard(|| {
        let s = read_str(json)?;
        if out.is_null() {
            return Err(Fail::Null);
        }
        let spec: MatrixSpec = serde_json::from_str(s).map_err(json_err)?;
        let m = Matrix::new(spec)?;
        *out = Box::into_raw(Box::new(DiolabMatrix { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`diolab_matrix_new`] and not have been freed. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn diolab_matrix_free(m: *mut DiolabMatrix) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Best approximation vectors with `Y ≤ ymax`, as JSON.
///
/// # Safety
/// `m` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn diolab_best_approx(m: *const DiolabMatrix, ymax: i64, out_json: *mut *mut c_char) -> DiolabStatus {
    guard(|| {
        let m = m.as_ref().ok_or(Fail::Null)?;
        let seq = best_approx_sequence(&m.inner, ymax)?;
        put_string(out_json, serde_json::to_string(&seq).map_err(json_err)?)
    })
}
