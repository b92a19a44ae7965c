//! C ABI over `frobthresh`.
//!
//! Rings and ideals are opaque heap handles released with the matching
//! `*_free`. Every fallible call returns an [`FtStatus`]; the message of the
//! last failure on the calling thread is available from
//! [`ft_last_error_message`]. Strings are returned through caller buffers:
//! the required size (including the NUL) is always written to `needed`, and
//! `FT_BUFFER_TOO_SMALL` is returned when `cap` is short.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use frobthresh::cli::{self, JobSpec};
use frobthresh::frobenius::PairDivisor;
use frobthresh::qadic::ExactRational;
use frobthresh::testideal::{test_ideal, MixedExponent};
use frobthresh::thresholds::{fjn, ThresholdQuery};
use frobthresh::{Error, Ideal, PolyRing};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FtStatus {
    FtOk = 0,
    FtNullPointer = 1,
    FtInvalidUtf8 = 2,
    FtInvalidRing = 3,
    FtParse = 4,
    FtDomain = 5,
    FtUnsupported = 6,
    FtOverflow = 7,
    FtUnresolved = 8,
    FtBufferTooSmall = 9,
    FtPanic = 10,
}

/// Opaque polynomial ring handle.
pub struct FtRing {
    ring: Arc<PolyRing>,
}

/// Opaque ideal handle.
pub struct FtIdeal {
    ideal: Ideal,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> FtStatus {
    set_error(e.to_string());
    match e {
        Error::InvalidRing(_) => FtStatus::FtInvalidRing,
        Error::Parse(_) => FtStatus::FtParse,
        Error::Unsupported(_) => FtStatus::FtUnsupported,
        Error::Overflow(_) => FtStatus::FtOverflow,
        _ => FtStatus::FtDomain,
    }
}

fn guard(f: impl FnOnce() -> FtStatus) -> FtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            FtStatus::FtPanic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, FtStatus> {
    if p.is_null() {
        set_error("null string argument");
        return Err(FtStatus::FtNullPointer);
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        FtStatus::FtInvalidUtf8
    })
}

unsafe fn write_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> FtStatus {
    let n = s.len() + 1;
    if !needed.is_null() {
        *needed = n;
    }
    if buf.is_null() || cap < n {
        set_error(format!("buffer of {cap} bytes is too small, {n} needed"));
        return FtStatus::FtBufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    FtStatus::FtOk
}

macro_rules! try_ft {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

unsafe fn divisor(ring: &FtRing, f: *const c_char, a: u64, e: u32) -> Result<PairDivisor, FtStatus> {
    let r = if f.is_null() {
        PairDivisor::trivial(&ring.ring, e)
    } else {
        let text = read_str(f)?;
        ring.ring.parse(text).and_then(|poly| PairDivisor::new(&ring.ring, poly, a, e))
    };
    r.map_err(|err| status_of(&err))
}

/// Message of the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates F_p[vars], `vars` comma-separated.
///
/// # Safety
/// `vars` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ft_ring_new(p: u32, vars: *const c_char, out: *mut *mut FtRing) -> FtStatus {
    guard(|| {
        if out.is_null() {
            return FtStatus::FtNullPointer;
        }
        let vars = try_ft!(read_str(vars));
        let names: Vec<&str> = vars.split(',').map(str::trim).collect();
        match PolyRing::new(p, &names) {
            Ok(ring) => {
                *out = Box::into_raw(Box::new(FtRing { ring }));
                FtStatus::FtOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `ring` must come from [`ft_ring_new`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ft_ring_free(ring: *mut FtRing) {
    if !ring.is_null() {
        drop(Box::from_raw(ring));
    }
}

/// Parses a comma-separated generator list, e.g. `"x^2, x*y"`.
///
/// # Safety
/// `ring` must be a live handle, `text` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ft_ideal_parse(ring: *const FtRing, text: *const c_char, out: *mut *mut FtIdeal) -> FtStatus {
    guard(|| {
        if ring.is_null() || out.is_null() {
            return FtStatus::FtNullPointer;
        }
        let text = try_ft!(read_str(text));
        match Ideal::parse(&(*ring).ring, text) {
            Ok(ideal) => {
                *out = Box::into_raw(Box::new(FtIdeal { ideal }));
                FtStatus::FtOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `ideal` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn ft_ideal_free(ideal: *mut FtIdeal) {
    if !ideal.is_null() {
        drop(Box::from_raw(ideal));
    }
}

/// Writes the canonical text `(g1, g2, ...)` of the reduced basis.
///
/// # Safety
/// `ideal` must be live; `buf` must hold `cap` bytes or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ft_ideal_to_string(
    ideal: *const FtIdeal,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| {
        if ideal.is_null() {
            return FtStatus::FtNullPointer;
        }
        write_str(&(*ideal).ideal.to_string(), buf, cap, needed)
    })
}

/// Whether `a ⊆ b`; writes 1 or 0 to `out`.
///
/// # Safety
/// Handles must be live and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ft_ideal_is_subset(a: *const FtIdeal, b: *const FtIdeal, out: *mut i32) -> FtStatus {
    guard(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return FtStatus::FtNullPointer;
        }
        match (*a).ideal.try_is_subset_of(&(*b).ideal) {
            Ok(v) => {
                *out = v as i32;
                FtStatus::FtOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Certified test ideal τ(R, Δ, a^t) with Δ = a/(p^e−1)·div(f), or the
/// trivial divisor when `f` is NULL. `t` is a rational like `"5/6"`.
///
/// # Safety
/// `ring`, `a` live; `f` NULL or NUL-terminated; `t` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn ft_test_ideal(
    ring: *const FtRing,
    f: *const c_char,
    coeff: u64,
    e: u32,
    a: *const FtIdeal,
    t: *const c_char,
    out: *mut *mut FtIdeal,
) -> FtStatus {
    guard(|| {
        if ring.is_null() || a.is_null() || out.is_null() {
            return FtStatus::FtNullPointer;
        }
        let d = try_ft!(divisor(&*ring, f, coeff, e));
        let t: ExactRational = match try_ft!(read_str(t)).parse() {
            Ok(t) => t,
            Err(err) => return status_of(&err),
        };
        let m = match MixedExponent::single((*a).ideal.clone(), t) {
            Ok(m) => m,
            Err(err) => return status_of(&err),
        };
        match test_ideal(&d, &m) {
            Ok((ideal, cert)) => {
                *out = Box::into_raw(Box::new(FtIdeal { ideal }));
                if cert.is_certified() {
                    FtStatus::FtOk
                } else {
                    set_error("test ideal is not certified");
                    FtStatus::FtUnresolved
                }
            }
            Err(err) => status_of(&err),
        }
    })
}

/// F-jumping number fjn^I(R, Δ; a) written as `"num/den"`; `target` NULL
/// means the maximal ideal. Returns `FT_UNRESOLVED` with the bracket
/// `"lo..hi"` in `buf` when the value could not be pinned down.
///
/// # Safety
/// Pointers as in [`ft_test_ideal`]; `buf` holds `cap` bytes or is NULL.
#[no_mangle]
pub unsafe extern "C" fn ft_fpt(
    ring: *const FtRing,
    f: *const c_char,
    coeff: u64,
    e: u32,
    a: *const FtIdeal,
    target: *const FtIdeal,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> FtStatus {
    guard(|| {
        if ring.is_null() || a.is_null() {
            return FtStatus::FtNullPointer;
        }
        let d = try_ft!(divisor(&*ring, f, coeff, e));
        let i = if target.is_null() {
            Ideal::maximal(&(*ring).ring)
        } else {
            (*target).ideal.clone()
        };
        let q = match ThresholdQuery::new(d, (*a).ideal.clone(), i) {
            Ok(q) => q,
            Err(err) => return status_of(&err),
        };
        match fjn(&q) {
            Ok(res) => match (res.resolved, res.value) {
                (true, Some(v)) => write_str(&v.to_string(), buf, cap, needed),
                _ => {
                    let s = write_str(&format!("{}..{}", res.lo, res.hi), buf, cap, needed);
                    if s != FtStatus::FtOk {
                        return s;
                    }
                    set_error("threshold unresolved");
                    FtStatus::FtUnresolved
                }
            },
            Err(err) => status_of(&err),
        }
    })
}

/// Runs a CLI command on a `key = value` job text and writes the JSON
/// report. `exit_code` receives the CLI exit status (0, 1 or 2).
///
/// # Safety
/// Strings NUL-terminated; `buf` holds `cap` bytes or is NULL.
#[no_mangle]
pub unsafe extern "C" fn ft_run_job(
    command: *const c_char,
    job: *const c_char,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
    exit_code: *mut i32,
) -> FtStatus {
    guard(|| {
        let command = try_ft!(read_str(command));
        let job = try_ft!(read_str(job));
        let spec = match JobSpec::parse_job(job) {
            Ok(s) => s,
            Err(e) => {
                set_error(e.to_string());
                return FtStatus::FtParse;
            }
        };
        let outcome = cli::run(command, &spec);
        if !exit_code.is_null() {
            *exit_code = outcome.code;
        }
        let text = serde_json::to_string(&outcome.report).unwrap_or_default();
        write_str(&text, buf, cap, needed)
    })
}
