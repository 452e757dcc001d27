//! C ABI over the toral library.
//!
//! Conventions: every fallible call returns a `ToralStatus`; results come
//! back through out-pointers. Matrices cross the boundary in the text format
//! (rows ';', entries ','). Census objects are opaque handles freed with
//! [`toral_census_free`]; strings returned by the library are freed with
//! [`toral_string_free`]. `toral_last_error` exposes a thread-local message
//! for the most recent failure. No call unwinds across the boundary.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, size_t};
use num_traits::ToPrimitive;

use toral::census::{orbit_counts, zeta_polynomial, OrbitCensus};
use toral::order::matrix_order;
use toral::pretail::pretail_tree;
use toral::symmetry::{
    build_reversor, classify_gl2_fp, reversible_mod_n, Gl2ClassTag, RevVerdict,
};
use toral::{Error, IntMatrix};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToralStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    DomainError = 4,
    CapExceeded = 5,
    Overflow = 6,
    Unrepresentable = 7,
    InternalError = 8,
}

/// Opaque census handle.
pub struct ToralCensus {
    census: OrbitCensus,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|&c| c != '\0').collect();
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(sanitized).unwrap());
}

fn status_of(err: &Error) -> ToralStatus {
    match err {
        Error::Parse { .. } => ToralStatus::ParseError,
        Error::DimensionMismatch { .. }
        | Error::ModulusMismatch(..)
        | Error::InvalidLattice { .. }
        | Error::NotAUnit { .. }
        | Error::Precondition(_)
        | Error::PlateauProviso { .. } => ToralStatus::DomainError,
        Error::EnumerationCap { .. } | Error::SearchCap { .. } => ToralStatus::CapExceeded,
        Error::Overflow(_) => ToralStatus::Overflow,
        Error::Internal(_) => ToralStatus::InternalError,
    }
}

fn fail(err: &Error) -> ToralStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Runs a closure, converting panics into `InternalError`.
fn guarded(body: impl FnOnce() -> ToralStatus) -> ToralStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ToralStatus::InternalError
        }
    }
}

unsafe fn parse_matrix(text: *const c_char) -> Result<IntMatrix, ToralStatus> {
    if text.is_null() {
        set_error("matrix pointer is null");
        return Err(ToralStatus::NullPointer);
    }
    let s = match CStr::from_ptr(text).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_error("matrix text is not valid UTF-8");
            return Err(ToralStatus::InvalidUtf8);
        }
    };
    IntMatrix::parse(s).map_err(|e| fail(&e))
}

/// Message for the most recent error on this thread. The pointer stays valid
/// until the next failing toral call on the same thread; copy it if needed.
#[no_mangle]
pub extern "C" fn toral_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must come from a toral call and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn toral_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// ord(M, n); 0 means M is not invertible mod n. Fails with `Unrepresentable`
/// if the order does not fit in 64 bits.
///
/// # Safety
/// `matrix` must be a NUL-terminated string, `out_order` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toral_matrix_order(
    matrix: *const c_char,
    modulus: u64,
    out_order: *mut u64,
) -> ToralStatus {
    guarded(|| {
        if out_order.is_null() {
            set_error("out_order is null");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let reduced = match m.reduce(modulus) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        match matrix_order(&reduced) {
            Ok(order) => match u64::try_from(order) {
                Ok(o) => {
                    *out_order = o;
                    ToralStatus::Ok
                }
                Err(_) => {
                    set_error("order exceeds 64 bits");
                    ToralStatus::Unrepresentable
                }
            },
            Err(e) => fail(&e),
        }
    })
}

/// Computes the orbit census of M on (Z/nZ)^d.
///
/// # Safety
/// `matrix` must be a NUL-terminated string, `out_census` a valid pointer;
/// the handle must be released with `toral_census_free`.
#[no_mangle]
pub unsafe extern "C" fn toral_census_compute(
    matrix: *const c_char,
    modulus: u64,
    out_census: *mut *mut ToralCensus,
) -> ToralStatus {
    guarded(|| {
        if out_census.is_null() {
            set_error("out_census is null");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let reduced = match m.reduce(modulus) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        match orbit_counts(&reduced) {
            Ok(census) => {
                *out_census = Box::into_raw(Box::new(ToralCensus { census }));
                ToralStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `census` must come from `toral_census_compute` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn toral_census_free(census: *mut ToralCensus) {
    if !census.is_null() {
        drop(Box::from_raw(census));
    }
}

/// Number of distinct cycle lengths in the census; 0 for a null handle.
///
/// # Safety
/// `census` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn toral_census_cycle_count(census: *const ToralCensus) -> size_t {
    if census.is_null() {
        return 0;
    }
    (*census).census.cycles().len()
}

/// The idx-th (length, count) pair, sorted by length.
///
/// # Safety
/// `census` must be a live handle; the out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toral_census_cycle(
    census: *const ToralCensus,
    idx: size_t,
    out_length: *mut u64,
    out_count: *mut u64,
) -> ToralStatus {
    guarded(|| {
        if census.is_null() || out_length.is_null() || out_count.is_null() {
            set_error("null pointer");
            return ToralStatus::NullPointer;
        }
        let cycles = (*census).census.cycles();
        let Some((len, cnt)) = cycles.get(idx) else {
            set_error("cycle index out of range");
            return ToralStatus::DomainError;
        };
        let (Ok(l), Some(c)) = (u64::try_from(*len), cnt.to_u64()) else {
            set_error("cycle data exceeds 64 bits");
            return ToralStatus::Unrepresentable;
        };
        *out_length = l;
        *out_count = c;
        ToralStatus::Ok
    })
}

/// Number of eventually-periodic (pretail) points.
///
/// # Safety
/// `census` must be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn toral_census_pretail_points(
    census: *const ToralCensus,
    out: *mut u64,
) -> ToralStatus {
    guarded(|| {
        if census.is_null() || out.is_null() {
            set_error("null pointer");
            return ToralStatus::NullPointer;
        }
        match (*census).census.eventually_periodic().to_u64() {
            Some(v) => {
                *out = v;
                ToralStatus::Ok
            }
            None => {
                set_error("pretail count exceeds 64 bits");
                ToralStatus::Unrepresentable
            }
        }
    })
}

/// The cycle polynomial Z_n(t) in its canonical text form. Returns null on a
/// null handle; free with `toral_string_free`.
///
/// # Safety
/// `census` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn toral_census_zeta(census: *const ToralCensus) -> *mut c_char {
    if census.is_null() {
        return std::ptr::null_mut();
    }
    let rendered = zeta_polynomial(&(*census).census).render();
    CString::new(rendered).expect("no NUL in render").into_raw()
}

/// Reversibility of a 2x2 integer matrix mod n: verdict 1 (reversible),
/// 0 (not reversible) or -1 (undecided at the search cap).
///
/// # Safety
/// `matrix` must be a NUL-terminated string, `out_verdict` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toral_reversible(
    matrix: *const c_char,
    modulus: u64,
    max_search: u64,
    out_verdict: *mut i32,
) -> ToralStatus {
    guarded(|| {
        if out_verdict.is_null() {
            set_error("out_verdict is null");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match reversible_mod_n(&m, modulus, max_search) {
            Ok(report) => {
                *out_verdict = match report.verdict {
                    RevVerdict::Reversible => 1,
                    RevVerdict::Irreversible => 0,
                    RevVerdict::Undecided => -1,
                };
                ToralStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Builds an involutory reversor of an SL(2,Z) matrix mod n and returns it in
/// the matrix text format; free with `toral_string_free`.
///
/// # Safety
/// `matrix` must be a NUL-terminated string, `out_reversor` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn toral_build_reversor(
    matrix: *const c_char,
    modulus: u64,
    max_search: u64,
    out_reversor: *mut *mut c_char,
) -> ToralStatus {
    guarded(|| {
        if out_reversor.is_null() {
            set_error("out_reversor is null");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match build_reversor(&m, modulus, max_search) {
            Ok(r) => {
                *out_reversor = CString::new(r.to_string()).expect("no NUL").into_raw();
                ToralStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// GL(2, F_p) classification: class tag 1..4 (I..IV) and reversibility flag.
///
/// # Safety
/// `matrix` must be a NUL-terminated string; out-pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn toral_classify_gl2(
    matrix: *const c_char,
    prime: u64,
    out_class: *mut i32,
    out_reversible: *mut i32,
) -> ToralStatus {
    guarded(|| {
        if out_class.is_null() || out_reversible.is_null() {
            set_error("null pointer");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        match classify_gl2_fp(&m, prime) {
            Ok(class) => {
                *out_class = match class.tag {
                    Gl2ClassTag::I => 1,
                    Gl2ClassTag::II => 2,
                    Gl2ClassTag::III => 3,
                    Gl2ClassTag::IV => 4,
                };
                *out_reversible = class.reversible as i32;
                ToralStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Level profile v_0..v_height of the pretail tree at 0. Writes at most
/// `capacity` entries and stores the true length in `out_len`; fails with
/// `Unrepresentable` when the profile does not fit.
///
/// # Safety
/// `matrix` must be a NUL-terminated string; `out_levels` must point to at
/// least `capacity` u64 slots; `out_len` must be valid.
#[no_mangle]
pub unsafe extern "C" fn toral_pretail_profile(
    matrix: *const c_char,
    modulus: u64,
    max_points: u64,
    out_levels: *mut u64,
    capacity: size_t,
    out_len: *mut size_t,
) -> ToralStatus {
    guarded(|| {
        if out_levels.is_null() || out_len.is_null() {
            set_error("null pointer");
            return ToralStatus::NullPointer;
        }
        let m = match parse_matrix(matrix) {
            Ok(m) => m,
            Err(s) => return s,
        };
        let reduced = match m.reduce(modulus) {
            Ok(r) => r,
            Err(e) => return fail(&e),
        };
        match pretail_tree(&reduced, max_points) {
            Ok(tree) => {
                *out_len = tree.v.len();
                if tree.v.len() > capacity {
                    set_error("level profile longer than the provided buffer");
                    return ToralStatus::Unrepresentable;
                }
                for (i, &v) in tree.v.iter().enumerate() {
                    *out_levels.add(i) = v;
                }
                ToralStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}
