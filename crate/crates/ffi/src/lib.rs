//! C ABI over `erasure-core`.
//!
//! States and free-state families cross the boundary as opaque handles owned by
//! the caller and released with the matching `*_free`. Every fallible call
//! returns an [`ErasureStatus`]; on failure the message is kept per thread and
//! read back with [`erasure_last_error`]. Strings returned by the library are
//! released with [`erasure_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use erasure_core::entropies::{self, EntropyEstimate};
use erasure_core::free_sets::FreeSet;
use erasure_core::harness::{build_free_set, FreeSetConfig};
use erasure_core::qstate::{self, DensityMatrix};
use erasure_core::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErasureStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Layout = 4,
    InvalidState = 5,
    Domain = 6,
    Support = 7,
    Unsupported = 8,
    NonConvergence = 9,
    Numerical = 10,
    Config = 11,
    Io = 12,
    Panic = 13,
    Other = 14,
}

/// Opaque density matrix on labeled registers.
pub struct ErasureState(DensityMatrix);

/// Opaque free-state family.
pub struct ErasureFreeSet(FreeSet);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ErasureStatus {
    match e {
        Error::Parse { .. } => ErasureStatus::Parse,
        Error::Layout(_)
        | Error::LabelCollision(_)
        | Error::UnknownLabel(_)
        | Error::LayoutMismatch { .. }
        | Error::DimensionMismatch { .. }
        | Error::DimensionOverflow { .. } => ErasureStatus::Layout,
        Error::InvalidState(_) | Error::NotClassical { .. } => ErasureStatus::InvalidState,
        Error::Domain(_) => ErasureStatus::Domain,
        Error::SupportViolation(_) => ErasureStatus::Support,
        Error::Unsupported(_) => ErasureStatus::Unsupported,
        Error::NonConvergence { .. } => ErasureStatus::NonConvergence,
        Error::Numerical(_) => ErasureStatus::Numerical,
        Error::Config(_) | Error::InvalidConfig(_) => ErasureStatus::Config,
        Error::Io(_) => ErasureStatus::Io,
        _ => ErasureStatus::Other,
    }
}

struct Fail(ErasureStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ErasureStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ErasureStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            ErasureStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(ErasureStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(ErasureStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ErasureStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(ErasureStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

fn write_estimate(est: &EntropyEstimate, value: &mut c_double, lower: *mut c_double) {
    *value = est.value;
    if let Some(l) = unsafe { lower.as_mut() } {
        *l = est.lower_bound.unwrap_or(est.value);
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn erasure_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn erasure_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by the library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been released.
#[no_mangle]
pub unsafe extern "C" fn erasure_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a state from its text form (`layout` header line, then matrix rows).
///
/// # Safety
/// `src` must be a NUL-terminated string and `out_state` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_parse(src: *const c_char, out_state: *mut *mut ErasureState) -> ErasureStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let rho = DensityMatrix::from_text(text(src, "text")?)?;
        *slot = boxed(ErasureState(rho));
        Ok(())
    })
}

/// Releases a state. NULL is ignored.
///
/// # Safety
/// `state` must come from this library and not have been released.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_free(state: *mut ErasureState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Text form of a state; release with [`erasure_string_free`].
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_to_text(
    state: *const ErasureState,
    out_text: *mut *mut c_char,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        let s = deref(state, "state")?;
        *slot = CString::new(s.0.to_text()).map_err(|e| Fail(ErasureStatus::Other, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// Total dimension of a state.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_dim(state: *const ErasureState, out_dim: *mut usize) -> ErasureStatus {
    guard(|| {
        *out(out_dim, "out_dim")? = deref(state, "state")?.0.dim();
        Ok(())
    })
}

/// Tensor product; the two layouts must have disjoint labels.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_tensor(
    a: *const ErasureState,
    b: *const ErasureState,
    out_state: *mut *mut ErasureState,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let t = deref(a, "a")?.0.tensor(&deref(b, "b")?.0)?;
        *slot = boxed(ErasureState(t));
        Ok(())
    })
}

/// Traces out the registers named in `labels`, a comma-separated list.
///
/// # Safety
/// Pointers must be valid and `labels` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn erasure_state_partial_trace(
    state: *const ErasureState,
    labels: *const c_char,
    out_state: *mut *mut ErasureState,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_state, "out_state")?;
        let drop: Vec<&str> = text(labels, "labels")?.split(',').map(str::trim).filter(|l| !l.is_empty()).collect();
        let r = deref(state, "state")?.0.partial_trace(&drop)?;
        *slot = boxed(ErasureState(r));
        Ok(())
    })
}

type Pairwise = fn(&DensityMatrix, &DensityMatrix) -> erasure_core::Result<f64>;

unsafe fn pairwise(a: *const ErasureState, b: *const ErasureState, value: *mut c_double, f: Pairwise) -> ErasureStatus {
    guard(|| {
        let slot = out(value, "out_value")?;
        *slot = f(&deref(a, "a")?.0, &deref(b, "b")?.0)?;
        Ok(())
    })
}

/// Root fidelity `‖√a √b‖₁`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_fidelity(
    a: *const ErasureState,
    b: *const ErasureState,
    out_value: *mut c_double,
) -> ErasureStatus {
    pairwise(a, b, out_value, qstate::fidelity)
}

/// Purified distance `√(1 − F²)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_purified_distance(
    a: *const ErasureState,
    b: *const ErasureState,
    out_value: *mut c_double,
) -> ErasureStatus {
    pairwise(a, b, out_value, qstate::purified_distance)
}

/// Trace norm `‖a − b‖₁`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_trace_distance(
    a: *const ErasureState,
    b: *const ErasureState,
    out_value: *mut c_double,
) -> ErasureStatus {
    pairwise(a, b, out_value, qstate::trace_distance)
}

/// Relative entropy in bits; `+inf` when the support condition fails.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_relative_entropy(
    rho: *const ErasureState,
    sigma: *const ErasureState,
    out_value: *mut c_double,
) -> ErasureStatus {
    pairwise(rho, sigma, out_value, |r, s| entropies::relative_entropy(r, s).map(|e| e.value))
}

/// Max-relative entropy in bits.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_dmax(
    rho: *const ErasureState,
    sigma: *const ErasureState,
    out_value: *mut c_double,
) -> ErasureStatus {
    pairwise(rho, sigma, out_value, |r, s| entropies::dmax(r, s).map(|e| e.value))
}

/// Smooth max-relative entropy over the purified-distance ball of radius `eps`.
/// `out_lower` may be NULL; otherwise it receives the certified lower end.
///
/// # Safety
/// `rho`, `sigma` and `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_smooth_dmax(
    rho: *const ErasureState,
    sigma: *const ErasureState,
    eps: c_double,
    out_value: *mut c_double,
    out_lower: *mut c_double,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let est = entropies::smooth_dmax(&deref(rho, "rho")?.0, &deref(sigma, "sigma")?.0, eps)?;
        write_estimate(&est, slot, out_lower);
        Ok(())
    })
}

/// Builds a free-state family from the TOML body of a `[free_set]` table,
/// e.g. `family = "coherence"`. Relative file paths resolve against the
/// working directory.
///
/// # Safety
/// `toml_text` must be NUL-terminated and `out_set` valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_free_set_from_toml(
    toml_text: *const c_char,
    out_set: *mut *mut ErasureFreeSet,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_set, "out_set")?;
        let cfg: FreeSetConfig =
            toml::from_str(text(toml_text, "toml_text")?).map_err(|e| Fail(ErasureStatus::Config, e.to_string()))?;
        *slot = boxed(ErasureFreeSet(build_free_set(&cfg, Path::new("."))?));
        Ok(())
    })
}

/// Releases a free-state family. NULL is ignored.
///
/// # Safety
/// `set` must come from this library and not have been released.
#[no_mangle]
pub unsafe extern "C" fn erasure_free_set_free(set: *mut ErasureFreeSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Writes 1 to `out_member` when `state` lies in the family, else 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_free_set_contains(
    set: *const ErasureFreeSet,
    state: *const ErasureState,
    out_member: *mut c_int,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_member, "out_member")?;
        *slot = c_int::from(deref(set, "set")?.0.membership(&deref(state, "state")?.0)?);
        Ok(())
    })
}

/// Relative entropy to the closest free state, in bits. `out_lower` may be NULL.
///
/// # Safety
/// `set`, `state` and `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_free_set_relent(
    set: *const ErasureFreeSet,
    state: *const ErasureState,
    out_value: *mut c_double,
    out_lower: *mut c_double,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let (_, est) = deref(set, "set")?.0.closest_free_relent(&deref(state, "state")?.0)?;
        write_estimate(&est, slot, out_lower);
        Ok(())
    })
}

/// Smooth max-relative entropy to the family, minimized over free states.
/// `out_lower` may be NULL.
///
/// # Safety
/// `set`, `state` and `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn erasure_free_set_smooth_dmax(
    set: *const ErasureFreeSet,
    state: *const ErasureState,
    eps: c_double,
    out_value: *mut c_double,
    out_lower: *mut c_double,
) -> ErasureStatus {
    guard(|| {
        let slot = out(out_value, "out_value")?;
        let (_, est) = deref(set, "set")?.0.closest_free_smooth_dmax(&deref(state, "state")?.0, eps)?;
        write_estimate(&est, slot, out_lower);
        Ok(())
    })
}
