//! C interface to `locinfo`.
//!
//! States are opaque handles created by `locinfo_state_from_*` and released
//! with `locinfo_state_free`. Every fallible call returns a [`LocinfoStatus`];
//! on failure `locinfo_last_error` describes the cause for the calling thread.
//! Strings returned through `out` parameters are owned by the caller and
//! released with `locinfo_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use locinfo::bounds::{self, BoundsConfig};
use locinfo::distillsim::{typical_fidelity, Spectrum};
use locinfo::measures;
use locinfo::states::{catalog, DensityOperator, Params, StateSpec};
use locinfo::Error;

/// Result codes; the nonzero values follow the command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LocinfoStatus {
    Ok = 0,
    /// Null pointer or invalid UTF-8 argument.
    InvalidArgument = 1,
    Validation = 2,
    Parse = 3,
    CapExceeded = 4,
    /// A Rust panic was caught at the boundary.
    Internal = 5,
}

/// Validated density operator with its party split.
pub struct LocinfoState {
    rho: DensityOperator,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> LocinfoStatus {
    match e {
        Error::Io(_) | Error::Parse(_) => LocinfoStatus::Parse,
        Error::CapExceeded { .. } => LocinfoStatus::CapExceeded,
        _ => LocinfoStatus::Validation,
    }
}

enum Failure {
    Arg(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> LocinfoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LocinfoStatus::Ok
        }
        Ok(Err(Failure::Arg(msg))) => {
            set_error(&msg);
            LocinfoStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            set_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            LocinfoStatus::Internal
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Arg(format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Arg(format!("{what} is not UTF-8")))
}

unsafe fn state<'a>(p: *const LocinfoState) -> Result<&'a LocinfoState, Failure> {
    p.as_ref().ok_or_else(|| Failure::Arg("state is null".into()))
}

fn out_ptr<T>(p: *mut T) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::Arg("output pointer is null".into()))
    } else {
        Ok(())
    }
}

fn boxed(rho: DensityOperator) -> *mut LocinfoState {
    Box::into_raw(Box::new(LocinfoState { rho }))
}

/// Builds a catalog state. `params_json` is a JSON object such as
/// `{"p": 0.5}` and may be null.
///
/// # Safety
/// `name` and `params_json` must be null or NUL-terminated strings; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_from_catalog(
    name: *const c_char,
    params_json: *const c_char,
    out: *mut *mut LocinfoState,
) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        let name = text(name, "name")?;
        let params: Params = if params_json.is_null() {
            Params::new()
        } else {
            serde_json::from_str(text(params_json, "params_json")?)?
        };
        *out = boxed(catalog(name, &params)?);
        Ok(())
    })
}

/// Builds a state from the JSON state-file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_from_json(json: *const c_char, out: *mut *mut LocinfoState) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        let spec: StateSpec = serde_json::from_str(text(json, "json")?)?;
        *out = boxed(spec.resolve()?);
        Ok(())
    })
}

/// # Safety
/// `state` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_free(state: *mut LocinfoState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Total Hilbert-space dimension.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_dim(state: *const LocinfoState, out: *mut usize) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        *out = self::state(state)?.rho.dim();
        Ok(())
    })
}

/// von Neumann entropy in bits.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_entropy(state: *const LocinfoState, out: *mut f64) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        *out = measures::von_neumann_entropy(&self::state(state)?.rho);
        Ok(())
    })
}

/// Information content `N - S` in bits.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_state_information(state: *const LocinfoState, out: *mut f64) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        *out = measures::information(&self::state(state)?.rho);
        Ok(())
    })
}

/// Min-entropy upper bound on the localizable information.
///
/// # Safety
/// `state` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_upper_bound(state: *const LocinfoState, out: *mut f64) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        *out = bounds::upper_bound_prop1(&self::state(state)?.rho)?.il_upper;
        Ok(())
    })
}

/// Full bounds report as JSON. `config_json` uses the `bounds` part of the
/// config-file format (`{"optimizer": {...}, "max_copies": k}`) and may be
/// null for defaults.
///
/// # Safety
/// `state` must be a live handle, `config_json` null or a NUL-terminated
/// string, and `out` writable. Free the result with `locinfo_string_free`.
#[no_mangle]
pub unsafe extern "C" fn locinfo_bounds_json(
    state: *const LocinfoState,
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        let rho = &self::state(state)?.rho;
        let config: BoundsConfig = if config_json.is_null() {
            BoundsConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config_json")?)?
        };
        let report = bounds::deficit_interval(rho, &config)?;
        let json = serde_json::to_string(&report)?;
        *out = CString::new(json).map_err(|e| Failure::Arg(e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn locinfo_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Fidelity of keeping the `floor(2^noise_bits)` most likely eigenvalue
/// strings of `n` copies of a state with the given spectrum.
///
/// # Safety
/// `spectrum` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn locinfo_typical_fidelity(
    spectrum: *const f64,
    len: usize,
    n: usize,
    noise_bits: f64,
    out: *mut f64,
) -> LocinfoStatus {
    guard(|| {
        out_ptr(out)?;
        if spectrum.is_null() {
            return Err(Failure::Arg("spectrum is null".into()));
        }
        let probs = std::slice::from_raw_parts(spectrum, len).to_vec();
        *out = typical_fidelity(&Spectrum::new(probs)?, n, noise_bits)?;
        Ok(())
    })
}

/// Message for the last failed call on this thread, empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn locinfo_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn locinfo_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
