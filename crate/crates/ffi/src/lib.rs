//! C ABI over `toric-ech`.
//!
//! Domains are opaque `EchDomain` handles built from the JSON domain format.
//! Every fallible call returns an `EchStatus`; on anything but `ECH_STATUS_OK`
//! the message is available from `ech_last_error` on the same thread.
//! Strings handed out by the library are owned by the caller and released
//! with `ech_string_free`. Rationals are exchanged as "p/q" strings.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toric_ech::capacity::CapacityConfig;
use toric_ech::distance::{distance_report, k_schedule};
use toric_ech::domain::{Domain, DomainSpec};
use toric_ech::weights::WeightConfig;
use toric_ech::{inclusion_scale, EchError, Scalar, ScaleFactor};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidDomain = 4,
    ResourceLimit = 5,
    NotRepresentable = 6,
    Io = 7,
    Panic = 8,
}

impl From<&EchError> for EchStatus {
    fn from(e: &EchError) -> Self {
        match e {
            EchError::Parse(..) | EchError::Negative(_) | EchError::ZeroIndex | EchError::DimensionMismatch(..) => {
                EchStatus::Parse
            }
            EchError::InvalidDomain(_) | EchError::OutsideCone { .. } => EchStatus::InvalidDomain,
            EchError::NonTermination { .. }
            | EchError::RealizationTooLarge { .. }
            | EchError::Resource(_)
            | EchError::Overflow(_) => EchStatus::ResourceLimit,
            EchError::NotRepresentable { .. } => EchStatus::NotRepresentable,
            EchError::Io { .. } => EchStatus::Io,
        }
    }
}

/// Opaque domain handle.
pub struct EchDomain {
    inner: Domain,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(EchStatus, String);

impl From<EchError> for Failure {
    fn from(e: EchError) -> Self {
        Failure(EchStatus::from(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EchStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EchStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            EchStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(EchStatus::NullPointer, format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|e| Failure(EchStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn domain<'a>(p: *const EchDomain, what: &str) -> Result<&'a Domain, Failure> {
    p.as_ref().map(|d| &d.inner).ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn owned(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Parse a JSON domain description into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_from_json(json: *const c_char, out: *mut *mut EchDomain) -> EchStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let spec = DomainSpec::from_json(text(json, "json")?)?;
        let inner = Domain::from_spec(&spec, &WeightConfig::default())?;
        put(out, Box::into_raw(Box::new(EchDomain { inner })), "out")
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `d` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_free(d: *mut EchDomain) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Multiply a domain by `factor` (a positive rational string) into a new handle.
///
/// # Safety
/// `d` must be a live handle, `factor` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_scale(
    d: *const EchDomain,
    factor: *const c_char,
    out: *mut *mut EchDomain,
) -> EchStatus {
    guard(|| {
        let t = ScaleFactor::new(text(factor, "factor")?.parse::<Scalar>()?)?;
        let inner = domain(d, "domain")?.scale(&t);
        put(out, Box::into_raw(Box::new(EchDomain { inner })), "out")
    })
}

/// Moment-plane area as "p/q".
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_area(d: *const EchDomain, out: *mut *mut c_char) -> EchStatus {
    guard(|| put(out, owned(domain(d, "domain")?.area().to_string()), "out"))
}

/// Weight multiset as JSON: an array of ["weight", "multiplicity"] pairs.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_weights_json(d: *const EchDomain, out: *mut *mut c_char) -> EchStatus {
    guard(|| {
        let w = domain(d, "domain")?.weights();
        let json = serde_json::to_string(&w).map_err(|e| Failure(EchStatus::Parse, e.to_string()))?;
        put(out, owned(json), "out")
    })
}

/// The k-th capacity. `lower` and `upper` receive "p/q" strings and `exact`
/// is set when they agree. Any of the three outputs may be null.
///
/// # Safety
/// `d` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ech_domain_capacity(
    d: *const EchDomain,
    k: u64,
    lower: *mut *mut c_char,
    upper: *mut *mut c_char,
    exact: *mut bool,
) -> EchStatus {
    guard(|| {
        let r = domain(d, "domain")?.capacity(k, &CapacityConfig::default())?;
        if !lower.is_null() {
            lower.write(owned(r.best.to_string()));
        }
        if !upper.is_null() {
            upper.write(owned(r.upper.to_string()));
        }
        if !exact.is_null() {
            exact.write(r.exact);
        }
        Ok(())
    })
}

/// Smallest t with u inside t·v, compared through moment profiles, as "p/q".
///
/// # Safety
/// `u`, `v` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ech_inclusion_scale(
    u: *const EchDomain,
    v: *const EchDomain,
    out: *mut *mut c_char,
) -> EchStatus {
    guard(|| {
        let cfg = WeightConfig::default();
        let (pu, pv) = (domain(u, "u")?.profile(&cfg)?, domain(v, "v")?.profile(&cfg)?);
        put(out, owned(inclusion_scale(&pu, &pv)?.to_string()), "out")
    })
}

/// Lower and upper bounds on the log distance of two domains, using capacity
/// indices up to `kmax`. `upper` is set to a negative value when no upper
/// bound is available.
///
/// # Safety
/// `u`, `v` must be live handles and `lower`, `upper` writable.
#[no_mangle]
pub unsafe extern "C" fn ech_distance_bounds(
    u: *const EchDomain,
    v: *const EchDomain,
    kmax: u64,
    lower: *mut f64,
    upper: *mut f64,
) -> EchStatus {
    guard(|| {
        let (du, dv) = (domain(u, "u")?, domain(v, "v")?);
        if lower.is_null() || upper.is_null() {
            return Err(null("output"));
        }
        let ks = k_schedule(kmax, 64);
        let r = distance_report(du, dv, &ks, None, &CapacityConfig::default(), &WeightConfig::default())?;
        lower.write(r.lower);
        upper.write(r.upper.unwrap_or(-1.0));
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn ech_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ech_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn ech_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
