//! C ABI over `maass_universality`.
//!
//! Every fallible function returns a [`MuStatus`] and writes its result through an out
//! pointer. On failure the message is available from [`mu_last_error`] on the same thread.
//! Handles are opaque and must be released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use maass_universality::hecke::{MaassFormData, Parity, Source};
use maass_universality::io::load_dataset;
use maass_universality::lfunc::{evaluate_l, partial_euler_inverse, AfeParams};
use maass_universality::sarnak::{self, SarnakMeasure};
use maass_universality::special::log_gamma;
use maass_universality::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Validation = 3,
    Numerical = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuComplex {
    pub re: f64,
    pub im: f64,
}

impl From<MuComplex> for Complex64 {
    fn from(z: MuComplex) -> Self {
        Complex64::new(z.re, z.im)
    }
}

impl From<Complex64> for MuComplex {
    fn from(z: Complex64) -> Self {
        MuComplex { re: z.re, im: z.im }
    }
}

/// One validated form.
pub struct MuForm(MaassFormData);

/// Forms loaded from a dataset file.
pub struct MuDataset(Vec<MaassFormData>);

/// Tabulated mu_p with CDF and quantile.
pub struct MuMeasure(SarnakMeasure);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MuStatus {
    match e {
        Error::InvalidArgument(_)
        | Error::HalfPlane { .. }
        | Error::ContourPole { .. }
        | Error::MissingCoordinate { .. }
        | Error::CoefficientCap { .. } => MuStatus::InvalidArgument,
        Error::Validation { .. } | Error::BoundViolation { .. } | Error::Parse { .. } | Error::SchemaDrift(_) => {
            MuStatus::Validation
        }
        Error::Io(_) | Error::Json(_) | Error::Network(_) => MuStatus::Io,
        _ => MuStatus::Numerical,
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> MuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MuStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            MuStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            MuStatus::Panic
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn c_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::invalid(format!("{what} is not valid UTF-8"))))
}

/// Message of the most recent failed call on this thread, or NULL if none failed yet.
/// Valid until the next failure on this thread.
#[no_mangle]
pub extern "C" fn mu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Principal branch of log Gamma(z).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_log_gamma(z: MuComplex, out: *mut MuComplex) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = log_gamma(z.into())?.into();
        Ok(())
    })
}

/// Density of mu_p at x.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_sarnak_density(p: u64, x: f64, out: *mut f64) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        if p < 2 {
            return Err(Error::invalid(format!("mu_p needs a prime, got {p}")).into());
        }
        *out = sarnak::density(p, x);
        Ok(())
    })
}

/// mu_p([a, b]) by adaptive quadrature.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_interval_mass(p: u64, a: f64, b: f64, out: *mut f64) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = sarnak::interval_mass(p, a, b)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be valid for writes. The handle is released with [`mu_measure_free`].
#[no_mangle]
pub unsafe extern "C" fn mu_measure_new(p: u64, out: *mut *mut MuMeasure) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = Box::into_raw(Box::new(MuMeasure(SarnakMeasure::new(p)?)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`mu_measure_new`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mu_measure_free(m: *mut MuMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_measure_cdf(m: *const MuMeasure, x: f64, out: *mut f64) -> MuStatus {
    guard(|| {
        let m = in_ref(m, "measure")?;
        *out_ref(out, "out")? = m.0.cdf(x);
        Ok(())
    })
}

/// # Safety
/// `m` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_measure_quantile(m: *const MuMeasure, u: f64, out: *mut f64) -> MuStatus {
    guard(|| {
        let m = in_ref(m, "measure")?;
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::invalid(format!("quantile level {u} is outside [0, 1]")).into());
        }
        *out_ref(out, "out")? = m.0.quantile(u);
        Ok(())
    })
}

/// Build a form from parallel arrays of primes and lambda(p).
///
/// # Safety
/// `label` must be a NUL-terminated string, `primes` and `eigs` must point to `len` elements
/// (they may be NULL when `len` is 0) and `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_form_new(
    label: *const c_char,
    r: f64,
    parity: u8,
    primes: *const u64,
    eigs: *const f64,
    len: usize,
    out: *mut *mut MuForm,
) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let label = c_str(label, "label")?;
        if len > 0 && (primes.is_null() || eigs.is_null()) {
            return Err(Failure::Null("primes/eigs"));
        }
        let pairs = if len == 0 {
            Vec::new()
        } else {
            let ps = std::slice::from_raw_parts(primes, len);
            let es = std::slice::from_raw_parts(eigs, len);
            ps.iter().copied().zip(es.iter().copied()).collect()
        };
        let parity = Parity::from_epsilon(parity)?;
        let form = MaassFormData::new(label, r, parity, pairs, Source::Synthetic)?;
        *out = Box::into_raw(Box::new(MuForm(form)));
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mu_form_free(f: *mut MuForm) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Spectral parameter r, or NaN for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mu_form_r(f: *const MuForm) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| f.0.r)
}

/// Parity epsilon in {0, 1}, or 255 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mu_form_parity(f: *const MuForm) -> u8 {
    f.as_ref().map_or(u8::MAX, |f| f.0.parity.epsilon())
}

/// Largest prime with a stored eigenvalue, or 0 for NULL.
///
/// # Safety
/// `f` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mu_form_p_cap(f: *const MuForm) -> u64 {
    f.as_ref().map_or(0, |f| f.0.p_cap())
}

/// Load and validate a JSON-lines dataset.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_dataset_load(path: *const c_char, out: *mut *mut MuDataset) -> MuStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let path = c_str(path, "path")?;
        *out = Box::into_raw(Box::new(MuDataset(load_dataset(Path::new(path))?)));
        Ok(())
    })
}

/// Number of forms, or 0 for NULL.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mu_dataset_len(d: *const MuDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.len())
}

/// Copy of form `index` as an independent handle.
///
/// # Safety
/// `d` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_dataset_form(d: *const MuDataset, index: usize, out: *mut *mut MuForm) -> MuStatus {
    guard(|| {
        let d = in_ref(d, "dataset")?;
        let out = out_ref(out, "out")?;
        let form = d
            .0
            .get(index)
            .ok_or_else(|| Error::invalid(format!("index {index} out of range for {} forms", d.0.len())))?;
        *out = Box::into_raw(Box::new(MuForm(form.clone())));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`mu_dataset_load`] and not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn mu_dataset_free(d: *mut MuDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// L(s) by the approximate functional equation with main-sum length `n_cutoff`.
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_evaluate_l(f: *const MuForm, s: MuComplex, n_cutoff: u64, out: *mut MuComplex) -> MuStatus {
    guard(|| {
        let f = in_ref(f, "form")?;
        let out = out_ref(out, "out")?;
        *out = evaluate_l(&f.0, s.into(), &AfeParams::new(n_cutoff))?.into();
        Ok(())
    })
}

/// prod_{p <= x} (1 - lambda(p) p^{-s} + p^{-2s}).
///
/// # Safety
/// `f` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mu_partial_euler_inverse(f: *const MuForm, x: u64, s: MuComplex, out: *mut MuComplex) -> MuStatus {
    guard(|| {
        let f = in_ref(f, "form")?;
        let out = out_ref(out, "out")?;
        *out = partial_euler_inverse(&f.0, x, s.into())?.into();
        Ok(())
    })
}
