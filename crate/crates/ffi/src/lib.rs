//! C ABI over `kawahara-core`.
//!
//! Every fallible function returns a [`KwStatus`]; on failure a message is
//! kept per thread and can be read with [`kw_last_error_message`]. Handles
//! returned through out-pointers are owned by the caller and released with
//! the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kawahara_core::control::{synthesize_control, ControlProblem, ControlSolution, ControlledTrajectory, SourceParams};
use kawahara_core::observability::observability_constant;
use kawahara_core::rng::{from_seed, random_state};
use kawahara_core::spectral::{eigenvalue, evolve, synthesize, SpectralField};
use kawahara_core::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KwStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Dimension = 3,
    Precondition = 4,
    NonObservable = 5,
    Numerical = 6,
    Panic = 7,
    Other = 8,
}

impl From<&Error> for KwStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Domain(_) | Error::SingularPoint { .. } | Error::Config(_) => KwStatus::Domain,
            Error::Dimension { .. } | Error::Aliasing { .. } => KwStatus::Dimension,
            Error::Precondition(_) | Error::EmptyFamily | Error::DegenerateMember { .. } => KwStatus::Precondition,
            Error::NonObservable { .. } => KwStatus::NonObservable,
            Error::TimeResolution(_) | Error::LinearAlgebra(_) => KwStatus::Numerical,
            Error::Io(_) => KwStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard<F: FnOnce() -> Result<(), (KwStatus, String)>>(f: F) -> KwStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KwStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            KwStatus::Panic
        }
    }
}

fn core<T>(r: kawahara_core::Result<T>) -> Result<T, (KwStatus, String)> {
    r.map_err(|e| (KwStatus::from(&e), e.to_string()))
}

fn null(what: &str) -> (KwStatus, String) {
    (KwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (KwStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write<T>(out: *mut T, v: T, what: &str) -> Result<(), (KwStatus, String)> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(v);
    Ok(())
}

/// A truncated periodic field: Fourier coefficients for modes `-N..=N`.
pub struct KwField(SpectralField);

/// A synthesized control: blended trajectory and its interior source.
pub struct KwControl {
    solution: ControlSolution,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KwObservability {
    pub eig_min: f64,
    pub c_obs: f64,
    pub c_full: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KwControlSummary {
    pub residual_0: f64,
    pub residual_t: f64,
    pub support_lo: f64,
    pub support_hi: f64,
    pub c_num: f64,
    pub control_norm: f64,
    pub accepted: bool,
}

/// Length in bytes (without the terminating nul) of the last error message
/// on this thread, or 0 when the last call succeeded.
#[no_mangle]
pub extern "C" fn kw_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(0, |c| c.as_bytes().len()))
}

/// Copies the last error message, nul-terminated and truncated to `len`
/// bytes. Returns the number of bytes written excluding the nul.
///
/// # Safety
/// `buf` must be valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn kw_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_ref().map_or(&[][..], |c| c.as_bytes());
        let n = bytes.len().min(len - 1);
        ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Static nul-terminated version string.
#[no_mangle]
pub extern "C" fn kw_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// `λ_n = k⁵ + k³ − k` with `k = nπ/L`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kw_eigenvalue(n: i64, half_length: f64, out: *mut f64) -> KwStatus {
    guard(|| write(out, core(eigenvalue(n, half_length))?, "out"))
}

/// Builds a field from `2N+1` real and imaginary parts, ordered `-N..=N`.
///
/// # Safety
/// `re` and `im` must be valid for `2 * order + 1` reads; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kw_field_new(
    half_length: f64,
    order: usize,
    re: *const f64,
    im: *const f64,
    out: *mut *mut KwField,
) -> KwStatus {
    guard(|| {
        if re.is_null() || im.is_null() {
            return Err(null("coefficient array"));
        }
        let m = 2 * order + 1;
        let re = std::slice::from_raw_parts(re, m);
        let im = std::slice::from_raw_parts(im, m);
        let coeffs = re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let f = core(SpectralField::new(half_length, order, coeffs))?;
        write(out, Box::into_raw(Box::new(KwField(f))), "out")
    })
}

/// A unit-norm random field drawn from `seed`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kw_field_random(seed: u64, half_length: f64, order: usize, out: *mut *mut KwField) -> KwStatus {
    guard(|| {
        let f = core(random_state(&mut from_seed(seed), half_length, order))?;
        write(out, Box::into_raw(Box::new(KwField(f))), "out")
    })
}

/// # Safety
/// `field` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kw_field_free(field: *mut KwField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Truncation order `N`, or 0 for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kw_field_order(field: *const KwField) -> usize {
    field.as_ref().map_or(0, |f| f.0.order())
}

/// `L²(-L, L)` norm, or NaN for a null handle.
///
/// # Safety
/// `field` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kw_field_norm(field: *const KwField) -> f64 {
    field.as_ref().map_or(f64::NAN, |f| f.0.norm())
}

/// Copies the `2N+1` coefficients into `re` and `im`.
///
/// # Safety
/// `re` and `im` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn kw_field_coeffs(field: *const KwField, re: *mut f64, im: *mut f64, len: usize) -> KwStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if re.is_null() || im.is_null() {
            return Err(null("output array"));
        }
        let c = f.0.coeffs();
        if len != c.len() {
            return core(Err(Error::Dimension { expected: c.len(), got: len }));
        }
        for (k, z) in c.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Point values at `n` abscissae.
///
/// # Safety
/// `xs` must be valid for `n` reads, `re` and `im` for `n` writes.
#[no_mangle]
pub unsafe extern "C" fn kw_field_sample(
    field: *const KwField,
    xs: *const f64,
    n: usize,
    re: *mut f64,
    im: *mut f64,
) -> KwStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if xs.is_null() || re.is_null() || im.is_null() {
            return Err(null("array"));
        }
        let vals = synthesize(&f.0, std::slice::from_raw_parts(xs, n));
        for (k, z) in vals.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// `S(t)u` as a new handle.
///
/// # Safety
/// `field` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kw_evolve(field: *const KwField, t: f64, out: *mut *mut KwField) -> KwStatus {
    guard(|| {
        let f = deref(field, "field")?;
        if !t.is_finite() {
            return core(Err(Error::Domain(format!("time must be finite, got {t}"))));
        }
        write(out, Box::into_raw(Box::new(KwField(evolve(&f.0, t)))), "out")
    })
}

/// Sharp observability constants on `(0, T) × (-l, l)`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn kw_observability_constant(
    order: usize,
    half_length: f64,
    l: f64,
    horizon: f64,
    out: *mut KwObservability,
) -> KwStatus {
    guard(|| {
        let r = core(observability_constant(order, half_length, l, horizon))?;
        write(
            out,
            KwObservability {
                eig_min: r.eig_min,
                c_obs: r.c_obs,
                c_full: r.c_full,
            },
            "out",
        )
    })
}

/// Steers `u0` to `ut` on `[0, T]` with a source supported in `(ε, T − ε)`.
///
/// # Safety
/// `u0` and `ut` must be live handles and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kw_control_synthesize(
    u0: *const KwField,
    ut: *const KwField,
    horizon: f64,
    eps: f64,
    out: *mut *mut KwControl,
) -> KwStatus {
    guard(|| {
        let a = deref(u0, "u0")?.0.clone();
        let b = deref(ut, "ut")?.0.clone();
        let prob = core(ControlProblem::new(a, b, horizon, eps, None))?;
        let solution = core(synthesize_control(&prob, &SourceParams::default()))?;
        write(out, Box::into_raw(Box::new(KwControl { solution })), "out")
    })
}

/// # Safety
/// `control` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn kw_control_free(control: *mut KwControl) {
    if !control.is_null() {
        drop(Box::from_raw(control));
    }
}

/// # Safety
/// `control` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kw_control_summary(control: *const KwControl, out: *mut KwControlSummary) -> KwStatus {
    guard(|| {
        let s = &deref(control, "control")?.solution;
        write(
            out,
            KwControlSummary {
                residual_0: s.residual_0,
                residual_t: s.residual_t,
                support_lo: s.source_support.0,
                support_hi: s.source_support.1,
                c_num: s.c_num,
                control_norm: s.control_norm,
                accepted: s.accepted,
            },
            "out",
        )
    })
}

/// Controlled state `u(t)`.
///
/// # Safety
/// `control` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kw_control_state(control: *const KwControl, t: f64, out: *mut *mut KwField) -> KwStatus {
    guard(|| {
        let s = &deref(control, "control")?.solution;
        write(out, Box::into_raw(Box::new(KwField(s.state(t)))), "out")
    })
}

/// Interior source `w(t)` with `Pu = w`.
///
/// # Safety
/// `control` must be a live handle and `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kw_control_source(control: *const KwControl, t: f64, out: *mut *mut KwField) -> KwStatus {
    guard(|| {
        let s = &deref(control, "control")?.solution;
        write(out, Box::into_raw(Box::new(KwField(s.source(t)))), "out")
    })
}
