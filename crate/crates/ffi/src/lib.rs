//! C ABI for the first-passage-time engine.
//!
//! Boundaries and density curves are exposed as opaque handles created and
//! released through paired `*_new`/`*_free` calls; every fallible entry point
//! returns an [`FptStatus`] code and writes its results through out-pointers.
//! The generated header lives at `include/fpt.h`.

use fpt_core::boundary::Boundary;
use fpt_core::bounds;
use fpt_core::bridge::Scheme;
use fpt_core::curve::DensityCurve;
use fpt_core::error::Error;
use fpt_core::montecarlo;
use fpt_core::pde;
use libc::{c_char, size_t};
use std::ffi::CStr;

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FptStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    NonConvexBoundary = 3,
    OutOfRange = 4,
    NumericalFailure = 5,
    Utf8Error = 6,
}

fn status_of(e: &Error) -> FptStatus {
    match e {
        Error::NonPositiveGap(_) | Error::NonConvexBoundary { .. } => FptStatus::NonConvexBoundary,
        Error::InvalidBoundarySpec(_) | Error::InvalidArgument(_) | Error::DomainError(_) => {
            FptStatus::InvalidArgument
        }
        Error::OutOfTabulatedRange(..) => FptStatus::OutOfRange,
        _ => FptStatus::NumericalFailure,
    }
}

/// Opaque validated moving boundary.
pub struct FptBoundary(Boundary);

/// Opaque density curve on a time grid.
pub struct FptCurve(DensityCurve);

/// Stable name for a status code (static storage, do not free).
#[no_mangle]
pub extern "C" fn fpt_status_name(status: FptStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        FptStatus::Ok => b"ok\0",
        FptStatus::NullArgument => b"null_argument\0",
        FptStatus::InvalidArgument => b"invalid_argument\0",
        FptStatus::NonConvexBoundary => b"non_convex_boundary\0",
        FptStatus::OutOfRange => b"out_of_range\0",
        FptStatus::NumericalFailure => b"numerical_failure\0",
        FptStatus::Utf8Error => b"utf8_error\0",
    };
    s.as_ptr() as *const c_char
}

/// Parse a boundary from its JSON wire form, validating convexity on
/// `[0, t_max]`. On success writes a heap handle to `out`.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fpt_boundary_from_json(
    json: *const c_char,
    t_max: f64,
    out: *mut *mut FptBoundary,
) -> FptStatus {
    if json.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t,
        Err(_) => return FptStatus::Utf8Error,
    };
    match Boundary::from_json(text, t_max) {
        Ok(b) => {
            *out = Box::into_raw(Box::new(FptBoundary(b)));
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Release a boundary handle. NULL is ignored.
///
/// # Safety
/// `b` must have come from `fpt_boundary_from_json` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fpt_boundary_free(b: *mut FptBoundary) {
    if !b.is_null() {
        drop(Box::from_raw(b));
    }
}

/// Evaluate `f`, `f'` or `f''` (order 0, 1, 2) at `t`.
///
/// # Safety
/// `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_boundary_eval(
    b: *const FptBoundary,
    t: f64,
    order: u32,
    out: *mut f64,
) -> FptStatus {
    if b.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    if order > 2 {
        return FptStatus::InvalidArgument;
    }
    match (*b).0.eval(t, order as u8) {
        Ok(v) => {
            *out = v;
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// `int_0^t (f'(u))^2 du`.
///
/// # Safety
/// `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_boundary_energy(
    b: *const FptBoundary,
    t: f64,
    out: *mut f64,
) -> FptStatus {
    if b.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    match (*b).0.integral_df_sq(t) {
        Ok(v) => {
            *out = v;
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Bridge sampling scheme selector for `fpt_density_girsanov`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FptScheme {
    SdeEuler = 0,
    ThreeBridge = 1,
}

/// First-passage density at `s` via the Bessel-bridge representation.
/// Writes the estimate and its standard error.
///
/// # Safety
/// `b`, `out_phi` and `out_std_error` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_density_girsanov(
    b: *const FptBoundary,
    s: f64,
    n_steps: size_t,
    n_paths: size_t,
    seed: u64,
    scheme: FptScheme,
    out_phi: *mut f64,
    out_std_error: *mut f64,
) -> FptStatus {
    if b.is_null() || out_phi.is_null() || out_std_error.is_null() {
        return FptStatus::NullArgument;
    }
    let scheme = match scheme {
        FptScheme::SdeEuler => Scheme::SdeEuler,
        FptScheme::ThreeBridge => Scheme::ThreeBridge,
    };
    match montecarlo::fpt_density_girsanov(&(*b).0, s, n_steps, n_paths, seed, scheme) {
        Ok(est) => {
            *out_phi = est.mean;
            *out_std_error = est.std_error;
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Closed-form density for linear boundaries (`f'' == 0`).
///
/// # Safety
/// `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_density_closed_form(
    b: *const FptBoundary,
    s: f64,
    out: *mut f64,
) -> FptStatus {
    if b.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    match montecarlo::closed_form_density(&(*b).0, s) {
        Ok(v) => {
            *out = v;
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Density at `s` from the Feynman-Kac finite-difference solve on an
/// `n_t x n_x` grid truncated at `x_max`.
///
/// # Safety
/// `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_density_fk_pde(
    b: *const FptBoundary,
    s: f64,
    n_t: size_t,
    n_x: size_t,
    x_max: f64,
    out: *mut f64,
) -> FptStatus {
    if b.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    let boundary = &(*b).0;
    let field = match pde::solve_fk_cauchy(boundary, s, n_t, n_x, x_max) {
        Ok(f) => f,
        Err(e) => return status_of(&e),
    };
    match pde::density_from_v(&field, boundary, s) {
        Ok(v) => {
            *out = v;
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Full density curve from the killed-heat-equation solve; writes an opaque
/// curve handle to `out`.
///
/// # Safety
/// `b` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn fpt_curve_heat_pde(
    b: *const FptBoundary,
    t_max: f64,
    n_t: size_t,
    n_y: size_t,
    y_max: f64,
    out: *mut *mut FptCurve,
) -> FptStatus {
    if b.is_null() || out.is_null() {
        return FptStatus::NullArgument;
    }
    match pde::solve_killed_heat(&(*b).0, t_max, n_t, n_y, y_max) {
        Ok(curve) => {
            *out = Box::into_raw(Box::new(FptCurve(curve)));
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}

/// Number of points in a curve.
///
/// # Safety
/// `c` must be a valid curve handle.
#[no_mangle]
pub unsafe extern "C" fn fpt_curve_len(c: *const FptCurve) -> size_t {
    if c.is_null() {
        return 0;
    }
    (*c).0.s_grid.len()
}

/// Read point `i` of a curve into `(out_s, out_phi)`.
///
/// # Safety
/// Pointers must be valid; `i` is bounds-checked.
#[no_mangle]
pub unsafe extern "C" fn fpt_curve_point(
    c: *const FptCurve,
    i: size_t,
    out_s: *mut f64,
    out_phi: *mut f64,
) -> FptStatus {
    if c.is_null() || out_s.is_null() || out_phi.is_null() {
        return FptStatus::NullArgument;
    }
    let curve = &(*c).0;
    if i >= curve.s_grid.len() {
        return FptStatus::OutOfRange;
    }
    *out_s = curve.s_grid[i];
    *out_phi = curve.phi[i];
    FptStatus::Ok
}

/// Release a curve handle. NULL is ignored.
///
/// # Safety
/// `c` must have come from `fpt_curve_heat_pde` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fpt_curve_free(c: *mut FptCurve) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Jensen envelope on a caller-supplied strictly increasing grid of `len`
/// times; writes `len` lower and upper bounds into caller-owned arrays.
///
/// # Safety
/// `s_grid`, `lower` and `upper` must point to `len` readable/writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fpt_envelope(
    b: *const FptBoundary,
    s_grid: *const f64,
    len: size_t,
    lower: *mut f64,
    upper: *mut f64,
) -> FptStatus {
    if b.is_null() || s_grid.is_null() || lower.is_null() || upper.is_null() {
        return FptStatus::NullArgument;
    }
    if len == 0 {
        return FptStatus::InvalidArgument;
    }
    let grid = std::slice::from_raw_parts(s_grid, len);
    match bounds::theorem_envelope(&(*b).0, grid) {
        Ok(env) => {
            std::ptr::copy_nonoverlapping(env.lower.as_ptr(), lower, len);
            std::ptr::copy_nonoverlapping(env.upper.as_ptr(), upper, len);
            FptStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
