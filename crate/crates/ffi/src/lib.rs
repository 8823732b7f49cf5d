//! C ABI over `fractrans`.
//!
//! Conventions:
//!
//! * Every fallible function returns an [`FtStatus`]; results go through out
//!   pointers. On failure the out pointer is left untouched and
//!   [`ft_last_error`] describes the error.
//! * Handles are opaque and owned by the caller, who releases them with the
//!   matching `*_free` function. Passing NULL to a `*_free` function is a
//!   no-op.
//! * Array getters take a caller buffer and its capacity; they write the
//!   required length to `out_len` and return `FT_STATUS_BUFFER_TOO_SMALL`
//!   when it does not fit. Pass a NULL buffer to query the length.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fractrans::analysis::alpha_n;
use fractrans::doss_sussmann::{
    compose_x, euler_y, h_euler, h_flow, solve_y, CoefficientRegistry, CoefficientSet, EulerGridH, HEvaluator, HFlow,
    PresetArgs, SolutionPath, DEFAULT_FLOW_TOL,
};
use fractrans::fbm::{exact_fbm, fbm_covariance, normalization_c, sample_bn, uniform_grid, ApproxParams, DriverPath, HistoryCoupling};
use fractrans::{Error, RngSeed};
use libc::size_t;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    Quadrature = 4,
    Integration = 5,
    Configuration = 6,
    Factorization = 7,
    NotApplicable = 8,
    InsufficientData = 9,
    Io = 10,
    BufferTooSmall = 11,
    Panic = 12,
}

impl From<&Error> for FtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => FtStatus::InvalidParameter,
            Error::Domain(_) => FtStatus::Domain,
            Error::QuadratureFailure { .. } => FtStatus::Quadrature,
            Error::Integration { .. } => FtStatus::Integration,
            Error::Configuration(_) => FtStatus::Configuration,
            Error::Factorization(_) => FtStatus::Factorization,
            Error::NotApplicable(_) => FtStatus::NotApplicable,
            Error::InsufficientData(_) => FtStatus::InsufficientData,
            Error::Io(_) => FtStatus::Io,
        }
    }
}

/// Approximation parameters.
pub struct FtParams {
    inner: ApproxParams,
}

/// A driver path on a time grid.
pub struct FtDriver {
    inner: DriverPath,
}

/// SDE coefficients.
pub struct FtCoeffs {
    inner: CoefficientSet,
}

/// A solution path (Y and optionally X).
pub struct FtSolution {
    inner: SolutionPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: FtStatus, msg: impl Into<String>) -> FtStatus {
    set_error(msg);
    status
}

/// Runs `f`, mapping library errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), FtStatus>>(f: F) -> FtStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(FtStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: fractrans::Result<T>) -> Result<T, FtStatus> {
    r.map_err(|e| fail(FtStatus::from(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), FtStatus> {
    if p.is_null() {
        Err(fail(FtStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `out` must be valid for writes when non-null.
unsafe fn put<T>(out: *mut T, v: T) -> Result<(), FtStatus> {
    non_null(out, "output pointer")?;
    out.write(v);
    Ok(())
}

/// # Safety
/// `buf` must hold `cap` values when non-null; `out_len` must be writable.
unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: size_t, out_len: *mut size_t) -> Result<(), FtStatus> {
    put(out_len, src.len())?;
    if buf.is_null() {
        return Ok(());
    }
    if cap < src.len() {
        return Err(fail(
            FtStatus::BufferTooSmall,
            format!("buffer holds {cap} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ft_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ft_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Validated approximation parameters.
///
/// # Safety
/// `out` must be a valid pointer to a handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_params_new(
    hurst: f64,
    beta: f64,
    delta: f64,
    a: f64,
    n: u64,
    horizon: f64,
    out: *mut *mut FtParams,
) -> FtStatus {
    guard(|| {
        non_null(out, "out")?;
        let inner = lib(ApproxParams::new(hurst, beta, delta, a, n, horizon))?;
        put(out, Box::into_raw(Box::new(FtParams { inner })))
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`ft_params_new`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ft_params_free(p: *mut FtParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Transport approximation `B^n` on `grid_points + 1` uniform points of
/// `[0, T]`, drawn from stream `stream` of `master_seed`.
///
/// # Safety
/// `params` must be a live handle and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_sample_bn(
    params: *const FtParams,
    master_seed: u64,
    stream: u64,
    grid_points: size_t,
    out: *mut *mut FtDriver,
) -> FtStatus {
    guard(|| {
        non_null(params, "params")?;
        non_null(out, "out")?;
        let p = &(*params).inner;
        let grid = uniform_grid(p.horizon, grid_points);
        let inner = lib(sample_bn(p, RngSeed::new(master_seed, stream), &grid, HistoryCoupling::Endpoint))?;
        put(out, Box::into_raw(Box::new(FtDriver { inner })))
    })
}

/// Exact fBm by Cholesky factorisation on `grid_points + 1` uniform points.
///
/// # Safety
/// `out` must be a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_exact_fbm(
    hurst: f64,
    horizon: f64,
    grid_points: size_t,
    master_seed: u64,
    stream: u64,
    out: *mut *mut FtDriver,
) -> FtStatus {
    guard(|| {
        non_null(out, "out")?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(fail(FtStatus::InvalidParameter, format!("horizon must be positive, got {horizon}")));
        }
        let grid = uniform_grid(horizon, grid_points);
        let inner = lib(exact_fbm(hurst, &grid, RngSeed::new(master_seed, stream)))?;
        put(out, Box::into_raw(Box::new(FtDriver { inner })))
    })
}

/// Number of grid points.
///
/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_len(d: *const FtDriver) -> size_t {
    if d.is_null() {
        0
    } else {
        (*d).inner.len()
    }
}

/// # Safety
/// See the crate conventions for array getters.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_grid(d: *const FtDriver, buf: *mut f64, cap: size_t, out_len: *mut size_t) -> FtStatus {
    guard(|| {
        non_null(d, "driver")?;
        copy_out(&(*d).inner.grid, buf, cap, out_len)
    })
}

/// # Safety
/// See the crate conventions for array getters.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_values(d: *const FtDriver, buf: *mut f64, cap: size_t, out_len: *mut size_t) -> FtStatus {
    guard(|| {
        non_null(d, "driver")?;
        copy_out(&(*d).inner.values, buf, cap, out_len)
    })
}

/// # Safety
/// `d` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_driver_free(d: *mut FtDriver) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Named coefficient preset (`linear`, `sin-cos`, `arctan-demo`).
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_coeffs_preset(
    name: *const c_char,
    b0: f64,
    c: f64,
    x0: f64,
    out: *mut *mut FtCoeffs,
) -> FtStatus {
    guard(|| {
        non_null(name, "name")?;
        non_null(out, "out")?;
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(FtStatus::InvalidParameter, "preset name is not UTF-8"))?;
        let inner = lib(CoefficientRegistry::default().build(name, &PresetArgs { b0, c, x0 }))?;
        put(out, Box::into_raw(Box::new(FtCoeffs { inner })))
    })
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_coeffs_free(c: *mut FtCoeffs) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Reference `Y` by RK4 with step `step`.
///
/// # Safety
/// Handles must be live and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_solve_reference(
    c: *const FtCoeffs,
    d: *const FtDriver,
    step: f64,
    out: *mut *mut FtSolution,
) -> FtStatus {
    guard(|| {
        non_null(c, "coeffs")?;
        non_null(d, "driver")?;
        non_null(out, "out")?;
        let inner = lib(solve_y(&(*c).inner, &(*d).inner, step))?;
        put(out, Box::into_raw(Box::new(FtSolution { inner })))
    })
}

/// Euler `Y^{n,m}`.
///
/// # Safety
/// Handles must be live and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_solve_euler(
    c: *const FtCoeffs,
    n: u64,
    m: u64,
    d: *const FtDriver,
    out: *mut *mut FtSolution,
) -> FtStatus {
    guard(|| {
        non_null(c, "coeffs")?;
        non_null(d, "driver")?;
        non_null(out, "out")?;
        let inner = lib(euler_y(&(*c).inner, n, m, &(*d).inner))?;
        put(out, Box::into_raw(Box::new(FtSolution { inner })))
    })
}

/// `X = h(Y, B)` with the exact flow (`euler_n == 0`) or the Euler grid
/// flow of resolution `euler_n`.
///
/// # Safety
/// Handles must be live and `out` a valid handle slot.
#[no_mangle]
pub unsafe extern "C" fn ft_compose_x(
    c: *const FtCoeffs,
    euler_n: u64,
    y: *const FtSolution,
    d: *const FtDriver,
    out: *mut *mut FtSolution,
) -> FtStatus {
    guard(|| {
        non_null(c, "coeffs")?;
        non_null(y, "solution")?;
        non_null(d, "driver")?;
        non_null(out, "out")?;
        let coeffs = (*c).inner.clone();
        let inner = if euler_n == 0 {
            let flow = HFlow::new(coeffs, DEFAULT_FLOW_TOL);
            lib(compose_x(HEvaluator::Exact(&flow), &(*y).inner, &(*d).inner))?
        } else {
            let grid_h = EulerGridH::new(coeffs, euler_n);
            lib(compose_x(HEvaluator::Euler(&grid_h), &(*y).inner, &(*d).inner))?
        };
        put(out, Box::into_raw(Box::new(FtSolution { inner })))
    })
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_solution_len(s: *const FtSolution) -> size_t {
    if s.is_null() {
        0
    } else {
        (*s).inner.grid.len()
    }
}

/// # Safety
/// See the crate conventions for array getters.
#[no_mangle]
pub unsafe extern "C" fn ft_solution_grid(s: *const FtSolution, buf: *mut f64, cap: size_t, out_len: *mut size_t) -> FtStatus {
    guard(|| {
        non_null(s, "solution")?;
        copy_out(&(*s).inner.grid, buf, cap, out_len)
    })
}

/// `FT_STATUS_NOT_APPLICABLE` if the solution has no Y series.
///
/// # Safety
/// See the crate conventions for array getters.
#[no_mangle]
pub unsafe extern "C" fn ft_solution_y(s: *const FtSolution, buf: *mut f64, cap: size_t, out_len: *mut size_t) -> FtStatus {
    guard(|| {
        non_null(s, "solution")?;
        let y = (*s).inner.y.as_deref().ok_or_else(|| fail(FtStatus::NotApplicable, "no Y series"))?;
        copy_out(y, buf, cap, out_len)
    })
}

/// `FT_STATUS_NOT_APPLICABLE` if the solution has no X series.
///
/// # Safety
/// See the crate conventions for array getters.
#[no_mangle]
pub unsafe extern "C" fn ft_solution_x(s: *const FtSolution, buf: *mut f64, cap: size_t, out_len: *mut size_t) -> FtStatus {
    guard(|| {
        non_null(s, "solution")?;
        let x = (*s).inner.x.as_deref().ok_or_else(|| fail(FtStatus::NotApplicable, "no X series"))?;
        copy_out(x, buf, cap, out_len)
    })
}

/// # Safety
/// `s` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ft_solution_free(s: *mut FtSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// fBm covariance `(s^2H + t^2H - |t-s|^2H) / 2`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_fbm_covariance(hurst: f64, s: f64, t: f64, out: *mut f64) -> FtStatus {
    guard(|| put(out, lib(fbm_covariance(hurst, s, t))?))
}

/// Normalising constant `C_H` of the moving-average representation.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_normalization_c(hurst: f64, out: *mut f64) -> FtStatus {
    guard(|| put(out, lib(normalization_c(hurst))?))
}

/// Rate `n^(-1/2 + beta + delta) (log n)^(5/2)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ft_alpha_n(n: f64, beta: f64, delta: f64, out: *mut f64) -> FtStatus {
    guard(|| put(out, lib(alpha_n(n, beta, delta))?))
}

/// Flow value `h(x, y)`.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ft_h_flow(c: *const FtCoeffs, x: f64, y: f64, out: *mut f64) -> FtStatus {
    guard(|| {
        non_null(c, "coeffs")?;
        put(out, lib(h_flow(&(*c).inner, x, y, DEFAULT_FLOW_TOL))?.h)
    })
}

/// Euler grid flow `h^n(x, y)`, zero outside `[-n, n]²`.
///
/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ft_h_euler(c: *const FtCoeffs, n: u64, x: f64, y: f64, out: *mut f64) -> FtStatus {
    guard(|| {
        non_null(c, "coeffs")?;
        put(out, h_euler(&(*c).inner, n, x, y))
    })
}
