//! C ABI over the `fsde` crate.
//!
//! Every function returns an [`FsdeStatus`]; results go through out-pointers.
//! On failure, `fsde_last_error` returns a message for the calling thread.
//! Handles (`FsdeDrift`, `FsdePath`) are opaque and must be released with
//! their `_free` function. Panics are caught at the boundary and reported as
//! `FSDE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fsde::drift::check_admissibility;
use fsde::estimate::{estimate_series, hurst_estimator};
use fsde::noise::{gauss_2f1, sample_fbm_rep, volterra_kernel};
use fsde::scheme::{solve_increments, solve_path};
use fsde::transform::theta_discrete;
use fsde::{DriftFamily, DriftParams, DriftSpec, Error, EulerPath, NoiseConfig, TimeGrid};

/// Result code of every exported function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FsdeStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    Unsupported = 3,
    Inadmissible = 4,
    Numerical = 5,
    Resource = 6,
    Degenerate = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// A validated drift.
pub struct FsdeDrift {
    spec: DriftSpec,
}

/// Knots of a simulated path on a uniform grid.
pub struct FsdePath {
    path: EulerPath,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(FsdeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Parameter(_) | Error::Config(_) | Error::Io(_) => FsdeStatus::InvalidArgument,
            Error::Domain(_) => FsdeStatus::Domain,
            Error::Unsupported(_) => FsdeStatus::Unsupported,
            Error::Inadmissible(_) => FsdeStatus::Inadmissible,
            Error::Numerical(_) => FsdeStatus::Numerical,
            Error::Resource(_) => FsdeStatus::Resource,
            Error::Degenerate(_) => FsdeStatus::Degenerate,
        };
        Failure(status, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn set_last_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).unwrap_or_default());
    });
}

fn guard(body: impl FnOnce() -> Outcome) -> FsdeStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_last_error(None);
            FsdeStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(Some(msg));
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(Some(format!("panic: {msg}")));
            FsdeStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(FsdeStatus::NullPointer, format!("`{name}` is null"))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn input<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn output<'a>(p: *mut f64, len: usize, needed: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len < needed {
        return Err(Failure(
            FsdeStatus::BufferTooSmall,
            format!("`{name}` holds {len} values, {needed} needed"),
        ));
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, needed))
}

/// Message of the last failed call on this thread, or NULL after a
/// successful call. Valid until the next call into the library.
#[no_mangle]
pub extern "C" fn fsde_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fsde_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a drift. `family` is one of `b1`, `b2`, `b1_plus_sin`,
/// `b2_plus_sin`, `b1_plus_log`, `b2_plus_log`; `lambda` and `mu` are ignored
/// by the unperturbed families.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out_drift` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_new(
    family: *const c_char,
    u: f64,
    v: f64,
    w: f64,
    gamma: f64,
    lambda: f64,
    mu: f64,
    out_drift: *mut *mut FsdeDrift,
) -> FsdeStatus {
    guard(|| {
        let slot = out(out_drift, "out_drift")?;
        *slot = ptr::null_mut();
        if family.is_null() {
            return Err(null("family"));
        }
        let name = CStr::from_ptr(family)
            .to_str()
            .map_err(|_| Failure(FsdeStatus::InvalidArgument, "family is not UTF-8".into()))?;
        let family: DriftFamily = name.parse()?;
        let mut params = DriftParams::new(u, v, w, gamma);
        if name.contains("_plus_") {
            params = params.with_perturbation(lambda, mu);
        }
        let spec = DriftSpec::new(family, params)?;
        *slot = Box::into_raw(Box::new(FsdeDrift { spec }));
        Ok(())
    })
}

/// Releases a drift; NULL is ignored.
///
/// # Safety
/// `drift` must come from `fsde_drift_new` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_free(drift: *mut FsdeDrift) {
    if !drift.is_null() {
        drop(Box::from_raw(drift));
    }
}

/// `b(x)`.
///
/// # Safety
/// `drift` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_eval(drift: *const FsdeDrift, x: f64, out_value: *mut f64) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        *out(out_value, "out_value")? = d.spec.b(x)?;
        Ok(())
    })
}

/// `b'(x)`.
///
/// # Safety
/// `drift` must be a live handle and `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_eval_dot(drift: *const FsdeDrift, x: f64, out_value: *mut f64) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        *out(out_value, "out_value")? = d.spec.b_dot(x)?;
        Ok(())
    })
}

/// The zero of `b`.
///
/// # Safety
/// `drift` must be a live handle and `out_root` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_root(drift: *const FsdeDrift, out_root: *mut f64) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        *out(out_root, "out_root")? = d.spec.x_b()?;
        Ok(())
    })
}

/// Contraction constant `K` and growth constant `R`.
///
/// # Safety
/// `drift` must be a live handle; both out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_constants(
    drift: *const FsdeDrift,
    out_k: *mut f64,
    out_r: *mut f64,
) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        *out(out_k, "out_k")? = d.spec.contraction_k;
        *out(out_r, "out_r")? = d.spec.growth_r;
        Ok(())
    })
}

/// Writes 1 to `out_admissible` if the drift is admissible for Hölder
/// exponent `alpha`, else 0. The reasons for rejection are available through
/// `fsde_last_error` only when the status is not OK.
///
/// # Safety
/// `drift` must be a live handle and `out_admissible` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_drift_check(
    drift: *const FsdeDrift,
    alpha: f64,
    out_admissible: *mut c_int,
) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        let report = check_admissibility(&d.spec, alpha);
        *out(out_admissible, "out_admissible")? = c_int::from(report.admissible);
        Ok(())
    })
}

/// Samples fBm values `B(t_0..t_n)` on `[0, horizon]`; `out_values` must hold
/// at least `n + 1` values.
///
/// # Safety
/// `out_values` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fsde_sample_fbm(
    hurst: f64,
    horizon: f64,
    n: usize,
    seed: u64,
    rep: u64,
    out_values: *mut f64,
    len: usize,
) -> FsdeStatus {
    guard(|| {
        let dst = output(out_values, len, n.saturating_add(1), "out_values")?;
        let path = sample_fbm_rep(&NoiseConfig::new(hurst, horizon, n, seed), fsde::rng::streams::NOISE, rep)?;
        dst.copy_from_slice(&path.values);
        Ok(())
    })
}

/// Solves the implicit scheme on `[0, horizon]` with `n` steps, driven by
/// fBm replication `rep` of `seed` (the same draw as `fsde_sample_fbm`).
///
/// # Safety
/// `drift` must be a live handle and `out_path` writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_solve_path(
    drift: *const FsdeDrift,
    sigma: f64,
    x0: f64,
    hurst: f64,
    horizon: f64,
    n: usize,
    seed: u64,
    rep: u64,
    out_path: *mut *mut FsdePath,
) -> FsdeStatus {
    guard(|| {
        let slot = out(out_path, "out_path")?;
        *slot = ptr::null_mut();
        let d = handle(drift, "drift")?;
        let grid = TimeGrid::new(horizon, n)?;
        let driver = sample_fbm_rep(&NoiseConfig::new(hurst, horizon, n, seed), fsde::rng::streams::NOISE, rep)?;
        let path = solve_path(&d.spec, sigma, x0, grid, &driver)?;
        *slot = Box::into_raw(Box::new(FsdePath { path }));
        Ok(())
    })
}

/// Solves the implicit scheme on caller-supplied driver increments; writes
/// `count + 1` knots.
///
/// # Safety
/// `increments` must point to `count` doubles and `out_knots` to `len`
/// writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fsde_solve_increments(
    drift: *const FsdeDrift,
    sigma: f64,
    x0: f64,
    dt: f64,
    increments: *const f64,
    count: usize,
    out_knots: *mut f64,
    len: usize,
) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        let incs = input(increments, count, "increments")?;
        let dst = output(out_knots, len, count + 1, "out_knots")?;
        let knots = solve_increments(&d.spec, sigma, x0, dt, incs)?;
        dst.copy_from_slice(&knots);
        Ok(())
    })
}

/// Number of knots (`n + 1`) in a path; 0 for NULL.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fsde_path_len(path: *const FsdePath) -> usize {
    path.as_ref().map_or(0, |p| p.path.knots.len())
}

/// Copies the knots into `out_knots`.
///
/// # Safety
/// `path` must be a live handle and `out_knots` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fsde_path_copy(path: *const FsdePath, out_knots: *mut f64, len: usize) -> FsdeStatus {
    guard(|| {
        let p = handle(path, "path")?;
        output(out_knots, len, p.path.knots.len(), "out_knots")?.copy_from_slice(&p.path.knots);
        Ok(())
    })
}

/// Releases a path; NULL is ignored.
///
/// # Safety
/// `path` must come from `fsde_solve_path` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fsde_path_free(path: *mut FsdePath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Maps scheme knots `X_0..X_n` on `[0, horizon]` to the Langevin knots.
///
/// # Safety
/// `knots` must point to `count` doubles and `out_values` to `len` writable
/// doubles.
#[no_mangle]
pub unsafe extern "C" fn fsde_theta_discrete(
    drift: *const FsdeDrift,
    knots: *const f64,
    count: usize,
    horizon: f64,
    out_values: *mut f64,
    len: usize,
) -> FsdeStatus {
    guard(|| {
        let d = handle(drift, "drift")?;
        let xs = input(knots, count, "knots")?;
        if count < 2 {
            return Err(Failure(FsdeStatus::InvalidArgument, "need at least two knots".into()));
        }
        let dst = output(out_values, len, count, "out_values")?;
        dst.copy_from_slice(&theta_discrete(&d.spec, xs, horizon, count - 1)?);
        Ok(())
    })
}

/// Hurst estimate of a series `W_0..W_n`.
///
/// # Safety
/// `values` must point to `count` doubles and `out_h` be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_hurst_estimator(values: *const f64, count: usize, out_h: *mut f64) -> FsdeStatus {
    guard(|| {
        let ys = input(values, count, "values")?;
        *out(out_h, "out_h")? = hurst_estimator(ys, count.saturating_sub(1))?;
        Ok(())
    })
}

/// Hurst and volatility estimates of a series `W_0..W_n` observed on
/// `[0, horizon]`.
///
/// # Safety
/// `values` must point to `count` doubles; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_estimate(
    values: *const f64,
    count: usize,
    horizon: f64,
    out_h: *mut f64,
    out_sigma: *mut f64,
) -> FsdeStatus {
    guard(|| {
        let ys = input(values, count, "values")?;
        let r = estimate_series(ys, horizon, count.saturating_sub(1))?;
        *out(out_h, "out_h")? = r.h_hat;
        *out(out_sigma, "out_sigma")? = r.sigma_hat;
        Ok(())
    })
}

/// Volterra kernel `K_H(t, s)` representing fBm as an integral of Brownian motion.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_volterra_kernel(t: f64, s: f64, hurst: f64, out_value: *mut f64) -> FsdeStatus {
    guard(|| {
        *out(out_value, "out_value")? = volterra_kernel(t, s, hurst)?;
        Ok(())
    })
}

/// Gauss hypergeometric function `2F1(a, b; c; z)` for `z <= 0`.
///
/// # Safety
/// `out_value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fsde_gauss_2f1(a: f64, b: f64, c: f64, z: f64, out_value: *mut f64) -> FsdeStatus {
    guard(|| {
        *out(out_value, "out_value")? = gauss_2f1(a, b, c, z)?;
        Ok(())
    })
}
