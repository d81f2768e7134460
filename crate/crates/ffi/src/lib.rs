//! C interface to `amvp-core`.
//!
//! Every function returns an [`AmvpStatus`] and writes its results through
//! out-pointers. On failure the message is kept per thread and read back with
//! [`amvp_last_error`]. Models are opaque handles released by
//! [`amvp_model_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use amvp_core::amvp::amvp_residual as core_residual;
use amvp_core::hodograph::{CoefficientSet, HodographModel, PolarPoint};
use amvp_core::pharmonic::eval_u;
use amvp_core::spectral::{self, ProblemParams};
use amvp_core::Error;
use num_complex::Complex64;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmvpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutsideRegion = 3,
    NoConvergence = 4,
    Numerical = 5,
    Panic = 6,
}

/// Opaque handle to a hodographic model.
pub struct AmvpModel(HodographModel);

/// `(λ_k, ε_k, μ_k)` for one index `k`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmvpSpectralTriple {
    pub k: u32,
    pub lambda: f64,
    pub epsilon: f64,
    pub mu: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(error: &Error) -> AmvpStatus {
    match error {
        Error::InvalidParams(_) | Error::IndexOutOfRange { .. } | Error::InvalidCoefficients(_) | Error::Config(_) => {
            AmvpStatus::InvalidArgument
        }
        Error::OutsideRegion { .. } | Error::AtOrigin => AmvpStatus::OutsideRegion,
        Error::NoConvergence { .. } | Error::NoBracket(_) | Error::Minimization { .. } => AmvpStatus::NoConvergence,
        Error::Evaluation { source, .. } => status_of(source),
        _ => AmvpStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), AmvpStatus>) -> AmvpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AmvpStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {what}"));
            AmvpStatus::Panic
        }
    }
}

fn core<T>(r: amvp_core::Result<T>) -> Result<T, AmvpStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), AmvpStatus> {
    if p.is_null() {
        set_error(format!("{name} is null"));
        Err(AmvpStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// SAFETY: callers pass a pointer already checked by `non_null` that the C
/// side guarantees points to a writable `T`.
unsafe fn write<T>(out: *mut T, value: T) {
    unsafe { out.write(value) }
}

fn model_ref<'a>(model: *const AmvpModel) -> Result<&'a HodographModel, AmvpStatus> {
    non_null(model, "model")?;
    // SAFETY: non-null handles come from amvp_model_new and are live until amvp_model_free
    Ok(unsafe { &(*model).0 })
}

/// Message of the last failure on this thread, or null if there was none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn amvp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a model from `len` coefficients `A_{ks[i]} = re[i] + i im[i]`.
///
/// # Safety
/// `ks`, `re` and `im` must each point to `len` readable values and `out` to
/// a writable handle slot.
#[no_mangle]
pub unsafe extern "C" fn amvp_model_new(
    p: f64,
    n: u32,
    ks: *const u32,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut AmvpModel,
) -> AmvpStatus {
    guard(|| {
        non_null(out, "out")?;
        non_null(ks, "ks")?;
        non_null(re, "re")?;
        non_null(im, "im")?;
        // SAFETY: lengths are the caller's contract
        let (ks, re, im) = unsafe {
            (
                std::slice::from_raw_parts(ks, len),
                std::slice::from_raw_parts(re, len),
                std::slice::from_raw_parts(im, len),
            )
        };
        let params = core(ProblemParams::new(p, n))?;
        let coeffs = ks
            .iter()
            .zip(re.iter().zip(im))
            .map(|(&k, (&a, &b))| (k, Complex64::new(a, b)))
            .collect();
        let model = core(CoefficientSet::new(params, coeffs).and_then(HodographModel::new))?;
        unsafe { write(out, Box::into_raw(Box::new(AmvpModel(model)))) };
        Ok(())
    })
}

/// Releases a handle from [`amvp_model_new`]; null is ignored.
///
/// # Safety
/// `model` must be null or a live handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn amvp_model_free(model: *mut AmvpModel) {
    if !model.is_null() {
        // SAFETY: ownership returns from the caller
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Certified hodographic radius and the radius of the physical disc around 0
/// contained in its image.
///
/// # Safety
/// `model` must be a live handle; the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_model_radii(model: *const AmvpModel, validity: *mut f64, plane: *mut f64) -> AmvpStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(validity, "validity")?;
        non_null(plane, "plane")?;
        unsafe {
            write(validity, m.validity_radius());
            write(plane, m.plane_radius());
        }
        Ok(())
    })
}

/// `H(r e^{iθ})`.
///
/// # Safety
/// `model` must be a live handle; the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_eval_h(
    model: *const AmvpModel,
    r: f64,
    theta: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> AmvpStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out_re, "out_re")?;
        non_null(out_im, "out_im")?;
        if !(r >= 0.0 && theta.is_finite()) {
            set_error(format!("invalid polar point r = {r}, theta = {theta}"));
            return Err(AmvpStatus::InvalidArgument);
        }
        let w = core(m.eval_h(PolarPoint::new(r, theta)))?;
        unsafe {
            write(out_re, w.re);
            write(out_im, w.im);
        }
        Ok(())
    })
}

/// Polar coordinates of `H⁻¹(x + iy)`.
///
/// # Safety
/// `model` must be a live handle; the out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_invert_h(
    model: *const AmvpModel,
    x: f64,
    y: f64,
    out_r: *mut f64,
    out_theta: *mut f64,
) -> AmvpStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out_r, "out_r")?;
        non_null(out_theta, "out_theta")?;
        let xi = core(m.invert_h(Complex64::new(x, y)))?;
        unsafe {
            write(out_r, xi.r);
            write(out_theta, xi.theta);
        }
        Ok(())
    })
}

/// The p-harmonic function `u(x + iy)`.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_eval_u(model: *const AmvpModel, x: f64, y: f64, out: *mut f64) -> AmvpStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        let v = core(eval_u(m, Complex64::new(x, y)))?;
        unsafe { write(out, v) };
        Ok(())
    })
}

/// `α (sup + inf)/2 + (1 - α) mean - u(x0)` of `u` on the disc of the given
/// radius about `x + iy`, sampled at angular `resolution`.
///
/// # Safety
/// `model` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_residual(
    model: *const AmvpModel,
    x: f64,
    y: f64,
    radius: f64,
    alpha: f64,
    resolution: usize,
    out: *mut f64,
) -> AmvpStatus {
    guard(|| {
        let m = model_ref(model)?;
        non_null(out, "out")?;
        if !(radius > 0.0 && (0.0..=1.0).contains(&alpha) && resolution >= 16) {
            set_error(format!(
                "need radius > 0, alpha in [0, 1], resolution >= 16 (got {radius}, {alpha}, {resolution})"
            ));
            return Err(AmvpStatus::InvalidArgument);
        }
        let v = core(core_residual(
            |z| eval_u(m, z),
            Complex64::new(x, y),
            radius,
            alpha,
            resolution,
        ))?;
        unsafe { write(out, v) };
        Ok(())
    })
}

/// `(λ_k, ε_k, μ_k)` for exponent `p` and multiplicity `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_spectral_triple(p: f64, n: u32, k: u32, out: *mut AmvpSpectralTriple) -> AmvpStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = core(ProblemParams::new(p, n))?;
        let t = core(spectral::spectral_triple(params, k))?;
        unsafe {
            write(
                out,
                AmvpSpectralTriple {
                    k: t.k,
                    lambda: t.lambda,
                    epsilon: t.epsilon,
                    mu: t.mu,
                },
            )
        };
        Ok(())
    })
}

/// `(n + λ_{n+2}) / λ_{n+1}`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_exponent_ratio(p: f64, n: u32, out: *mut f64) -> AmvpStatus {
    guard(|| {
        non_null(out, "out")?;
        let params = core(ProblemParams::new(p, n))?;
        unsafe { write(out, spectral::exponent_ratio(params)) };
        Ok(())
    })
}

/// Weights `((p-2)/(p+2), 4/(p+2))` on the midrange and the mean.
///
/// # Safety
/// The out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn amvp_weights(p: f64, midrange: *mut f64, mean: *mut f64) -> AmvpStatus {
    guard(|| {
        non_null(midrange, "midrange")?;
        non_null(mean, "mean")?;
        core(ProblemParams::new(p, 1))?;
        let (a, b) = spectral::amvp_weights(p);
        unsafe {
            write(midrange, a);
            write(mean, b);
        }
        Ok(())
    })
}
