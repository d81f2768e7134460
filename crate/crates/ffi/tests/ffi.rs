use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use amvp_ffi::*;

fn model(p: f64, n: u32, coeffs: &[(u32, f64, f64)]) -> *mut AmvpModel {
    let ks: Vec<u32> = coeffs.iter().map(|c| c.0).collect();
    let re: Vec<f64> = coeffs.iter().map(|c| c.1).collect();
    let im: Vec<f64> = coeffs.iter().map(|c| c.2).collect();
    let mut out = ptr::null_mut();
    let status = unsafe { amvp_model_new(p, n, ks.as_ptr(), re.as_ptr(), im.as_ptr(), ks.len(), &mut out) };
    assert_eq!(status, AmvpStatus::Ok);
    assert!(!out.is_null());
    out
}

fn last_error() -> String {
    let p = amvp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn spectral_values_cross_the_boundary() {
    let mut t = AmvpSpectralTriple {
        k: 0,
        lambda: 0.0,
        epsilon: 0.0,
        mu: 0.0,
    };
    assert_eq!(unsafe { amvp_spectral_triple(2.0, 1, 3, &mut t) }, AmvpStatus::Ok);
    assert_eq!(t.k, 3);
    assert!((t.lambda - 2.0).abs() < 1e-14);
    assert!(t.epsilon.abs() < 1e-15);
    let mut ratio = 0.0;
    assert_eq!(unsafe { amvp_exponent_ratio(2.0, 1, &mut ratio) }, AmvpStatus::Ok);
    assert!((ratio - 3.0).abs() < 1e-14);
    let (mut a, mut b) = (0.0, 0.0);
    assert_eq!(unsafe { amvp_weights(6.0, &mut a, &mut b) }, AmvpStatus::Ok);
    assert!((a - 0.5).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
}

#[test]
fn bad_arguments_set_codes_and_messages() {
    let mut t = AmvpSpectralTriple {
        k: 0,
        lambda: 0.0,
        epsilon: 0.0,
        mu: 0.0,
    };
    assert_eq!(
        unsafe { amvp_spectral_triple(3.0, 2, 2, &mut t) },
        AmvpStatus::InvalidArgument
    );
    assert!(last_error().contains("k = 2"));
    assert_eq!(
        unsafe { amvp_exponent_ratio(0.5, 1, &mut 0.0) },
        AmvpStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { amvp_exponent_ratio(3.0, 1, ptr::null_mut()) },
        AmvpStatus::NullPointer
    );
    assert!(last_error().contains("out"));
    assert_eq!(
        unsafe { amvp_eval_u(ptr::null(), 0.0, 0.0, &mut 0.0) },
        AmvpStatus::NullPointer
    );

    let mut out = ptr::null_mut();
    let status = unsafe { amvp_model_new(3.0, 1, [3u32].as_ptr(), [1.0].as_ptr(), [0.0].as_ptr(), 1, &mut out) };
    assert_eq!(status, AmvpStatus::InvalidArgument);
    assert!(out.is_null());
}

#[test]
fn laplace_model_round_trips() {
    // p = 2, n = 1, A_2 = 1: H(ξ) = ξ and u = Re z²
    let m = model(2.0, 1, &[(2, 1.0, 0.0)]);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { amvp_eval_h(m, 0.3, 1.0, &mut re, &mut im) }, AmvpStatus::Ok);
    assert!((re - 0.3 * 1f64.cos()).abs() < 1e-15 && (im - 0.3 * 1f64.sin()).abs() < 1e-15);
    let mut u = 0.0;
    assert_eq!(unsafe { amvp_eval_u(m, 0.3, 0.2, &mut u) }, AmvpStatus::Ok);
    assert!((u - (0.09 - 0.04)).abs() < 1e-14, "{u}");
    let mut res = 1.0;
    assert_eq!(
        unsafe { amvp_residual(m, 0.0, 0.0, 0.1, 0.0, 32, &mut res) },
        AmvpStatus::Ok
    );
    assert!(res.abs() < 1e-15);
    unsafe { amvp_model_free(m) };
}

#[test]
fn nonlinear_model_inverts() {
    let m = model(3.0, 1, &[(2, 1.0, 0.0), (3, 0.05, 0.02)]);
    let (mut validity, mut plane) = (0.0, 0.0);
    assert_eq!(
        unsafe { amvp_model_radii(m, &mut validity, &mut plane) },
        AmvpStatus::Ok
    );
    assert!(validity > 0.0 && plane > 0.0);
    let (r0, t0) = (0.5 * validity, 2.0);
    let (mut x, mut y) = (0.0, 0.0);
    assert_eq!(unsafe { amvp_eval_h(m, r0, t0, &mut x, &mut y) }, AmvpStatus::Ok);
    let (mut r, mut t) = (0.0, 0.0);
    assert_eq!(unsafe { amvp_invert_h(m, x, y, &mut r, &mut t) }, AmvpStatus::Ok);
    assert!((r - r0).abs() < 1e-10 * r0 && (t - t0).abs() < 1e-10);
    assert_eq!(
        unsafe { amvp_eval_h(m, 10.0 * validity, 0.0, &mut x, &mut y) },
        AmvpStatus::OutsideRegion
    );
    assert_eq!(
        unsafe { amvp_residual(m, 0.0, 0.0, -1.0, 0.2, 32, &mut 0.0) },
        AmvpStatus::InvalidArgument
    );
    unsafe {
        amvp_model_free(m);
        amvp_model_free(ptr::null_mut());
    }
}

#[test]
fn header_declares_the_interface_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/amvp.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in [
        "AMVP_STATUS_OK",
        "AMVP_STATUS_PANIC",
        "typedef struct AmvpModel AmvpModel",
        "amvp_model_new",
        "amvp_model_free",
        "amvp_eval_u",
        "amvp_invert_h",
        "amvp_residual",
        "amvp_last_error",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
    // a C compiler is optional on build machines
    if let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-x", "c", "-Wall", "-Werror"])
        .arg(&header)
        .output()
    {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
