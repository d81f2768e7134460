use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;

use amvp_core::hodograph::{CoefficientSet, HodographModel, PolarPoint};
use amvp_core::pharmonic::{eval_u, grad_u};
use amvp_core::spectral::ProblemParams;

fn assert_close(a: Complex64, b: Complex64, rel: f64) {
    assert!((a - b).norm() <= rel * b.norm(), "{a} vs {b}");
}

fn model(p: f64, n: u32, coeffs: &[(u32, Complex64)]) -> HodographModel {
    HodographModel::new(CoefficientSet::new(ProblemParams::new(p, n).unwrap(), coeffs.to_vec()).unwrap()).unwrap()
}

#[test]
fn laplace_case_is_a_harmonic_polynomial() {
    // p = 2: H = Σ A_k ξ^{k-n} and ũ = Σ 2((k-n)/k) Re(A_k ξ^k)
    let a = [
        (3, Complex64::new(0.8, 0.3)),
        (4, Complex64::new(-0.1, 0.05)),
        (6, Complex64::new(0.02, -0.01)),
    ];
    let m = model(2.0, 2, &a);
    let xi = PolarPoint::new(0.4 * m.validity_radius(), 2.1);
    let w = xi.to_complex();
    let h: Complex64 = a.iter().map(|&(k, c)| c * w.powi(k as i32 - 2)).sum();
    let u: f64 = a
        .iter()
        .map(|&(k, c)| 2.0 * (k as f64 - 2.0) / k as f64 * (c * w.powi(k as i32)).re)
        .sum();
    assert_close(m.eval_h(xi).unwrap(), h, 1e-13);
    assert_relative_eq!(m.eval_u_tilde(xi).unwrap(), u, max_relative = 1e-13);
}

#[test]
fn leading_coefficient_phase_rotates_the_first_term() {
    let (p, n) = (5.0, 2);
    let phi: f64 = 2.0;
    let unit = model(p, n, &[(3, Complex64::new(1.0, 0.0))]);
    let rotated = model(p, n, &[(3, Complex64::from_polar(1.7, phi))]);
    for j in 0..12 {
        let xi = PolarPoint::new(0.3, TAU * j as f64 / 12.0);
        let shifted = PolarPoint::new(xi.r, xi.theta - phi / 3.0);
        let expected = 1.7 * Complex64::from_polar(1.0, phi * 2.0 / 3.0) * unit.eval_a(xi);
        assert_close(rotated.eval_a(shifted), expected, 1e-13);
    }
}

#[test]
fn gradient_is_the_power_of_the_hodographic_variable() {
    // the complex gradient ½(u_x - i u_y) equals ξⁿ at z = H(ξ)
    let m = model(
        3.0,
        2,
        &[(3, Complex64::new(1.0, 0.0)), (4, Complex64::new(0.1, -0.05))],
    );
    for j in 0..8 {
        let xi = PolarPoint::new(0.5 * m.validity_radius(), 0.2 + TAU * j as f64 / 8.0);
        let (ux, uy) = grad_u(&m, m.eval_h(xi).unwrap()).unwrap();
        let expected = xi.to_complex().powi(2);
        assert_close(Complex64::new(ux, -uy) / 2.0, expected, 1e-9);
    }
}

#[test]
fn single_term_u_flips_sign_under_rotation() {
    // with only A_{n+1}, u(e^{iπ/(n+1)} z) = -u(z)
    let m = model(4.0, 1, &[(2, Complex64::new(1.0, 0.0))]);
    let z = Complex64::new(0.3, 0.1) * m.plane_radius();
    let turned = z * Complex64::from_polar(1.0, PI / 2.0);
    assert_relative_eq!(
        eval_u(&m, turned).unwrap(),
        -eval_u(&m, z).unwrap(),
        max_relative = 1e-12
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn inversion_round_trips(
        p in 1.2f64..25.0,
        n in 1u32..4,
        re in -0.1f64..0.1,
        im in -0.1f64..0.1,
        frac in 1e-3f64..0.9,
        theta in 0.0f64..TAU,
    ) {
        let m = model(p, n, &[(n + 1, Complex64::new(1.0, 0.0)), (n + 2, Complex64::new(re, im))]);
        let xi = PolarPoint::new(frac * m.validity_radius(), theta);
        let z = m.eval_h(xi).unwrap();
        let back = m.invert_h(z).unwrap();
        prop_assert!((back.to_complex() - xi.to_complex()).norm() <= 1e-12 * xi.r.max(1e-3));
        let u = eval_u(&m, z).unwrap();
        let ut = m.eval_u_tilde(xi).unwrap();
        prop_assert!((u - ut).abs() <= 1e-12 * ut.abs().max(xi.r.powf(n as f64 + m.leading().lambda)));
    }

    #[test]
    fn first_term_jacobian_is_positive(p in 1.05f64..50.0, n in 1u32..6, theta in 0.0f64..TAU) {
        let m = model(p, n, &[(n + 1, Complex64::new(1.0, 0.0))]);
        prop_assert!(m.j_theta(theta) > 0.0);
        prop_assert!(m.jacobian_a(PolarPoint::new(0.2, theta)).unwrap() > 0.0);
    }
}
