//! The p-harmonic function `u = ũ ∘ H⁻¹` in the physical plane, its
//! first-term comparison function `𝔘 = 𝔘̃ ∘ 𝔄⁻¹`, and the p-Laplacian
//! certificate.

use num_complex::Complex64;

use serde::{Deserialize, Serialize};

use crate::decay::{decay_fit_above, noise_floor, DecayFit};
use crate::error::{Error, Result};
use crate::hodograph::HodographModel;

/// `u(z)`, normalized so that `u(0) = 0`.
pub fn eval_u(model: &HodographModel, z: Complex64) -> Result<f64> {
    let xi = model.invert_h(z).map_err(|e| Error::at(z, e))?;
    model.eval_u_tilde(xi)
}

/// `(u_x, u_y) = (2 r^n cos nθ, -2 r^n sin nθ)` with `r e^{iθ} = H⁻¹(z)`.
pub fn grad_u(model: &HodographModel, z: Complex64) -> Result<(f64, f64)> {
    let xi = model.invert_h(z).map_err(|e| Error::at(z, e))?;
    Ok(gradient_at(model, xi.r, xi.theta))
}

fn gradient_at(model: &HodographModel, r: f64, theta: f64) -> (f64, f64) {
    let n = model.params().n() as f64;
    let rn = 2.0 * r.powf(n);
    let (s, c) = (n * theta).sin_cos();
    (rn * c, -rn * s)
}

/// Second derivatives `(u_xx, u_xy, u_yy)` by central differences.
pub fn hessian_fd(model: &HodographModel, z: Complex64, h: f64) -> Result<(f64, f64, f64)> {
    let u = |dx: f64, dy: f64| eval_u(model, z + Complex64::new(dx, dy));
    let c = u(0.0, 0.0)?;
    let uxx = (u(h, 0.0)? - 2.0 * c + u(-h, 0.0)?) / (h * h);
    let uyy = (u(0.0, h)? - 2.0 * c + u(0.0, -h)?) / (h * h);
    let uxy = (u(h, h)? - u(h, -h)? - u(-h, h)? + u(-h, -h)?) / (4.0 * h * h);
    Ok((uxx, uxy, uyy))
}

/// Normalized p-Laplacian `(p-2) Δ_∞u / |∇u|² + Δu` using the model's own `p`.
///
/// `Δ_p u = |∇u|^{p-2}` times this quantity at noncritical points.
pub fn plaplacian_residual(model: &HodographModel, z: Complex64, h: f64) -> Result<f64> {
    plaplacian_residual_for(model, z, h, model.params().p())
}

/// As [`plaplacian_residual`] but with an arbitrary operator exponent.
pub fn plaplacian_residual_for(model: &HodographModel, z: Complex64, h: f64, p: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::Stencil(format!("step must be positive, got {h}")));
    }
    if z.norm() <= 4.0 * h {
        return Err(Error::Stencil(format!(
            "|z| = {} too close to the critical point for step {h}",
            z.norm()
        )));
    }
    if z.norm() + 2.0 * h > model.plane_radius() {
        return Err(Error::Stencil(format!(
            "stencil around |z| = {} leaves the certified disc of radius {}",
            z.norm(),
            model.plane_radius()
        )));
    }
    let (ux, uy) = grad_u(model, z)?;
    let (uxx, uxy, uyy) = hessian_fd(model, z, h)?;
    let g2 = ux * ux + uy * uy;
    let inf_lap = uxx * ux * ux + 2.0 * uxy * ux * uy + uyy * uy * uy;
    Ok((p - 2.0) * inf_lap / g2 + (uxx + uyy))
}

/// Residuals of [`plaplacian_residual_for`] along a sequence of steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDecay {
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Rounding level of each second difference, `~ eps (|u| + |z||∇u|) / h²`.
    pub floors: Vec<f64>,
    /// `None` when fewer than three residuals rise above their floors.
    pub fit: Option<DecayFit>,
}

impl ResidualDecay {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Residuals at steps `h_i = rel_steps[i] * |z|` (decreasing) and their
/// log-log fit in `h`.
pub fn residual_decay(model: &HodographModel, z: Complex64, rel_steps: &[f64], p: f64) -> Result<ResidualDecay> {
    let scale = z.norm();
    let steps: Vec<f64> = rel_steps.iter().map(|s| s * scale).collect();
    let residuals = steps
        .iter()
        .map(|&h| plaplacian_residual_for(model, z, h, p).map(f64::abs))
        .collect::<Result<Vec<_>>>()?;
    let (ux, uy) = grad_u(model, z)?;
    let size = eval_u(model, z)?.abs() + scale * ux.hypot(uy);
    let floors: Vec<f64> = steps.iter().map(|h| noise_floor(size) / (h * h)).collect();
    let above = residuals.iter().zip(&floors).filter(|(r, f)| r > f).count();
    let fit = if above >= 3 {
        Some(decay_fit_above(&steps, &residuals, &floors)?)
    } else {
        None
    };
    Ok(ResidualDecay {
        steps,
        residuals,
        floors,
        fit,
    })
}

/// First-term comparison function `𝔘(z) = 𝔘̃(𝔄⁻¹(z))`.
pub fn eval_big_u(model: &HodographModel, z: Complex64) -> Result<f64> {
    let zeta = model.invert_a(z).map_err(|e| Error::at(z, e))?;
    Ok(model.eval_u_tilde_first(zeta))
}

/// `|u(z) - 𝔘(z)|`.
pub fn singular_gap(model: &HodographModel, z: Complex64) -> Result<f64> {
    Ok((eval_u(model, z)? - eval_big_u(model, z)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodograph::{CoefficientSet, PolarPoint};
    use crate::spectral::ProblemParams;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn model(p: f64, n: u32, coeffs: &[(u32, f64, f64)]) -> HodographModel {
        let set = CoefficientSet::new(
            ProblemParams::new(p, n).unwrap(),
            coeffs.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect(),
        )
        .unwrap();
        HodographModel::new(set).unwrap()
    }

    #[test]
    fn identity_model_is_re_z_squared() {
        let m = model(2.0, 1, &[(2, 1.0, 0.0)]);
        let z = Complex64::new(0.3, -0.2);
        assert_abs_diff_eq!(eval_u(&m, z).unwrap(), (z * z).re, epsilon = 1e-15);
        assert_abs_diff_eq!(eval_big_u(&m, z).unwrap(), (z * z).re, epsilon = 1e-15);
        let (ux, uy) = grad_u(&m, z).unwrap();
        assert_abs_diff_eq!(ux, 2.0 * z.re, epsilon = 1e-15);
        assert_abs_diff_eq!(uy, -2.0 * z.im, epsilon = 1e-15);
        assert_eq!(eval_u(&m, Complex64::new(0.0, 0.0)).unwrap(), 0.0);
        assert_eq!(grad_u(&m, Complex64::new(0.0, 0.0)).unwrap(), (0.0, 0.0));
        // harmonic: vanishes for p = 2 anywhere, and for any p where Δ_∞u = 0
        assert!(plaplacian_residual(&m, z, 1e-3).unwrap().abs() < 1e-8);
        let diag = Complex64::new(0.2, 0.2);
        assert!(plaplacian_residual_for(&m, diag, 1e-3, 7.0).unwrap().abs() < 1e-8);
    }

    #[test]
    fn pull_back_and_gradient() {
        let m = model(3.0, 1, &[(2, 1.0, 0.0), (3, 0.05, 0.01)]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let xi = PolarPoint::new(rng.random_range(0.02..0.95), rng.random_range(0.0..TAU));
            let z = m.eval_h(xi).unwrap();
            assert!((eval_u(&m, z).unwrap() - m.eval_u_tilde(xi).unwrap()).abs() <= 1e-12);
        }
        let z = Complex64::new(0.2, 0.15);
        let (ux, uy) = grad_u(&m, z).unwrap();
        let h = 1e-5 * z.norm();
        let fx = (eval_u(&m, z + h).unwrap() - eval_u(&m, z - h).unwrap()) / (2.0 * h);
        let ih = Complex64::new(0.0, h);
        let fy = (eval_u(&m, z + ih).unwrap() - eval_u(&m, z - ih).unwrap()) / (2.0 * h);
        assert!((ux - fx).abs() < 1e-8 && (uy - fy).abs() < 1e-8);
    }

    #[test]
    fn residual_is_second_order() {
        let m = model(3.0, 1, &[(2, 1.0, 0.0)]);
        let z = Complex64::new(0.25, 0.1);
        let right = residual_decay(&m, z, &[1e-2, 5e-3, 2.5e-3], 3.0).unwrap();
        assert!(right.slope().unwrap() >= 1.8, "{right:?}");
        let wrong = residual_decay(&m, z, &[1e-2, 5e-3, 2.5e-3], 5.0).unwrap();
        assert!(
            wrong.slope().unwrap().abs() < 0.5 && wrong.residuals[2] > 1e-2,
            "{wrong:?}"
        );
        // exactly harmonic: everything is rounding noise
        let id = model(2.0, 1, &[(2, 1.0, 0.0)]);
        assert!(residual_decay(&id, z, &[1e-2, 5e-3, 2.5e-3], 2.0)
            .unwrap()
            .fit
            .is_none());
    }

    #[test]
    fn stencil_guards() {
        let m = model(3.0, 1, &[(2, 1.0, 0.0)]);
        assert!(matches!(
            plaplacian_residual(&m, Complex64::new(1e-3, 0.0), 1e-3),
            Err(Error::Stencil(_))
        ));
        assert!(matches!(
            plaplacian_residual(&m, Complex64::new(2.0, 0.0), 1e-3),
            Err(Error::Stencil(_))
        ));
    }

    #[test]
    fn gap_vanishes_for_single_term() {
        let m = model(12.0, 2, &[(3, 0.6, 0.2)]);
        for z in [Complex64::new(0.1, 0.05), Complex64::new(-0.3, 0.2)] {
            assert!(singular_gap(&m, z).unwrap() <= 1e-14);
        }
    }
}
