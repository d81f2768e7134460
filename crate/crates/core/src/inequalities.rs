//! Sampled checks of the scalar and geometric inequalities behind the
//! injectivity of the first-term map and the singular expansion.
//!
//! Exact inequalities are checked with a rounding slack and report their
//! violations; inequalities with an unspecified constant report the observed
//! extreme ratio, plus a shell profile where growth near the origin matters.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::decay::noise_floor;
use crate::error::Result;
use crate::hodograph::{HodographModel, PolarPoint};

/// Relative slack granted to inequalities that hold exactly in real arithmetic.
pub const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest `lhs / rhs` over the sample for an upper bound, smallest for a
    /// lower bound.
    pub extreme_ratio: f64,
}

impl ExactCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRange {
    pub samples: usize,
    pub min: f64,
    pub max: f64,
}

impl RatioRange {
    fn new() -> Self {
        Self {
            samples: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, v: f64) {
        self.samples += 1;
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// `|ρ e^{ikt} - 1| <= k |ρ e^{it} - 1|` for `ρ` log-uniform in
/// `[1e-3, 1e3]`, `t` uniform and `k` in `1..=k_max`.
pub fn check_power_chord<R: Rng + ?Sized>(rng: &mut R, samples: usize, k_max: u32) -> ExactCheck {
    let mut violations = 0;
    let mut worst = 0.0f64;
    for i in 0..samples {
        // every fourth sample sits near the degenerate point ρ = 1, t = 0
        let (rho, t) = if i % 4 == 0 {
            (1.0 + rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3))
        } else {
            (log_uniform(rng, 1e-3, 1e3), rng.random_range(0.0..TAU))
        };
        let k = rng.random_range(1..=k_max) as f64;
        let lhs = (Complex64::from_polar(rho, k * t) - 1.0).norm();
        let rhs = k * (Complex64::from_polar(rho, t) - 1.0).norm();
        if lhs > rhs * (1.0 + ROUNDING_SLACK) + f64::EPSILON * (1.0 + rho) * k {
            violations += 1;
        }
        if rhs > 0.0 {
            worst = worst.max(lhs / rhs);
        }
    }
    ExactCheck {
        samples,
        violations,
        extreme_ratio: worst,
    }
}

/// `|ρ^λ e^{it} - 1| / (ρ^{λ-1} |ρ e^{it} - 1|)`, or `None` at `ρ = 1, t = 0`.
pub fn power_chord_ratio(lambda: f64, rho: f64, t: f64) -> Option<f64> {
    let den = rho.powf(lambda - 1.0) * (Complex64::from_polar(rho, t) - 1.0).norm();
    (den > 0.0).then(|| (Complex64::from_polar(rho.powf(lambda), t) - 1.0).norm() / den)
}

/// Infimum of [`power_chord_ratio`] over `Λ⁻¹ <= ρ <= Λ`: a tensor grid
/// (log-spaced `ρ`, uniform `t`) followed by `random` uniform samples.
pub fn power_chord_infimum<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    big_lambda: f64,
    grid: usize,
    random: usize,
) -> RatioRange {
    let mut range = RatioRange::new();
    let (lo, hi) = (1.0 / big_lambda, big_lambda);
    for i in 0..grid {
        let rho = lo * (hi / lo).powf(i as f64 / (grid - 1) as f64);
        for j in 0..grid {
            if let Some(v) = power_chord_ratio(lambda, rho, TAU * j as f64 / grid as f64) {
                range.push(v);
            }
        }
    }
    for _ in 0..random {
        let rho = log_uniform(rng, lo, hi);
        if let Some(v) = power_chord_ratio(lambda, rho, rng.random_range(0.0..TAU)) {
            range.push(v);
        }
    }
    range
}

fn random_polar<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> PolarPoint {
    PolarPoint::new(log_uniform(rng, lo, hi), rng.random_range(0.0..TAU))
}

/// A pair of points; half the pairs are close to each other, the other half
/// independent.
fn random_pair<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> (PolarPoint, PolarPoint) {
    let xi = random_polar(rng, lo, hi);
    let zeta = if rng.random_bool(0.5) {
        let d = log_uniform(rng, 1e-6, 1.0) * xi.r;
        PolarPoint::from_complex(xi.to_complex() + Complex64::from_polar(d, rng.random_range(0.0..TAU)))
    } else {
        random_polar(rng, lo, hi)
    };
    (xi, zeta)
}

/// `(1 - (2n+1)|ε_{n+1}|) |A_{n+1}|`.
pub fn injectivity_constant(model: &HodographModel) -> f64 {
    let (n, _, eps, _, a) = model.first_term_data();
    (1.0 - (2.0 * n as f64 + 1.0) * eps.abs()) * a
}

/// `|𝔄(ξ) - 𝔄(ζ)| >= C ||ξ|^{λ-1}ξ - |ζ|^{λ-1}ζ|` with
/// [`injectivity_constant`] on random pairs, `|ξ|, |ζ|` in `[1e-4, 10]`.
pub fn check_first_term_injectivity<R: Rng + ?Sized>(
    rng: &mut R,
    model: &HodographModel,
    samples: usize,
) -> ExactCheck {
    let c = injectivity_constant(model);
    let (_, lam, _, _, _) = model.first_term_data();
    let power = |x: PolarPoint| Complex64::from_polar(x.r.powf(lam), x.theta);
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let (xi, zeta) = random_pair(rng, 1e-4, 10.0);
        let lhs = (model.eval_a(xi) - model.eval_a(zeta)).norm();
        let chord = (power(xi) - power(zeta)).norm();
        let scale = model.eval_a(xi).norm().max(model.eval_a(zeta).norm());
        if lhs < c * chord * (1.0 - ROUNDING_SLACK) - 8.0 * f64::EPSILON * scale {
            violations += 1;
        }
        if chord > 0.0 {
            worst = worst.min(lhs / chord);
        }
    }
    ExactCheck {
        samples,
        violations,
        extreme_ratio: worst,
    }
}

/// Range of `|𝔄(ξ) - 𝔄(ζ)| / (|ξ|^{λ-1} |ξ - ζ|)` on random pairs with
/// `Λ⁻¹|ζ| <= |ξ| <= Λ|ζ|`.
pub fn comparable_pair_ratios<R: Rng + ?Sized>(
    rng: &mut R,
    model: &HodographModel,
    big_lambda: f64,
    samples: usize,
) -> RatioRange {
    let (_, lam, _, _, _) = model.first_term_data();
    let mut range = RatioRange::new();
    while range.samples < samples {
        let (xi, zeta) = random_pair(rng, 1e-4, 10.0);
        if xi.r > big_lambda * zeta.r || zeta.r > big_lambda * xi.r {
            continue;
        }
        let d = (xi.to_complex() - zeta.to_complex()).norm();
        if d == 0.0 {
            continue;
        }
        let lhs = (model.eval_a(xi) - model.eval_a(zeta)).norm();
        range.push(lhs / (xi.r.powf(lam - 1.0) * d));
    }
    range
}

/// Maxima and minima of a ratio over concentric shells `|ξ| = r_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellProfile {
    pub radii: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
}

impl ShellProfile {
    fn half(&self) -> usize {
        self.radii.len() / 2
    }

    /// Bounded above as `|ξ| -> 0`: every inner-half maximum is finite and
    /// at most `growth` times the largest outer-half maximum.
    pub fn bounded_above(&self, growth: f64) -> bool {
        let (outer, inner) = self.max.split_at(self.half());
        let reference = outer.iter().copied().fold(0.0, f64::max);
        inner
            .iter()
            .all(|v| v.is_finite() && *v <= growth * reference + f64::MIN_POSITIVE)
    }

    /// Bounded above and bounded away from zero as `|ξ| -> 0`.
    pub fn comparable(&self, growth: f64) -> bool {
        let (outer, inner) = self.min.split_at(self.half());
        let reference = outer.iter().copied().fold(f64::INFINITY, f64::min);
        self.bounded_above(growth) && reference > 0.0 && inner.iter().all(|v| *v * growth >= reference)
    }

    pub fn overall_max(&self) -> f64 {
        self.max.iter().copied().fold(0.0, f64::max)
    }

    pub fn overall_min(&self) -> f64 {
        self.min.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Geometric shells from `outer` inward by factors of two, `angles` points each.
pub fn shell_profile<F>(outer: f64, shells: usize, angles: usize, ratio: F) -> Result<ShellProfile>
where
    F: Fn(PolarPoint) -> Result<f64>,
{
    let mut profile = ShellProfile {
        radii: Vec::with_capacity(shells),
        max: Vec::with_capacity(shells),
        min: Vec::with_capacity(shells),
    };
    for s in 0..shells {
        let r = outer * 0.5f64.powi(s as i32);
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for j in 0..angles {
            // offset so that no shell sample sits on a symmetry axis
            let v = ratio(PolarPoint::new(r, TAU * (j as f64 + 0.37) / angles as f64))?;
            hi = hi.max(v);
            lo = lo.min(v);
        }
        profile.radii.push(r);
        profile.max.push(hi);
        profile.min.push(lo);
    }
    Ok(profile)
}

/// `|diff|`, or zero when it is within rounding of a quantity of size `scale`.
fn above_noise(diff: f64, scale: f64) -> f64 {
    if diff.abs() <= noise_floor(scale) {
        0.0
    } else {
        diff.abs()
    }
}

/// Size of the first-term potential on the circle through `xi`, the scale of
/// its rounding error.
fn potential_scale(model: &HodographModel, xi: PolarPoint) -> f64 {
    let (n, lam, _, mu, a) = model.first_term_data();
    4.0 * (mu * a).abs() * xi.r.powf(n as f64 + lam)
}

/// Shell profiles of the first-term estimates on the certified region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstTermEstimates {
    /// `|ũ - 𝔘̃| / |ξ|^{n+λ_{n+2}}`
    pub potential_error: ShellProfile,
    /// `|H - 𝔄| / |ξ|^{λ_{n+2}}`
    pub map_error: ShellProfile,
    /// `|H| / |ξ|^{λ_{n+1}}`
    pub map_size: ShellProfile,
    /// `|𝔄| / |ξ|^{λ_{n+1}}`
    pub first_term_size: ShellProfile,
}

pub fn first_term_estimates(model: &HodographModel, shells: usize, angles: usize) -> Result<FirstTermEstimates> {
    let n = model.params().n() as f64;
    let lam1 = model.leading().lambda;
    let lam2 = model.second_lambda();
    let outer = model.validity_radius();
    Ok(FirstTermEstimates {
        potential_error: shell_profile(outer, shells, angles, |xi| {
            let u = model.eval_u_tilde(xi)?;
            Ok(above_noise(u - model.eval_u_tilde_first(xi), potential_scale(model, xi)) / xi.r.powf(n + lam2))
        })?,
        map_error: shell_profile(outer, shells, angles, |xi| {
            let h = model.eval_h(xi)?;
            Ok(above_noise((h - model.eval_a(xi)).norm(), h.norm()) / xi.r.powf(lam2))
        })?,
        map_size: shell_profile(outer, shells, angles, |xi| {
            Ok(model.eval_h(xi)?.norm() / xi.r.powf(lam1))
        })?,
        first_term_size: shell_profile(
            outer,
            shells,
            angles,
            |xi| Ok(model.eval_a(xi).norm() / xi.r.powf(lam1)),
        )?,
    })
}

/// Shell profiles along the pairs `ξ`, `ζ = 𝔄⁻¹(H(ξ))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationEstimates {
    /// `|𝔘̃(ξ) - 𝔘̃(ζ)| / (|ξ|^n |𝔄(ξ) - 𝔄(ζ)|)`, where the denominator is nonzero.
    pub potential_lipschitz: ShellProfile,
    /// `|𝔘̃(ξ) - 𝔘̃(ζ)| / |ξ|^{n+λ_{n+2}}`
    pub potential_gap: ShellProfile,
    /// `|ζ| / |ξ|`, the comparability of the pair.
    pub modulus_ratio: ShellProfile,
}

pub fn perturbation_estimates(model: &HodographModel, shells: usize, angles: usize) -> Result<PerturbationEstimates> {
    let n = model.params().n() as f64;
    let lam2 = model.second_lambda();
    let outer = model.validity_radius();
    let pair = |xi: PolarPoint| -> Result<PolarPoint> { model.invert_a(model.eval_h(xi)?) };
    Ok(PerturbationEstimates {
        potential_lipschitz: shell_profile(outer, shells, angles, |xi| {
            let zeta = pair(xi)?;
            let du = above_noise(
                model.eval_u_tilde_first(xi) - model.eval_u_tilde_first(zeta),
                potential_scale(model, xi),
            );
            let da = (model.eval_a(xi) - model.eval_a(zeta)).norm();
            Ok(if da > 0.0 { du / (xi.r.powf(n) * da) } else { 0.0 })
        })?,
        potential_gap: shell_profile(outer, shells, angles, |xi| {
            let zeta = pair(xi)?;
            let du = model.eval_u_tilde_first(xi) - model.eval_u_tilde_first(zeta);
            Ok(above_noise(du, potential_scale(model, xi)) / xi.r.powf(n + lam2))
        })?,
        modulus_ratio: shell_profile(outer, shells, angles, |xi| Ok(pair(xi)?.r / xi.r))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hodograph::CoefficientSet;
    use crate::spectral::ProblemParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model(p: f64, n: u32, coeffs: &[(u32, f64, f64)]) -> HodographModel {
        let set = CoefficientSet::new(
            ProblemParams::new(p, n).unwrap(),
            coeffs.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))).collect(),
        )
        .unwrap();
        HodographModel::new(set).unwrap()
    }

    #[test]
    fn power_chord_small_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = check_power_chord(&mut rng, 10_000, 50);
        assert!(c.holds() && c.extreme_ratio <= 1.0 + 1e-12);
        // k = 1 is an identity, λ = 1 makes the ratio identically one
        assert_eq!(power_chord_ratio(1.0, 2.0, 0.3), Some(1.0));
        assert_eq!(power_chord_ratio(2.0, 1.0, 0.0), None);
        // near the removable point the ratio tends to a value between min(λ,1) and max(λ,1)
        let v = power_chord_ratio(0.5, 1.0 + 1e-7, 1e-7).unwrap();
        assert!((0.5..=1.0).contains(&v));
    }

    #[test]
    fn power_chord_infimum_is_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for lam in [0.5, 1.37, 2.2] {
            let r = power_chord_infimum(&mut rng, lam, 4.0, 200, 10_000);
            assert!(r.min >= 1e-6, "{lam} {r:?}");
        }
    }

    #[test]
    fn injectivity_on_first_term() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = model(12.0, 2, &[(3, 0.3, -0.7)]);
        let c = check_first_term_injectivity(&mut rng, &m, 5_000);
        assert!(c.holds(), "{c:?}");
        assert!(c.extreme_ratio >= injectivity_constant(&m) * (1.0 - 1e-9));
        let r = comparable_pair_ratios(&mut rng, &m, 4.0, 5_000);
        assert!(r.min > 0.0 && r.max.is_finite());
    }

    #[test]
    fn first_term_estimates_are_bounded() {
        let m = model(3.0, 1, &[(2, 1.0, 0.0), (3, 0.05, 0.02), (4, -0.01, 0.0)]);
        let e = first_term_estimates(&m, 12, 64).unwrap();
        assert!(e.potential_error.bounded_above(4.0));
        assert!(e.map_error.bounded_above(4.0));
        assert!(e.map_size.comparable(4.0));
        assert!(e.first_term_size.comparable(4.0));
        let pe = perturbation_estimates(&m, 12, 64).unwrap();
        assert!(pe.potential_lipschitz.bounded_above(4.0));
        assert!(pe.potential_gap.bounded_above(4.0));
        assert!(pe.modulus_ratio.comparable(4.0));
    }

    #[test]
    fn single_term_profiles_vanish() {
        let m = model(12.0, 1, &[(2, 0.8, 0.3)]);
        let e = first_term_estimates(&m, 12, 32).unwrap();
        assert_eq!(e.map_error.overall_max(), 0.0);
        assert_eq!(e.potential_error.overall_max(), 0.0);
        let pe = perturbation_estimates(&m, 12, 32).unwrap();
        assert_eq!(pe.potential_gap.overall_max(), 0.0);
        assert!(pe.potential_gap.bounded_above(4.0));
    }

    #[test]
    fn profile_detects_growth() {
        let p = shell_profile(1.0, 10, 8, |xi| Ok(1.0 / xi.r)).unwrap();
        assert!(!p.bounded_above(4.0));
        let p = shell_profile(1.0, 10, 8, |xi| Ok(xi.r)).unwrap();
        assert!(p.bounded_above(4.0) && !p.comparable(4.0));
    }
}
