//! The hodographic representation of a p-harmonic function near a critical
//! point.
//!
//! A finite coefficient list `A_k` (with `k >= n + 1`) defines the map
//!
//! ```text
//! H(r e^{iθ}) = e^{-inθ} Σ_k r^{λ_k} (A_k e^{ikθ} + ε_k conj(A_k) e^{-ikθ})
//! ```
//!
//! from the hodographic plane (coordinate `ξ`) to the physical plane
//! (coordinate `z`), together with the potential
//! `ũ(ξ) = 4 Σ_k μ_k |ξ|^{n+λ_k} Re(A_k (ξ/|ξ|)^k)`. The function
//! `u = ũ ∘ H⁻¹` is p-harmonic with complex gradient `ξ^n`.
//!
//! The leading term alone gives the first-term map `𝔄` and potential `𝔘̃`.
//! `𝔄` is a global bijection that is inverted constructively (angle first,
//! then modulus); `H` is inverted by Newton iteration seeded from `𝔄⁻¹`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{spectral_triple, ProblemParams, SpectralTriple};

/// Number of samples of the angular map used to bracket `𝔄⁻¹`.
pub const ANGLE_TABLE_SIZE: usize = 4096;
/// Upper end of the radius calibration scan.
pub const SCAN_UPPER: f64 = 1.0;
/// Lower end of the radius calibration scan.
pub const SCAN_LOWER: f64 = 1e-6;
pub const SCAN_PER_DECADE: usize = 64;
pub const SCAN_ANGLES: usize = 512;

const NEWTON_MAX_ITERS: usize = 50;
const NEWTON_REL_TOL: f64 = 1e-12;

/// A point of the hodographic plane in polar form, `θ ∈ [0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Self {
        debug_assert!(r >= 0.0);
        let mut t = theta.rem_euclid(TAU);
        if t >= TAU {
            t = 0.0;
        }
        Self { r, theta: t }
    }

    pub fn origin() -> Self {
        Self { r: 0.0, theta: 0.0 }
    }

    pub fn from_complex(xi: Complex64) -> Self {
        let r = xi.norm();
        if r == 0.0 {
            Self::origin()
        } else {
            Self::new(r, xi.arg())
        }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }
}

/// Finite list of hodographic coefficients, sorted by ascending `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet {
    params: ProblemParams,
    coeffs: Vec<(u32, Complex64)>,
}

impl CoefficientSet {
    pub fn new(params: ProblemParams, mut coeffs: Vec<(u32, Complex64)>) -> Result<Self> {
        let n = params.n();
        coeffs.sort_by_key(|&(k, _)| k);
        for w in coeffs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidCoefficients(format!("index {} repeated", w[0].0)));
            }
        }
        for &(k, a) in &coeffs {
            if k <= n {
                return Err(Error::InvalidCoefficients(format!(
                    "index {k} must be at least n + 1 = {}",
                    n + 1
                )));
            }
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(Error::InvalidCoefficients(format!("A_{k} is not finite")));
            }
        }
        match coeffs.first() {
            Some(&(k, a)) if k == n + 1 && a.norm() > 0.0 => {}
            _ => {
                return Err(Error::InvalidCoefficients(format!(
                    "A_{} must be present and nonzero",
                    n + 1
                )))
            }
        }
        Ok(Self { params, coeffs })
    }

    /// The single-term set `{A_{n+1} = a}`.
    pub fn single(params: ProblemParams, a: Complex64) -> Result<Self> {
        Self::new(params, vec![(params.n() + 1, a)])
    }

    pub fn params(&self) -> ProblemParams {
        self.params
    }

    pub fn coeffs(&self) -> &[(u32, Complex64)] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[0].1
    }

    /// `Σ k |A_k|^2`, recorded for diagnostics.
    pub fn weighted_energy(&self) -> f64 {
        self.coeffs.iter().map(|&(k, a)| k as f64 * a.norm_sqr()).sum()
    }

    pub fn is_single_term(&self) -> bool {
        self.coeffs[1..].iter().all(|(_, a)| a.norm() == 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Term {
    k: f64,
    a: Complex64,
    lambda: f64,
    epsilon: f64,
    mu: f64,
}

/// The leading term of the series after rotating `A_{n+1}` to the positive
/// real axis, with precomputed angular table for inversion.
#[derive(Debug, Clone)]
struct FirstTerm {
    n: f64,
    lambda: f64,
    epsilon: f64,
    mu: f64,
    /// `|A_{n+1}|`
    modulus: f64,
    /// `arg A_{n+1}`
    phase: f64,
    /// `f(θ_i)` for `θ_i = 2π i / ANGLE_TABLE_SIZE`, `i = 0..=ANGLE_TABLE_SIZE`.
    table: Vec<f64>,
}

impl FirstTerm {
    fn new(n: u32, t: &SpectralTriple, a: Complex64) -> Self {
        let mut ft = Self {
            n: n as f64,
            lambda: t.lambda,
            epsilon: t.epsilon,
            mu: t.mu,
            modulus: a.norm(),
            phase: a.arg(),
            table: Vec::new(),
        };
        ft.table = (0..=ANGLE_TABLE_SIZE)
            .map(|i| ft.f(TAU * i as f64 / ANGLE_TABLE_SIZE as f64))
            .collect();
        ft
    }

    #[inline]
    fn freq(&self) -> f64 {
        2.0 * (self.n + 1.0)
    }

    fn m(&self, theta: f64) -> f64 {
        let e = self.epsilon;
        (1.0 + e * e + 2.0 * e * (self.freq() * theta).cos()).sqrt()
    }

    fn f(&self, theta: f64) -> f64 {
        let (s, c) = (self.freq() * theta).sin_cos();
        theta + (-self.epsilon * s).atan2(1.0 + self.epsilon * c)
    }

    fn j(&self, theta: f64) -> f64 {
        let (n, e) = (self.n, self.epsilon);
        1.0 - (2.0 * n + 1.0) * e * e - 2.0 * n * e * (self.freq() * theta).cos()
    }

    /// Unit-coefficient map `𝔄₁(r e^{iθ}) = r^λ (e^{iθ} + ε e^{-i(2n+1)θ})`.
    fn eval_unit(&self, xi: PolarPoint) -> Complex64 {
        if xi.r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let rl = xi.r.powf(self.lambda);
        let lead = Complex64::from_polar(1.0, xi.theta);
        let back = Complex64::from_polar(self.epsilon, -(2.0 * self.n + 1.0) * xi.theta);
        (lead + back) * rl
    }

    /// Rotation that maps the reduced frame back: `ξ = ξ₁ e^{-iφ/(n+1)}`.
    #[inline]
    fn frame_shift(&self) -> f64 {
        self.phase / (self.n + 1.0)
    }

    /// Solves `𝔄₁(ξ) = w` by locating `f(θ) ≡ arg w (mod 2π)` and then
    /// `r^λ m(θ) = |w|`.
    fn invert_unit(&self, w: Complex64) -> Result<PolarPoint> {
        let s = w.norm();
        if s == 0.0 {
            return Ok(PolarPoint::origin());
        }
        let t = w.arg().rem_euclid(TAU);
        let mut best: Option<(f64, PolarPoint)> = None;
        for shift in [-TAU, 0.0, TAU] {
            let target = t + shift;
            for i in 0..ANGLE_TABLE_SIZE {
                let (g0, g1) = (self.table[i] - target, self.table[i + 1] - target);
                if g0 == 0.0 || g0.signum() != g1.signum() && g1 != 0.0 {
                    let lo = TAU * i as f64 / ANGLE_TABLE_SIZE as f64;
                    let hi = TAU * (i + 1) as f64 / ANGLE_TABLE_SIZE as f64;
                    let theta = if g0 == 0.0 { lo } else { self.bisect(lo, hi, target, g0) };
                    let r = (s / self.m(theta)).powf(1.0 / self.lambda);
                    let cand = PolarPoint::new(r, theta);
                    let miss = (self.eval_unit(cand) - w).norm();
                    if best.is_none_or(|(d, _)| miss < d) {
                        best = Some((miss, cand));
                    }
                }
            }
        }
        best.map(|(_, p)| p).ok_or(Error::NoBracket(t))
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, target: f64, g_lo: f64) -> f64 {
        let lo_negative = g_lo < 0.0;
        for _ in 0..64 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let g = self.f(mid) - target;
            if g == 0.0 {
                return mid;
            }
            if (g < 0.0) == lo_negative {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// A coefficient set with its spectral data and certified radius.
#[derive(Debug, Clone)]
pub struct HodographModel {
    coeffset: CoefficientSet,
    spectral: Vec<SpectralTriple>,
    terms: Vec<Term>,
    first: FirstTerm,
    validity_radius: f64,
    plane_radius: f64,
}

impl HodographModel {
    /// Builds the model and certifies its radius with [`calibrate_radius`].
    pub fn new(coeffset: CoefficientSet) -> Result<Self> {
        let mut model = Self::uncalibrated(coeffset)?;
        model.validity_radius = model.scan_radius()?;
        model.plane_radius = model.compute_plane_radius();
        Ok(model)
    }

    /// Builds the model with a caller-chosen hodographic radius, skipping
    /// the calibration scan.
    pub fn with_radius(coeffset: CoefficientSet, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParams(format!("radius must be positive, got {radius}")));
        }
        let mut model = Self::uncalibrated(coeffset)?;
        model.validity_radius = radius;
        model.plane_radius = model.compute_plane_radius();
        Ok(model)
    }

    fn uncalibrated(coeffset: CoefficientSet) -> Result<Self> {
        let params = coeffset.params();
        let spectral = coeffset
            .coeffs()
            .iter()
            .map(|&(k, _)| spectral_triple(params, k))
            .collect::<Result<Vec<_>>>()?;
        let terms = coeffset
            .coeffs()
            .iter()
            .zip(&spectral)
            .map(|(&(k, a), t)| Term {
                k: k as f64,
                a,
                lambda: t.lambda,
                epsilon: t.epsilon,
                mu: t.mu,
            })
            .collect();
        let first = FirstTerm::new(params.n(), &spectral[0], coeffset.leading());
        Ok(Self {
            coeffset,
            spectral,
            terms,
            first,
            validity_radius: f64::INFINITY,
            plane_radius: f64::INFINITY,
        })
    }

    pub fn params(&self) -> ProblemParams {
        self.coeffset.params()
    }

    pub fn coeffset(&self) -> &CoefficientSet {
        &self.coeffset
    }

    pub fn spectral(&self) -> &[SpectralTriple] {
        &self.spectral
    }

    /// Certified hodographic radius.
    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    /// Radius of a physical-plane disc around 0 whose points all have
    /// preimages inside the certified hodographic region.
    pub fn plane_radius(&self) -> f64 {
        self.plane_radius
    }

    pub fn leading(&self) -> SpectralTriple {
        self.spectral[0]
    }

    /// `λ_{n+2}`, whether or not `A_{n+2}` is present.
    pub fn second_lambda(&self) -> f64 {
        let p = self.params();
        spectral_triple(p, p.n() + 2).map(|t| t.lambda).expect("n + 2 > n")
    }

    fn check_radius(&self, r: f64) -> Result<()> {
        if r > self.validity_radius * (1.0 + 1e-12) {
            Err(Error::OutsideRegion {
                r,
                limit: self.validity_radius,
            })
        } else {
            Ok(())
        }
    }

    fn h_raw(&self, xi: PolarPoint) -> Complex64 {
        if xi.r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let n = self.params().n() as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            let e = Complex64::from_polar(1.0, t.k * xi.theta);
            let phi = t.a * e + t.epsilon * t.a.conj() * e.conj();
            acc += phi * xi.r.powf(t.lambda);
        }
        acc * Complex64::from_polar(1.0, -n * xi.theta)
    }

    fn h_with_partials(&self, xi: PolarPoint) -> (Complex64, Complex64, Complex64) {
        let n = self.params().n() as f64;
        let i = Complex64::i();
        let (mut h, mut hr, mut ht) = (Complex64::default(), Complex64::default(), Complex64::default());
        for t in &self.terms {
            let e = Complex64::from_polar(1.0, t.k * xi.theta);
            let fwd = t.a * e;
            let bwd = t.epsilon * t.a.conj() * e.conj();
            let phi = fwd + bwd;
            let dphi = i * t.k * (fwd - bwd);
            let rl = xi.r.powf(t.lambda);
            h += phi * rl;
            hr += phi * (t.lambda * rl / xi.r);
            ht += (dphi - i * n * phi) * rl;
        }
        let rot = Complex64::from_polar(1.0, -n * xi.theta);
        (h * rot, hr * rot, ht * rot)
    }

    pub fn eval_h(&self, xi: PolarPoint) -> Result<Complex64> {
        self.check_radius(xi.r)?;
        Ok(self.h_raw(xi))
    }

    /// `(∂H/∂r, ∂H/∂θ)` by termwise differentiation.
    pub fn eval_h_partials(&self, xi: PolarPoint) -> Result<(Complex64, Complex64)> {
        if xi.r == 0.0 {
            return Err(Error::AtOrigin);
        }
        self.check_radius(xi.r)?;
        let (_, hr, ht) = self.h_with_partials(xi);
        Ok((hr, ht))
    }

    /// Determinant of the real differential of `H`.
    pub fn jacobian_h(&self, xi: PolarPoint) -> Result<f64> {
        let (hr, ht) = self.eval_h_partials(xi)?;
        Ok((hr.conj() * ht).im / xi.r)
    }

    fn u_tilde_raw(&self, xi: PolarPoint) -> f64 {
        if xi.r == 0.0 {
            return 0.0;
        }
        let n = self.params().n() as f64;
        self.terms
            .iter()
            .map(|t| 4.0 * t.mu * xi.r.powf(n + t.lambda) * (t.a * Complex64::from_polar(1.0, t.k * xi.theta)).re)
            .sum()
    }

    /// Hodographic potential `ũ`, normalized so `ũ(0) = 0`.
    pub fn eval_u_tilde(&self, xi: PolarPoint) -> Result<f64> {
        self.check_radius(xi.r)?;
        Ok(self.u_tilde_raw(xi))
    }

    /// Leading term `𝔘̃(ξ) = 4μ_{n+1} |ξ|^{n+λ} Re(A_{n+1} (ξ/|ξ|)^{n+1})`.
    pub fn eval_u_tilde_first(&self, xi: PolarPoint) -> f64 {
        if xi.r == 0.0 {
            return 0.0;
        }
        let t = &self.terms[0];
        let n = self.params().n() as f64;
        4.0 * t.mu * xi.r.powf(n + t.lambda) * (t.a * Complex64::from_polar(1.0, t.k * xi.theta)).re
    }

    /// First-term map `𝔄(ξ) = r^λ e^{iθ}(A + ε conj(A) e^{-2i(n+1)θ})`.
    pub fn eval_a(&self, xi: PolarPoint) -> Complex64 {
        if xi.r == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let t = &self.terms[0];
        let back = Complex64::from_polar(t.epsilon, -self.first.freq() * xi.theta);
        xi.r.powf(t.lambda) * Complex64::from_polar(1.0, xi.theta) * (t.a + t.a.conj() * back)
    }

    /// `m(θ) = |1 + ε e^{-2i(n+1)θ}|` in the unit-coefficient frame.
    pub fn m_theta(&self, theta: f64) -> f64 {
        self.first.m(theta)
    }

    /// `f(θ) = θ + arg(1 + ε e^{-2i(n+1)θ})` in the unit-coefficient frame.
    pub fn f_theta(&self, theta: f64) -> f64 {
        self.first.f(theta)
    }

    /// `j(θ) = 1 - (2n+1)ε² - 2nε cos(2(n+1)θ)`.
    pub fn j_theta(&self, theta: f64) -> f64 {
        self.first.j(theta)
    }

    /// Jacobian of `𝔄`: `|A|² λ r^{2(λ-1)} j(θ + arg A/(n+1))`.
    pub fn jacobian_a(&self, xi: PolarPoint) -> Result<f64> {
        let ft = &self.first;
        if xi.r == 0.0 {
            if ft.lambda < 1.0 {
                return Err(Error::AtOrigin);
            }
            if ft.lambda > 1.0 {
                return Ok(0.0);
            }
        }
        let rfac = if ft.lambda == 1.0 {
            1.0
        } else {
            xi.r.powf(2.0 * (ft.lambda - 1.0))
        };
        Ok(ft.modulus * ft.modulus * ft.lambda * rfac * ft.j(xi.theta + ft.frame_shift()))
    }

    /// Constructive inverse of `𝔄`, via the reduction to `A_{n+1} = 1`:
    /// `𝔄(ξ₁ e^{-iφ/(n+1)}) = |A| e^{iφn/(n+1)} 𝔄₁(ξ₁)` with `φ = arg A_{n+1}`.
    pub fn invert_a(&self, w: Complex64) -> Result<PolarPoint> {
        let ft = &self.first;
        if w.norm() == 0.0 {
            return Ok(PolarPoint::origin());
        }
        let unrotated = w * Complex64::from_polar(1.0 / ft.modulus, -ft.phase * ft.n / (ft.n + 1.0));
        let xi1 = ft.invert_unit(unrotated)?;
        Ok(PolarPoint::new(xi1.r, xi1.theta - ft.frame_shift()))
    }

    /// Inverse of `H` by damped Newton iteration on `(r, θ)` seeded at `𝔄⁻¹(z)`.
    pub fn invert_h(&self, z: Complex64) -> Result<PolarPoint> {
        let scale = z.norm();
        if scale == 0.0 {
            return Ok(PolarPoint::origin());
        }
        let tol = NEWTON_REL_TOL * scale;
        let mut xi = self.invert_a(z)?;
        let mut res = (self.h_raw(xi) - z).norm();
        let mut converged_at = None;
        for it in 0..NEWTON_MAX_ITERS {
            if res <= tol && converged_at.is_none() {
                converged_at = Some(it);
            }
            // polish up to two further steps once within tolerance
            if let Some(c) = converged_at {
                if it >= c + 2 || res <= 2.0 * f64::EPSILON * scale {
                    break;
                }
            }
            let (h, hr, ht) = self.h_with_partials(xi);
            let f = h - z;
            let det = hr.re * ht.im - ht.re * hr.im;
            let norm = hr.norm() * ht.norm();
            if !(det.abs() > 1e-14 * norm) || !det.is_finite() {
                return Err(Error::SingularDifferential {
                    r: xi.r,
                    theta: xi.theta,
                });
            }
            let dr = -(ht.im * f.re - ht.re * f.im) / det;
            let dt = -(-hr.im * f.re + hr.re * f.im) / det;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let r_new = xi.r + step * dr;
                if r_new > 0.0 {
                    let cand = PolarPoint::new(r_new, xi.theta + step * dt);
                    let cres = (self.h_raw(cand) - z).norm();
                    if cres < res {
                        xi = cand;
                        res = cres;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                if converged_at.is_some() {
                    break;
                }
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: res,
                    last: xi,
                });
            }
        }
        if res > tol {
            return Err(Error::NoConvergence {
                iterations: NEWTON_MAX_ITERS,
                residual: res,
                last: xi,
            });
        }
        self.check_radius(xi.r)?;
        Ok(xi)
    }

    /// The (p, n)-scan radii, ascending.
    pub fn scan_radii() -> Vec<f64> {
        let decades = (SCAN_UPPER / SCAN_LOWER).log10();
        let count = (decades * SCAN_PER_DECADE as f64).round() as usize;
        (0..=count)
            .map(|i| SCAN_LOWER * 10f64.powf(i as f64 / SCAN_PER_DECADE as f64))
            .map(|r| r.min(SCAN_UPPER))
            .collect()
    }

    fn radius_admissible(&self, r: f64) -> bool {
        let lead = self.first.modulus * (1.0 - self.first.epsilon.abs()) * r.powf(self.first.lambda);
        let tail: f64 = self.terms[1..].iter().map(|t| t.a.norm() * r.powf(t.lambda)).sum();
        if tail > 0.5 * lead {
            return false;
        }
        (0..SCAN_ANGLES).all(|i| {
            let xi = PolarPoint::new(r, TAU * i as f64 / SCAN_ANGLES as f64);
            let (_, hr, ht) = self.h_with_partials(xi);
            (hr.conj() * ht).im / r > 0.0
        })
    }

    fn scan_radius(&self) -> Result<f64> {
        let mut last = None;
        for r in Self::scan_radii() {
            if self.radius_admissible(r) {
                last = Some(r);
            } else {
                break;
            }
        }
        last.ok_or(Error::CalibrationFailed)
    }

    fn compute_plane_radius(&self) -> f64 {
        let r = self.validity_radius;
        let min_boundary = (0..SCAN_ANGLES)
            .map(|i| {
                self.h_raw(PolarPoint::new(r, TAU * i as f64 / SCAN_ANGLES as f64))
                    .norm()
            })
            .fold(f64::INFINITY, f64::min);
        0.95 * min_boundary
    }

    /// Boundary of the hodographic disc `𝔄⁻¹(D_R)` along direction `θ`.
    pub fn hodographic_boundary(&self, big_r: f64, theta: f64) -> f64 {
        let ft = &self.first;
        (big_r / (ft.modulus * ft.m(theta + ft.frame_shift()))).powf(1.0 / ft.lambda)
    }

    /// `(n, λ_{n+1}, ε_{n+1}, μ_{n+1}, |A_{n+1}|)`.
    pub(crate) fn first_term_data(&self) -> (u32, f64, f64, f64, f64) {
        let ft = &self.first;
        (self.params().n(), ft.lambda, ft.epsilon, ft.mu, ft.modulus)
    }
}

/// Largest scanned radius `R` such that on `0 < r <= R` the Jacobian of `H`
/// is positive and the tail `Σ_{k>=n+2} |A_k| r^{λ_k}` stays below
/// `½ |A_{n+1}| (1 - |ε_{n+1}|) r^{λ_{n+1}}`.
pub fn calibrate_radius(coeffset: &CoefficientSet) -> Result<f64> {
    HodographModel::uncalibrated(coeffset.clone())?.scan_radius()
}

/// Wraps an angle difference into `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}
