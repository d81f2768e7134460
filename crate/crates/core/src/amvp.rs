//! Disc statistics, asymptotic mean value residuals, and the hodographic
//! disc quadrature for the first-term function.
//!
//! For a disc `D(c, r)` the residual with weight `α` is
//!
//! ```text
//! α · (sup_D f + inf_D f) / 2 + (1 - α) · mean_D f - f(c)
//! ```
//!
//! and the property under test is that it is `o(r²)` as `r -> 0`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::decay::{decay_fit, decay_fit_above, noise_floor, DecayFit};
use crate::error::{Error, Result};
use crate::hodograph::HodographModel;
use crate::quadrature::{gauss_legendre, gauss_legendre_on};

/// Smallest accepted disc resolution.
pub const MIN_RESOLUTION: usize = 16;
/// Angular samples per radial node.
const ANGULAR_FACTOR: usize = 4;
/// Local-maximum cells refined per extremum search.
const MAX_CANDIDATES: usize = 8;
/// Refinement stops once the search window is below this fraction of the radius.
const REFINE_STOP: f64 = 1e-8;
const MAX_REFINE_ROUNDS: usize = 24;
/// Points per axis in one refinement round; the window shrinks 4x per round.
const REFINE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscStats {
    pub center: Complex64,
    pub radius: f64,
    pub sup: f64,
    pub inf: f64,
    pub mean: f64,
}

impl DiscStats {
    pub fn midrange(&self) -> f64 {
        0.5 * (self.sup + self.inf)
    }
}

/// Sup, inf and mean of `f` over the closed disc `D(center, radius)`.
///
/// The mean uses Gauss-Legendre in the radius (with the polar area weight)
/// and the trapezoid rule in angle, `resolution` radial nodes and
/// `4 * resolution` angles. Sup and inf start from the same samples plus the
/// boundary circle and the center, and every sufficiently high local
/// extremum cell is refined on shrinking polar windows.
pub fn disc_stats<F>(f: F, center: Complex64, radius: f64, resolution: usize) -> Result<DiscStats>
where
    F: Fn(Complex64) -> Result<f64>,
{
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParams(format!(
            "disc resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParams(format!(
            "disc radius must be positive, got {radius}"
        )));
    }
    let eval = |rho: f64, phi: f64| {
        let z = center + Complex64::from_polar(rho, phi);
        f(z).map_err(|e| Error::at(z, e))
    };

    let (x, w) = gauss_legendre(resolution);
    let nodes: Vec<f64> = x.iter().map(|t| 0.5 * radius * (1.0 + t)).collect();
    let weights: Vec<f64> = w.iter().map(|v| 0.5 * radius * v).collect();
    let m = ANGULAR_FACTOR * resolution;
    let angles: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();

    // levels: center, quadrature nodes, boundary
    let mut levels = Vec::with_capacity(resolution + 2);
    levels.push(0.0);
    levels.extend_from_slice(&nodes);
    levels.push(radius);

    let center_value = eval(0.0, 0.0)?;
    let mut grid = vec![vec![center_value; m]];
    for &rho in &levels[1..] {
        grid.push(angles.iter().map(|&phi| eval(rho, phi)).collect::<Result<Vec<_>>>()?);
    }

    let mut acc = 0.0;
    for (i, (&rho, &wt)) in nodes.iter().zip(&weights).enumerate() {
        let ring: f64 = grid[i + 1].iter().sum();
        acc += wt * rho * ring;
    }
    let mean = acc * (TAU / m as f64) / (PI * radius * radius);

    let search = Search {
        eval: &eval,
        levels: &levels,
        grid: &grid,
        radius,
        dphi: TAU / m as f64,
    };
    let sup = search.extremum(1.0)?;
    let inf = -search.extremum(-1.0)?;
    Ok(DiscStats {
        center,
        radius,
        sup,
        inf,
        mean,
    })
}

struct Search<'a, E> {
    eval: &'a E,
    levels: &'a [f64],
    grid: &'a [Vec<f64>],
    radius: f64,
    dphi: f64,
}

impl<E> Search<'_, E>
where
    E: Fn(f64, f64) -> Result<f64>,
{
    /// Maximum of `sign * f`.
    fn extremum(&self, sign: f64) -> Result<f64> {
        let m = self.grid[0].len();
        let val = |l: usize, j: usize| sign * self.grid[l][j % m];
        let top = self.levels.len() - 1;
        let mut cands: Vec<(f64, usize, usize)> = Vec::new();
        let mut lo = f64::INFINITY;
        for l in 0..=top {
            let js = if l == 0 { 1 } else { m };
            for j in 0..js {
                let v = val(l, j);
                lo = lo.min(v);
                let mut is_max = true;
                for dl in [-1i64, 0, 1] {
                    let ll = l as i64 + dl;
                    if ll < 0 || ll > top as i64 {
                        continue;
                    }
                    let ll = ll as usize;
                    if l == 0 && ll == 0 {
                        continue;
                    }
                    let neighbours: Vec<usize> = if ll == 0 {
                        vec![0]
                    } else if l == 0 {
                        (0..m).collect()
                    } else {
                        vec![(j + m - 1) % m, j, (j + 1) % m]
                    };
                    for jj in neighbours {
                        if (ll, jj) != (l, j) && val(ll, jj) > v {
                            is_max = false;
                        }
                    }
                }
                if is_max {
                    cands.push((v, l, j));
                }
            }
        }
        cands.sort_by(|a, b| b.0.total_cmp(&a.0));
        let hi = cands[0].0;
        let cut = hi - 0.5 * (hi - lo);
        let mut best = hi;
        for &(v, l, j) in cands.iter().take(MAX_CANDIDATES) {
            if v < cut {
                break;
            }
            best = best.max(self.refine(sign, l, j, v)?);
        }
        Ok(best)
    }

    fn refine(&self, sign: f64, level: usize, j: usize, start: f64) -> Result<f64> {
        let mut rho = self.levels[level];
        let mut phi = self.dphi * j as f64;
        let top = self.levels.len() - 1;
        let below = if level > 0 { rho - self.levels[level - 1] } else { 0.0 };
        let above = if level < top { self.levels[level + 1] - rho } else { 0.0 };
        let mut h_rho = below.max(above);
        let mut h_phi = if level == 0 { PI } else { self.dphi };
        let mut best = start;
        let half = (REFINE_POINTS - 1) / 2;
        for _ in 0..MAX_REFINE_ROUNDS {
            let on_boundary = rho >= self.radius && h_rho <= 1e-3 * self.radius;
            let (c_rho, c_phi) = (rho, phi);
            let rho_lo = (c_rho - h_rho).max(0.0);
            let rho_hi = (c_rho + h_rho).min(self.radius);
            let radial: Vec<f64> = if on_boundary {
                vec![self.radius]
            } else {
                (0..REFINE_POINTS)
                    .map(|i| rho_lo + (rho_hi - rho_lo) * i as f64 / (REFINE_POINTS - 1) as f64)
                    .collect()
            };
            for &r in &radial {
                for i in 0..REFINE_POINTS {
                    let a = c_phi + h_phi * (i as f64 - half as f64) / half as f64;
                    let v = sign * (self.eval)(r, a)?;
                    if v > best {
                        best = v;
                        rho = r;
                        phi = a;
                    }
                }
            }
            h_rho *= 0.25;
            h_phi *= 0.25;
            if h_rho.max(h_phi * self.radius) <= REFINE_STOP * self.radius {
                break;
            }
        }
        Ok(best)
    }
}

/// `α (sup + inf)/2 + (1 - α) mean - f(center)` from precomputed statistics.
pub fn residual_from_stats(stats: &DiscStats, center_value: f64, alpha: f64) -> f64 {
    alpha * stats.midrange() + (1.0 - alpha) * stats.mean - center_value
}

pub fn amvp_residual<F>(f: F, center: Complex64, radius: f64, alpha: f64, resolution: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let stats = disc_stats(&f, center, radius, resolution)?;
    let c = f(center).map_err(|e| Error::at(center, e))?;
    Ok(residual_from_stats(&stats, c, alpha))
}

/// `r0 · 2^{-j}` for `j = 0..rungs`.
pub fn ladder_radii(r0: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|j| r0 * 0.5f64.powi(j as i32)).collect()
}

/// Disc statistics at one radius of a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rung {
    pub stats: DiscStats,
    pub center_value: f64,
}

impl Rung {
    pub fn radius(&self) -> f64 {
        self.stats.radius
    }

    pub fn residual(&self, alpha: f64) -> f64 {
        residual_from_stats(&self.stats, self.center_value, alpha)
    }

    /// Magnitude of the field on the disc, for the noise floor.
    pub fn scale(&self) -> f64 {
        self.stats
            .sup
            .abs()
            .max(self.stats.inf.abs())
            .max(self.center_value.abs())
    }

    pub fn floor(&self) -> f64 {
        noise_floor(self.scale())
    }
}

/// Disc statistics over a radii ladder, evaluated in parallel and returned
/// in ladder order.
pub fn rung_ladder<F>(f: F, center: Complex64, radii: &[f64], resolution: usize) -> Result<Vec<Rung>>
where
    F: Fn(Complex64) -> Result<f64> + Sync,
{
    let center_value = f(center).map_err(|e| Error::at(center, e))?;
    radii
        .par_iter()
        .map(|&r| disc_stats(&f, center, r, resolution).map(|stats| Rung { stats, center_value }))
        .collect()
}

/// Decay of the residual with weight `alpha` along a ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecayOutcome {
    Fitted(DecayFit),
    /// Fewer than three rungs rose above the noise floor.
    Vanishing {
        max_relative: f64,
        points_above_floor: usize,
    },
}

impl DecayOutcome {
    pub fn slope(&self) -> Option<f64> {
        match self {
            DecayOutcome::Fitted(f) => Some(f.slope),
            DecayOutcome::Vanishing { .. } => None,
        }
    }
}

pub fn fit_ladder(rungs: &[Rung], alpha: f64) -> Result<DecayOutcome> {
    let radii: Vec<f64> = rungs.iter().map(Rung::radius).collect();
    let values: Vec<f64> = rungs.iter().map(|r| r.residual(alpha).abs()).collect();
    let floors: Vec<f64> = rungs.iter().map(Rung::floor).collect();
    let above = values.iter().zip(&floors).filter(|(v, f)| v > f).count();
    if above < 3 {
        let max_relative = rungs
            .iter()
            .zip(&values)
            .map(|(r, v)| if r.scale() > 0.0 { v / r.scale() } else { *v })
            .fold(0.0, f64::max);
        return Ok(DecayOutcome::Vanishing {
            max_relative,
            points_above_floor: above,
        });
    }
    decay_fit_above(&radii, &values, &floors).map(DecayOutcome::Fitted)
}

/// The preimage `𝔄⁻¹(D_R)`, described in polar form by `r < boundary(θ)`.
#[derive(Debug, Clone, Copy)]
pub struct HodographicDisc<'a> {
    model: &'a HodographModel,
    pub radius: f64,
}

impl<'a> HodographicDisc<'a> {
    pub fn new(model: &'a HodographModel, radius: f64) -> Self {
        Self { model, radius }
    }

    /// `(R / (|A| m(θ')))^{1/λ}` with `θ'` the unit-coefficient frame angle.
    pub fn boundary(&self, theta: f64) -> f64 {
        self.model.hodographic_boundary(self.radius, theta)
    }
}

/// Magnitude scale `4 μ |A| (R/|A|)^{(n+λ)/λ}` of `𝔘` on `D_R`.
pub fn first_term_scale(model: &HodographModel, big_r: f64) -> f64 {
    let (n, lam, _, mu, a) = model.first_term_data();
    4.0 * mu * a * (big_r / a).powf((n as f64 + lam) / lam)
}

/// `(sup_{D_R} 𝔘 + inf_{D_R} 𝔘, ∫_{D_R} 𝔘)` computed in the hodographic
/// plane.
///
/// In the unit-coefficient frame `𝔘̃ = 4μ|A| r^{n+λ} cos((n+1)θ)` is
/// monotone along rays, so sup and inf are taken along the boundary
/// `r(θ) = (R/(|A| m(θ)))^{1/λ}`. The integral is
/// `4μλ|A|³ ∫∫ r^{n+3λ-1} cos((n+1)θ) j(θ) dr dθ` over `r < r(θ)`, using
/// Gauss-Legendre in `r` and the trapezoid rule in `θ`.
pub fn hodographic_su_mu(model: &HodographModel, big_r: f64, resolution: usize) -> Result<(f64, f64)> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::InvalidParams(format!(
            "resolution must be at least {MIN_RESOLUTION}, got {resolution}"
        )));
    }
    let (n, lam, eps, mu, a) = model.first_term_data();
    let nf = n as f64;
    let period = 2 * (n as usize + 1);
    let m = (8 * resolution).div_ceil(period) * period;
    let freq = nf + 1.0;
    let m_of = |t: f64| (1.0 + eps * eps + 2.0 * eps * (2.0 * freq * t).cos()).sqrt();
    let j_of = |t: f64| 1.0 - (2.0 * nf + 1.0) * eps * eps - 2.0 * nf * eps * (2.0 * freq * t).cos();
    let bound = |t: f64| (big_r / (a * m_of(t))).powf(1.0 / lam);
    let g = |t: f64| 4.0 * mu * a * bound(t).powf(nf + lam) * (freq * t).cos();

    let dt = TAU / m as f64;
    let samples: Vec<f64> = (0..m).map(|i| g(dt * i as f64)).collect();
    let sup = golden_extremum(&g, &samples, dt, 1.0).max(0.0);
    let inf = -golden_extremum(&g, &samples, dt, -1.0).max(0.0);

    let (x, w) = gauss_legendre(resolution);
    let power = nf + 3.0 * lam - 1.0;
    let mut total = 0.0;
    for i in 0..m {
        let t = dt * i as f64;
        let rb = bound(t);
        let radial: f64 = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let r = 0.5 * rb * (1.0 + xi);
                0.5 * rb * wi * r.powf(power)
            })
            .sum();
        total += radial * (freq * t).cos() * j_of(t);
    }
    let integral = 4.0 * mu * lam * a * a * a * total * dt;
    Ok((sup + inf, integral))
}

/// Maximum of `sign * g` on the periodic sample grid, polished by golden
/// section around the best sample.
fn golden_extremum<G: Fn(f64) -> f64>(g: &G, samples: &[f64], dt: f64, sign: f64) -> f64 {
    let (i_best, v_best) = samples
        .iter()
        .enumerate()
        .map(|(i, v)| (i, sign * v))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    let t0 = dt * i_best as f64;
    let (mut lo, mut hi) = (t0 - dt, t0 + dt);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let (mut fc, mut fd) = (sign * g(c), sign * g(d));
    for _ in 0..200 {
        if hi - lo <= 1e-13 {
            break;
        }
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = sign * g(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = sign * g(d);
        }
    }
    v_best.max(fc).max(fd)
}

/// Default ladder with `rungs` radii starting at `fraction * available`.
pub fn default_ladder(available: f64, fraction: f64, rungs: usize) -> Vec<f64> {
    ladder_radii(fraction * available, rungs)
}

/// Integrates `f` over the disc by the same tensor rule as [`disc_stats`].
pub fn disc_integral<F>(f: F, center: Complex64, radius: f64, resolution: usize) -> Result<f64>
where
    F: Fn(Complex64) -> Result<f64>,
{
    let (nodes, weights) = gauss_legendre_on(resolution, 0.0, radius);
    let m = ANGULAR_FACTOR * resolution;
    let mut acc = 0.0;
    for (&rho, &w) in nodes.iter().zip(&weights) {
        let mut ring = 0.0;
        for j in 0..m {
            let z = center + Complex64::from_polar(rho, TAU * j as f64 / m as f64);
            ring += f(z).map_err(|e| Error::at(z, e))?;
        }
        acc += w * rho * ring;
    }
    Ok(acc * TAU / m as f64)
}
