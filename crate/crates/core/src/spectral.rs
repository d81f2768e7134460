//! Exponents, couplings and amplitude factors of the hodographic series.
//!
//! For a critical point of multiplicity `n` of a planar p-harmonic function the
//! hodographic series is indexed by `k >= n + 1`. Each index carries
//!
//! * the radial exponent `lambda_k = (sqrt(4k^2(p-1) + n^2(p-2)^2) - np) / 2`,
//! * the coupling `epsilon_k = (lambda_k + n - k) / (lambda_k + n + k)`,
//! * the amplitude `mu_k = lambda_k / (lambda_k + n + k)`.
//!
//! Everything here is a pure function of `(p, n, k)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth exponent `p` and critical-point multiplicity `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    p: f64,
    n: u32,
}

impl ProblemParams {
    pub fn new(p: f64, n: u32) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::InvalidParams(format!("p must be finite and > 1, got {p}")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("multiplicity n must be >= 1".into()));
        }
        Ok(Self { p, n })
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Index of the leading term, `n + 1`.
    #[inline]
    pub fn leading_index(&self) -> u32 {
        self.n + 1
    }
}

/// `(lambda_k, epsilon_k, mu_k)` for one index `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralTriple {
    pub k: u32,
    pub lambda: f64,
    pub epsilon: f64,
    pub mu: f64,
}

impl SpectralTriple {
    /// Checks the three strict bounds the triple must satisfy for its `n`.
    pub fn within_bounds(&self, n: u32) -> bool {
        let (k, n) = (self.k as f64, n as f64);
        let lambda_ok = self.lambda > 0.0 && self.lambda < (k * k - n * n) / n;
        let eps_ok = self.epsilon.abs() < (k - n) / (k + n);
        let mu_ok = self.mu >= 0.0 && self.mu < 1.0 - n / k;
        lambda_ok && eps_ok && mu_ok
    }
}

/// Radial exponent `lambda_k`.
///
/// Evaluated in the rationalized form `2(k^2-n^2)(p-1) / (S + np)` with
/// `S = sqrt(4k^2(p-1) + n^2(p-2)^2)`, which is algebraically identical and
/// avoids the `S - np` cancellation as `p -> 1`.
fn lambda(p: f64, n: f64, k: f64) -> f64 {
    let disc = 4.0 * k * k * (p - 1.0) + n * n * (p - 2.0) * (p - 2.0);
    let s = disc.sqrt();
    2.0 * (k * k - n * n) * (p - 1.0) / (s + n * p)
}

pub fn spectral_triple(params: ProblemParams, k: u32) -> Result<SpectralTriple> {
    let n = params.n;
    if k <= n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    let (nf, kf) = (n as f64, k as f64);
    let lambda = lambda(params.p, nf, kf);
    let epsilon = (lambda + nf - kf) / (lambda + nf + kf);
    let mu = lambda / (lambda + nf + kf);
    Ok(SpectralTriple { k, lambda, epsilon, mu })
}

/// `(n + lambda_{n+2}) / lambda_{n+1}`, the decay order of the singular
/// expansion remainder. Always strictly greater than 2.
pub fn exponent_ratio(params: ProblemParams) -> f64 {
    let n = params.n;
    let first = lambda(params.p, n as f64, (n + 1) as f64);
    let second = lambda(params.p, n as f64, (n + 2) as f64);
    (n as f64 + second) / first
}

/// `2p^3 + 7p^2 + 10p - 19`; vanishes at `p = 1` and is increasing after.
pub fn cubic_n1(p: f64) -> f64 {
    ((2.0 * p + 7.0) * p + 10.0) * p - 19.0
}

/// Weights `((p-2)/(p+2), 4/(p+2))` of the disc midrange and disc mean.
pub fn amvp_weights(p: f64) -> (f64, f64) {
    ((p - 2.0) / (p + 2.0), 4.0 / (p + 2.0))
}

/// `1/(2n+1) - |epsilon_{n+1}|`. Positive margin keeps the first-term map
/// injective and its Jacobian positive.
pub fn epsilon_margin(params: ProblemParams) -> f64 {
    let n = params.n as f64;
    let lam = lambda(params.p, n, n + 1.0);
    let eps = (lam - 1.0) / (lam + 2.0 * n + 1.0);
    1.0 / (2.0 * n + 1.0) - eps.abs()
}

/// Smallest slope `(lambda_k - lambda_{n+2}) / (k - (n+2))` over
/// `k in [n+3, n+2+span]`.
pub fn lambda_growth_floor(params: ProblemParams, span: u32) -> f64 {
    let (p, n) = (params.p, params.n as f64);
    let base = lambda(p, n, n + 2.0);
    (1..=span)
        .map(|j| (lambda(p, n, n + 2.0 + j as f64) - base) / j as f64)
        .fold(f64::INFINITY, f64::min)
}

/// Grid for the spectral property sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepGrid {
    /// Number of log-spaced values of `p - 1` in `[p_minus_one_min, p_max - 1]`.
    pub p_points: usize,
    pub p_minus_one_min: f64,
    pub p_max: f64,
    pub n_max: u32,
    /// Number of indices `k = n+1 ..= n+k_span` per multiplicity.
    pub k_span: u32,
}

impl Default for SweepGrid {
    fn default() -> Self {
        Self {
            p_points: 200,
            p_minus_one_min: 1e-3,
            p_max: 200.0,
            n_max: 50,
            k_span: 60,
        }
    }
}

impl SweepGrid {
    pub fn p_values(&self) -> Vec<f64> {
        let lo = self.p_minus_one_min.ln();
        let hi = (self.p_max - 1.0).ln();
        let m = self.p_points.max(2);
        (0..m)
            .map(|i| 1.0 + (lo + (hi - lo) * i as f64 / (m - 1) as f64).exp())
            .collect()
    }
}

/// Outcome of [`spectral_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub triples_checked: usize,
    pub bound_violations: usize,
    pub monotonicity_violations: usize,
    pub min_exponent_ratio: f64,
    pub min_epsilon_margin: f64,
    pub min_growth_floor: f64,
    pub min_weight_mean: f64,
    pub max_weight_sum_error: f64,
}

/// Checks every spectral bound over the grid.
pub fn spectral_sweep(grid: &SweepGrid) -> SweepSummary {
    let mut s = SweepSummary {
        triples_checked: 0,
        bound_violations: 0,
        monotonicity_violations: 0,
        min_exponent_ratio: f64::INFINITY,
        min_epsilon_margin: f64::INFINITY,
        min_growth_floor: f64::INFINITY,
        min_weight_mean: f64::INFINITY,
        max_weight_sum_error: 0.0,
    };
    for p in grid.p_values() {
        let (wa, wb) = amvp_weights(p);
        s.min_weight_mean = s.min_weight_mean.min(wb);
        s.max_weight_sum_error = s.max_weight_sum_error.max((wa + wb - 1.0).abs());
        for n in 1..=grid.n_max {
            let params = ProblemParams { p, n };
            let mut prev = 0.0;
            for k in n + 1..=n + grid.k_span {
                // k > n always holds here
                let t = spectral_triple(params, k).expect("k > n");
                s.triples_checked += 1;
                if !t.within_bounds(n) {
                    s.bound_violations += 1;
                }
                if t.lambda <= prev {
                    s.monotonicity_violations += 1;
                }
                prev = t.lambda;
            }
            s.min_exponent_ratio = s.min_exponent_ratio.min(exponent_ratio(params));
            s.min_epsilon_margin = s.min_epsilon_margin.min(epsilon_margin(params));
            if grid.k_span >= 3 {
                s.min_growth_floor = s.min_growth_floor.min(lambda_growth_floor(params, grid.k_span - 2));
            }
        }
    }
    s
}
