//! Log-log least-squares fits of residual-versus-radius series.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values below `NOISE_FLOOR_FACTOR * f64::EPSILON * scale` are treated as
/// rounding noise.
pub const NOISE_FLOOR_FACTOR: f64 = 1e3;

pub fn noise_floor(field_scale: f64) -> f64 {
    NOISE_FLOOR_FACTOR * f64::EPSILON * field_scale.abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points_used: usize,
}

/// Fits `log value = intercept + slope * log r`, skipping non-positive values.
pub fn decay_fit(radii: &[f64], values: &[f64]) -> Result<DecayFit> {
    decay_fit_above(radii, values, &vec![0.0; values.len()])
}

/// As [`decay_fit`], additionally skipping points with `value <= floor`.
pub fn decay_fit_above(radii: &[f64], values: &[f64], floors: &[f64]) -> Result<DecayFit> {
    if radii.len() != values.len() || values.len() != floors.len() {
        return Err(Error::Fit("radii, values and floors differ in length".into()));
    }
    if radii.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::Fit("radii must be positive and finite".into()));
    }
    if radii.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Fit("radii must be strictly decreasing".into()));
    }
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .zip(floors)
        .filter(|&((_, &v), &fl)| v.is_finite() && v > 0.0 && v > fl)
        .map(|((&r, &v), _)| (r.ln(), v.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "{} usable points above the noise floor, need at least 3",
            pts.len()
        )));
    }
    Ok(least_squares(&pts))
}

fn least_squares(pts: &[(f64, f64)]) -> DecayFit {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    DecayFit {
        slope,
        intercept,
        r_squared,
        points_used: pts.len(),
    }
}
