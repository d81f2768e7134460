//! Campaign configuration, read from a single JSON document.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hodograph::CoefficientSet;
use crate::spectral::ProblemParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub p: f64,
    pub n: u32,
    /// `[k, re, im]` triples.
    pub coefficients: Vec<(u32, f64, f64)>,
    #[serde(default)]
    pub ladder: LadderConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub crosscheck: CrosscheckConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_seed() -> u64 {
    42
}

fn default_output() -> PathBuf {
    PathBuf::from("amvp-out")
}

/// Radii `r0 · 2^{-j}`, `j < rungs`, with `r0 = r0_fraction` times the
/// available radius (the certified plane radius at the critical point, the
/// distance to the origin or to the region's edge at a probe).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LadderConfig {
    pub r0_fraction: f64,
    pub rungs: usize,
    pub resolution: usize,
    pub probes: usize,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            r0_fraction: 0.3,
            rungs: 9,
            resolution: 32,
            probes: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub round_trip: f64,
    pub pull_back: f64,
    pub plaplacian_slope: f64,
    pub su_mu_relative: f64,
    pub gap_slope_margin: f64,
    pub critical_slope_margin: f64,
    pub smooth_slope: f64,
    pub control_slope_margin: f64,
    pub crosscheck_ratio: f64,
    pub solver_tol: f64,
    pub power_chord_infimum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            round_trip: 1e-10,
            pull_back: 1e-9,
            plaplacian_slope: 1.8,
            su_mu_relative: 1e-8,
            gap_slope_margin: 0.1,
            critical_slope_margin: 0.15,
            smooth_slope: 2.0,
            control_slope_margin: 0.15,
            crosscheck_ratio: 1.5,
            solver_tol: 1e-10,
            power_chord_infimum: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sampling {
    pub inequality_samples: usize,
    pub round_trip_points: usize,
    pub plaplacian_points: usize,
    pub shells: usize,
    pub shell_angles: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Self {
            inequality_samples: 20_000,
            round_trip_points: 1_000,
            plaplacian_points: 16,
            shells: 12,
            shell_angles: 64,
        }
    }
}

/// Square `center ± half_width` in units of the certified plane radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrosscheckConfig {
    pub enabled: bool,
    pub center: (f64, f64),
    pub half_width: f64,
    pub cells: Vec<usize>,
    pub max_iters: usize,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            center: (0.45, 0.0),
            half_width: 0.2,
            cells: vec![32, 64],
            max_iters: 200,
        }
    }
}

impl CampaignConfig {
    pub fn new(p: f64, n: u32, coefficients: Vec<(u32, f64, f64)>) -> Self {
        Self {
            p,
            n,
            coefficients,
            ladder: LadderConfig::default(),
            tolerances: Tolerances::default(),
            sampling: Sampling::default(),
            crosscheck: CrosscheckConfig::default(),
            seed: default_seed(),
            output: default_output(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.p, self.n)
    }

    pub fn coefficient_set(&self) -> Result<CoefficientSet> {
        CoefficientSet::new(
            self.params()?,
            self.coefficients
                .iter()
                .map(|&(k, re, im)| (k, Complex64::new(re, im)))
                .collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        self.coefficient_set()?;
        let l = &self.ladder;
        if !(l.r0_fraction > 0.0 && l.r0_fraction < 1.0) {
            return Err(Error::Config(format!(
                "r0_fraction must lie in (0, 1), got {}",
                l.r0_fraction
            )));
        }
        if l.rungs < 3 {
            return Err(Error::Config(format!(
                "a ladder needs at least 3 rungs, got {}",
                l.rungs
            )));
        }
        if l.resolution < crate::amvp::MIN_RESOLUTION {
            return Err(Error::Config(format!(
                "resolution {} is below the minimum",
                l.resolution
            )));
        }
        let c = &self.crosscheck;
        if c.enabled {
            if c.cells.len() < 2 || c.cells.iter().any(|&m| m < crate::crosscheck::MIN_CELLS) {
                return Err(Error::Config(
                    "crosscheck needs two or more grids of at least 16 cells".into(),
                ));
            }
            if !(c.half_width > 0.0) {
                return Err(Error::Config("crosscheck half width must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Parses `k:re:im`.
pub fn parse_coefficient(text: &str) -> Result<(u32, f64, f64)> {
    let bad = || Error::Config(format!("coefficient must look like k:re:im, got {text:?}"));
    let mut parts = text.split(':');
    let k = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let re = parts.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
    let im = parts.next().map_or(Ok(0.0), |s| s.trim().parse()).map_err(|_| bad())?;
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok((k, re, im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let c = CampaignConfig::from_json(r#"{"p": 3, "n": 1, "coefficients": [[2, 1.0, 0.0]]}"#).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.ladder.rungs, 9);
        assert_eq!(c.coefficient_set().unwrap().leading(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_invalid() {
        assert!(CampaignConfig::from_json(r#"{"p": 1, "n": 1, "coefficients": [[2, 1, 0]]}"#).is_err());
        assert!(CampaignConfig::from_json(r#"{"p": 3, "n": 1, "coefficients": [[3, 1, 0]]}"#).is_err());
        assert!(CampaignConfig::from_json(r#"{"p": 3, "n": 1, "coefficients": [], "extra": 1}"#).is_err());
        assert!(
            CampaignConfig::from_json(r#"{"p": 3, "n": 1, "coefficients": [[2, 1, 0]], "ladder": {"rungs": 2}}"#)
                .is_err()
        );
    }

    #[test]
    fn coefficient_flags() {
        assert_eq!(parse_coefficient("3:0.05:-0.1").unwrap(), (3, 0.05, -0.1));
        assert_eq!(parse_coefficient("2:1").unwrap(), (2, 1.0, 0.0));
        assert!(parse_coefficient("2:x:0").is_err());
        assert!(parse_coefficient("2:1:0:4").is_err());
    }
}
