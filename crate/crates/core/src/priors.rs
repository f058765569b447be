//! Prior distributions over hyperparameters and the named presets used by
//! the simulation study and the case study.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal};

use crate::error::{Error, Result};

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Gaussian log-density.
#[inline]
pub fn normal_log_density(value: f64, mean: f64, sd: f64) -> f64 {
    let z = (value - mean) / sd;
    -0.5 * z * z - sd.ln() - HALF_LN_2PI
}

/// Normal distribution restricted to the positive half-line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub sd: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::Domain(format!("invalid truncated normal N+({mean}, {sd}^2)")));
        }
        Ok(Self { mean, sd })
    }

    /// Log-density for `value > 0`, without the truncation normalizer
    /// (a constant for fixed prior hyperparameters).
    #[inline]
    pub fn log_density_unnormalized(&self, value: f64) -> f64 {
        if value <= 0.0 {
            return f64::NEG_INFINITY;
        }
        normal_log_density(value, self.mean, self.sd)
    }

    /// `d/dv` of [`Self::log_density_unnormalized`].
    #[inline]
    pub fn log_density_derivative(&self, value: f64) -> f64 {
        -(value - self.mean) / (self.sd * self.sd)
    }

    /// `log P(X > 0)` of the untruncated normal.
    pub fn log_normalizer(&self) -> f64 {
        let std = StatrsNormal::new(0.0, 1.0).expect("standard normal");
        std.cdf(self.mean / self.sd).ln()
    }

    /// Draws from the positive part, by rejection when the positive mass is
    /// non-negligible and by inverse CDF otherwise.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.mean / self.sd > -3.0 {
            loop {
                let z: f64 = rng.sample(StandardNormal);
                let v = self.mean + self.sd * z;
                if v > 0.0 {
                    return v;
                }
            }
        }
        let std = StatrsNormal::new(0.0, 1.0).expect("standard normal");
        let lower = std.cdf(-self.mean / self.sd);
        loop {
            let u: f64 = rng.random();
            let p = lower + u * (1.0 - lower);
            let v = self.mean + self.sd * std.inverse_cdf(p);
            if v > 0.0 && v.is_finite() {
                return v;
            }
        }
    }
}

impl fmt::Display for TruncatedNormal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N+({}, {}^2)", self.mean, self.sd)
    }
}

/// Unrestricted normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub fn new(mean: f64, sd: f64) -> Result<Self> {
        if !mean.is_finite() || !(sd > 0.0 && sd.is_finite()) {
            return Err(Error::Domain(format!("invalid normal N({mean}, {sd}^2)")));
        }
        Ok(Self { mean, sd })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.mean + self.sd * z
    }
}

/// Priors of the per-dimension hyperparameters, mean offsets and correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSet {
    pub rho: TruncatedNormal,
    pub alpha: TruncatedNormal,
    pub sigma: TruncatedNormal,
    pub mu: NormalPrior,
    /// LKJ shape.
    pub eta: f64,
}

impl PriorSet {
    pub fn new(
        rho: TruncatedNormal,
        alpha: TruncatedNormal,
        sigma: TruncatedNormal,
        mu: NormalPrior,
        eta: f64,
    ) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("LKJ shape must be positive, got {eta}")));
        }
        Ok(Self {
            rho,
            alpha,
            sigma,
            mu,
            eta,
        })
    }

    /// Priors aligned with the GP simulation scenarios.
    pub fn simulation() -> Self {
        Self {
            rho: TruncatedNormal { mean: 1.0, sd: 0.05 },
            alpha: TruncatedNormal { mean: 3.0, sd: 0.25 },
            sigma: TruncatedNormal { mean: 1.0, sd: 0.25 },
            mu: NormalPrior { mean: 0.0, sd: 5.0 },
            eta: 1.0,
        }
    }

    /// Shifted, wider hyperparameter priors for the robustness study.
    pub fn wide() -> Self {
        Self {
            rho: TruncatedNormal { mean: 1.5, sd: 0.5 },
            alpha: TruncatedNormal { mean: 3.5, sd: 1.0 },
            sigma: TruncatedNormal { mean: 1.5, sd: 1.0 },
            ..Self::simulation()
        }
    }

    /// Priors for the cell-cycle pseudotime case study (inputs on `[0, 1]`).
    pub fn case_study() -> Self {
        Self {
            rho: TruncatedNormal { mean: 0.4, sd: 0.1 },
            alpha: TruncatedNormal { mean: 14.0, sd: 3.5 },
            sigma: TruncatedNormal { mean: 7.0, sd: 3.5 },
            ..Self::simulation()
        }
    }

    pub fn with_rho(mut self, rho: TruncatedNormal) -> Self {
        self.rho = rho;
        self
    }
}

/// Named prior configurations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PriorPreset {
    /// Priors matched to the data-generating scenario.
    Scenario,
    Wide,
    CaseStudy,
}

impl PriorPreset {
    pub fn tag(self) -> &'static str {
        match self {
            PriorPreset::Scenario => "scenario",
            PriorPreset::Wide => "wide",
            PriorPreset::CaseStudy => "case-study",
        }
    }
}

impl FromStr for PriorPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scenario" => Ok(PriorPreset::Scenario),
            "wide" => Ok(PriorPreset::Wide),
            "case-study" => Ok(PriorPreset::CaseStudy),
            other => Err(Error::Usage(format!("unknown prior preset '{other}'"))),
        }
    }
}

/// `log(2 pi)/2`, exposed for tests that recompute densities by hand.
pub fn half_log_two_pi() -> f64 {
    0.5 * (2.0 * PI).ln()
}
