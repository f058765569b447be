//! Stationary Matern-class covariance functions and their univariate
//! spectral densities.
//!
//! All three families share the parameterization `k(r) = alpha^2 g(r / rho)`,
//! so the spectral density always scales as `alpha^2 rho h(rho * omega)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;
const SQRT_5: f64 = 2.236_067_977_499_79;

/// Covariance family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelFamily {
    SquaredExponential,
    Matern32,
    Matern52,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::SquaredExponential,
        KernelFamily::Matern32,
        KernelFamily::Matern52,
    ];

    /// Short stable tag used in files and on the command line.
    pub fn tag(self) -> &'static str {
        match self {
            KernelFamily::SquaredExponential => "se",
            KernelFamily::Matern32 => "m32",
            KernelFamily::Matern52 => "m52",
        }
    }

    /// `k(r)` without argument validation.
    #[inline]
    pub fn covariance(self, r: f64, hyper: KernelHyper) -> f64 {
        let a2 = hyper.alpha * hyper.alpha;
        match self {
            KernelFamily::SquaredExponential => {
                let u = r / hyper.rho;
                a2 * (-0.5 * u * u).exp()
            }
            KernelFamily::Matern32 => {
                let a = SQRT_3 * r / hyper.rho;
                a2 * (1.0 + a) * (-a).exp()
            }
            KernelFamily::Matern52 => {
                let a = SQRT_5 * r / hyper.rho;
                a2 * (1.0 + a + a * a / 3.0) * (-a).exp()
            }
        }
    }

    /// `dk/dr` at `r >= 0`.
    #[inline]
    pub fn covariance_dr(self, r: f64, hyper: KernelHyper) -> f64 {
        let a2 = hyper.alpha * hyper.alpha;
        match self {
            KernelFamily::SquaredExponential => {
                let u = r / hyper.rho;
                -a2 * (-0.5 * u * u).exp() * u / hyper.rho
            }
            KernelFamily::Matern32 => {
                let a = SQRT_3 * r / hyper.rho;
                -a2 * a * (-a).exp() * SQRT_3 / hyper.rho
            }
            KernelFamily::Matern52 => {
                let a = SQRT_5 * r / hyper.rho;
                -a2 * a * (1.0 + a) / 3.0 * (-a).exp() * SQRT_5 / hyper.rho
            }
        }
    }

    /// `dk/d(log rho)`.
    #[inline]
    pub fn covariance_dlog_rho(self, r: f64, hyper: KernelHyper) -> f64 {
        let a2 = hyper.alpha * hyper.alpha;
        match self {
            KernelFamily::SquaredExponential => {
                let u = r / hyper.rho;
                a2 * (-0.5 * u * u).exp() * u * u
            }
            KernelFamily::Matern32 => {
                let a = SQRT_3 * r / hyper.rho;
                a2 * a * a * (-a).exp()
            }
            KernelFamily::Matern52 => {
                let a = SQRT_5 * r / hyper.rho;
                a2 * a * a * (1.0 + a) / 3.0 * (-a).exp()
            }
        }
    }

    /// `(k, dk/dr, dk/d(log rho))` at `r >= 0` with a single exponential.
    #[inline]
    pub fn covariance_terms(self, r: f64, hyper: KernelHyper) -> (f64, f64, f64) {
        let a2 = hyper.alpha * hyper.alpha;
        match self {
            KernelFamily::SquaredExponential => {
                let u = r / hyper.rho;
                let k = a2 * (-0.5 * u * u).exp();
                (k, -k * u / hyper.rho, k * u * u)
            }
            KernelFamily::Matern32 => {
                let a = SQRT_3 * r / hyper.rho;
                let e = a2 * (-a).exp();
                (e * (1.0 + a), -e * a * SQRT_3 / hyper.rho, e * a * a)
            }
            KernelFamily::Matern52 => {
                let a = SQRT_5 * r / hyper.rho;
                let e = a2 * (-a).exp();
                let t = e * a * (1.0 + a) / 3.0;
                (e * (1.0 + a + a * a / 3.0), -t * SQRT_5 / hyper.rho, t * a)
            }
        }
    }

    /// `S(omega)` without argument validation.
    #[inline]
    pub fn spectral(self, omega: f64, hyper: KernelHyper) -> f64 {
        let a2 = hyper.alpha * hyper.alpha;
        let rho = hyper.rho;
        let w2 = omega * omega;
        match self {
            KernelFamily::SquaredExponential => {
                a2 * rho * (2.0 * PI).sqrt() * (-0.5 * rho * rho * w2).exp()
            }
            KernelFamily::Matern32 => {
                let base = 3.0 / (rho * rho) + w2;
                a2 * 4.0 * 3f64.powf(1.5) / rho.powi(3) / (base * base)
            }
            KernelFamily::Matern52 => {
                let base = 5.0 / (rho * rho) + w2;
                a2 * 16.0 * 5f64.powf(2.5) / (3.0 * rho.powi(5)) / (base * base * base)
            }
        }
    }

    /// `d log S / d log rho` at frequency `omega`. Independent of `alpha`.
    #[inline]
    pub fn spectral_dlog_rho(self, omega: f64, rho: f64) -> f64 {
        let w2 = omega * omega;
        match self {
            KernelFamily::SquaredExponential => 1.0 - rho * rho * w2,
            KernelFamily::Matern32 => {
                let q = 3.0 / (rho * rho);
                -3.0 + 4.0 * q / (q + w2)
            }
            KernelFamily::Matern52 => {
                let q = 5.0 / (rho * rho);
                -5.0 + 6.0 * q / (q + w2)
            }
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "se" | "squared-exponential" | "squaredexponential" => Ok(KernelFamily::SquaredExponential),
            "m32" | "matern32" | "matern-32" => Ok(KernelFamily::Matern32),
            "m52" | "matern52" | "matern-52" => Ok(KernelFamily::Matern52),
            other => Err(Error::Usage(format!("unknown kernel family '{other}'"))),
        }
    }
}

/// Length-scale and marginal standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelHyper {
    pub rho: f64,
    pub alpha: f64,
}

impl KernelHyper {
    pub fn new(rho: f64, alpha: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::Domain(format!("length-scale must be positive and finite, got {rho}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("marginal SD must be positive and finite, got {alpha}")));
        }
        Ok(Self { rho, alpha })
    }
}

/// Covariance at distance `r`.
pub fn kernel_eval(family: KernelFamily, r: f64, hyper: KernelHyper) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("distance must be finite and non-negative, got {r}")));
    }
    let hyper = KernelHyper::new(hyper.rho, hyper.alpha)?;
    Ok(family.covariance(r, hyper))
}

/// Spectral density at angular frequency `omega`.
pub fn spectral_density(family: KernelFamily, omega: f64, hyper: KernelHyper) -> Result<f64> {
    if !omega.is_finite() {
        return Err(Error::Domain(format!("frequency must be finite, got {omega}")));
    }
    let hyper = KernelHyper::new(hyper.rho, hyper.alpha)?;
    Ok(family.spectral(omega, hyper))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combined_terms_match_separate_functions() {
        let hy = KernelHyper::new(0.7, 1.9).unwrap();
        for fam in [KernelFamily::SquaredExponential, KernelFamily::Matern32, KernelFamily::Matern52] {
            for r in [0.0, 0.3, 1.1, 4.0] {
                let (k, dr, dl) = fam.covariance_terms(r, hy);
                assert!((k - fam.covariance(r, hy)).abs() < 1e-14);
                assert!((dr - fam.covariance_dr(r, hy)).abs() < 1e-14);
                assert!((dl - fam.covariance_dlog_rho(r, hy)).abs() < 1e-14);
            }
        }
    }
    use approx::assert_relative_eq;

    fn h(rho: f64, alpha: f64) -> KernelHyper {
        KernelHyper::new(rho, alpha).unwrap()
    }

    #[test]
    fn kernel_examples() {
        let se = KernelFamily::SquaredExponential;
        assert_eq!(kernel_eval(se, 0.0, h(1.0, 3.0)).unwrap(), 9.0);
        assert_relative_eq!(kernel_eval(se, 2.0, h(2.0, 1.0)).unwrap(), (-0.5f64).exp(), max_relative = 1e-15);
        // (1 + sqrt 3) exp(-sqrt 3), evaluated independently: 0.4833577245965077
        assert_relative_eq!(
            kernel_eval(KernelFamily::Matern32, 1.0, h(1.0, 1.0)).unwrap(),
            0.483_357_724_596_507_7,
            max_relative = 1e-14
        );
    }

    #[test]
    fn kernel_at_zero_is_variance_and_decreasing() {
        for fam in KernelFamily::ALL {
            let hy = h(0.7, 2.0);
            assert_eq!(fam.covariance(0.0, hy), 4.0);
            let mut prev = f64::INFINITY;
            for i in 0..200 {
                let v = fam.covariance(i as f64 * 0.05, hy);
                assert!(v <= prev && v > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn domain_errors() {
        let se = KernelFamily::SquaredExponential;
        assert!(kernel_eval(se, -1.0, h(1.0, 1.0)).is_err());
        assert!(kernel_eval(se, f64::NAN, h(1.0, 1.0)).is_err());
        assert!(spectral_density(se, f64::INFINITY, h(1.0, 1.0)).is_err());
        assert!(KernelHyper::new(0.0, 1.0).is_err());
        assert!(KernelHyper::new(1.0, -2.0).is_err());
    }

    #[test]
    fn spectral_examples() {
        assert_relative_eq!(
            spectral_density(KernelFamily::SquaredExponential, 0.0, h(1.0, 1.0)).unwrap(),
            (2.0 * PI).sqrt(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            spectral_density(KernelFamily::Matern32, 0.0, h(1.0, 1.0)).unwrap(),
            4.0 * 3f64.powf(1.5) / 9.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn spectral_scales_with_alpha_squared() {
        for fam in KernelFamily::ALL {
            for &w in &[0.0, 0.3, 1.7, 4.0] {
                let unit = fam.spectral(w, h(1.3, 1.0));
                let scaled = fam.spectral(w, h(1.3, 2.5));
                assert_relative_eq!(scaled, 6.25 * unit, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn tail_ordering() {
        let hy = h(1.0, 1.0);
        for &w in &[6.0, 10.0, 20.0] {
            let se = KernelFamily::SquaredExponential.spectral(w, hy);
            let m52 = KernelFamily::Matern52.spectral(w, hy);
            let m32 = KernelFamily::Matern32.spectral(w, hy);
            assert!(se < m52 && m52 < m32, "w={w}: {se} {m52} {m32}");
        }
    }

    #[test]
    fn derivative_helpers_match_finite_differences() {
        let eps = 1e-6;
        for fam in KernelFamily::ALL {
            let rho = 0.8;
            for &r in &[0.1, 0.9, 2.5] {
                let hy = h(rho, 1.7);
                let fd_r = (fam.covariance(r + eps, hy) - fam.covariance(r - eps, hy)) / (2.0 * eps);
                assert_relative_eq!(fam.covariance_dr(r, hy), fd_r, max_relative = 1e-6);
                let up = h(rho * eps.exp(), 1.7);
                let dn = h(rho * (-eps).exp(), 1.7);
                let fd_rho = (fam.covariance(r, up) - fam.covariance(r, dn)) / (2.0 * eps);
                assert_relative_eq!(fam.covariance_dlog_rho(r, hy), fd_rho, max_relative = 1e-6);
            }
            for &w in &[0.0, 0.5, 3.0] {
                let fd = (fam.spectral(w, h(rho * eps.exp(), 1.0)).ln()
                    - fam.spectral(w, h(rho * (-eps).exp(), 1.0)).ln())
                    / (2.0 * eps);
                assert_relative_eq!(fam.spectral_dlog_rho(w, rho), fd, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn family_tags_round_trip() {
        for fam in KernelFamily::ALL {
            assert_eq!(fam.tag().parse::<KernelFamily>().unwrap(), fam);
        }
        assert!("rbf2".parse::<KernelFamily>().is_err());
    }
}
