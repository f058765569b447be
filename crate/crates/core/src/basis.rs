//! Laplacian eigenbasis on `[-L, L]` with Dirichlet boundaries.
//!
//! `lambda_j = (j pi / 2L)^2` and `phi_j(x) = sqrt(1/L) sin(sqrt(lambda_j) (x + L))`.
//! Inputs are shifted by a fixed center before evaluation so the working
//! interval is symmetric about zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelHyper};
use crate::linalg::Matrix;

/// Default boundary factor applied to the half-range of the inputs.
pub const DEFAULT_BOUNDARY_FACTOR: f64 = 1.25;

/// Boundary half-width, truncation and centering of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisConfig {
    /// Half-width `L` of the domain `[-L, L]`.
    pub half_width: f64,
    /// Number of basis functions `M`.
    pub m: usize,
    /// Boundary factor `c` that produced `half_width`.
    pub boundary_factor: f64,
    /// Shift subtracted from raw inputs before evaluation.
    pub center: f64,
}

impl BasisConfig {
    pub fn new(half_width: f64, m: usize, boundary_factor: f64, center: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Domain(format!("half-width L must be positive, got {half_width}")));
        }
        if m == 0 {
            return Err(Error::Domain("at least one basis function is required".into()));
        }
        if !(boundary_factor >= 1.0) {
            return Err(Error::Domain(format!("boundary factor must be >= 1, got {boundary_factor}")));
        }
        if !center.is_finite() {
            return Err(Error::Domain("center must be finite".into()));
        }
        Ok(Self {
            half_width,
            m,
            boundary_factor,
            center,
        })
    }

    /// Centers on the midpoint of `inputs` and sets `L = c * half-range`.
    pub fn from_inputs(inputs: &[f64], m: usize, boundary_factor: f64) -> Result<Self> {
        let (lo, hi) = finite_range(inputs)?;
        let half_range = 0.5 * (hi - lo);
        if !(half_range > 0.0) {
            return Err(Error::Domain("inputs must span a non-empty interval".into()));
        }
        Self::new(boundary_factor * half_range, m, boundary_factor, 0.5 * (lo + hi))
    }

    /// Eigenvalues `lambda_1..lambda_M`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        (1..=self.m).map(|j| eigenvalue_unchecked(j, self.half_width)).collect()
    }

    /// Square roots of the eigenvalues, i.e. the frequencies the spectral
    /// density is evaluated at.
    pub fn frequencies(&self) -> Vec<f64> {
        (1..=self.m).map(|j| j as f64 * PI / (2.0 * self.half_width)).collect()
    }
}

pub(crate) fn finite_range(values: &[f64]) -> Result<(f64, f64)> {
    if values.is_empty() {
        return Err(Error::Domain("empty input vector".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if !v.is_finite() {
            return Err(Error::Domain(format!("non-finite input {v}")));
        }
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Eigenfunction evaluations and eigenvalues for a set of inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisMatrix {
    /// `N x M`, entry `(i, j)` is `phi_{j+1}(x_i - center)`.
    pub values: Matrix,
    pub eigenvalues: Vec<f64>,
}

#[inline]
fn eigenvalue_unchecked(j: usize, half_width: f64) -> f64 {
    let s = j as f64 * PI / (2.0 * half_width);
    s * s
}

/// `lambda_j = (j pi / (2L))^2`, `j >= 1`.
pub fn eigenvalue(j: usize, half_width: f64) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("eigenfunction index starts at 1".into()));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Domain(format!("half-width L must be positive, got {half_width}")));
    }
    Ok(eigenvalue_unchecked(j, half_width))
}

/// `phi_j(x) = sqrt(1/L) sin(sqrt(lambda_j) (x + L))`, for an already centered `x`.
pub fn eigenfunction(j: usize, half_width: f64, x: f64) -> Result<f64> {
    let lambda = eigenvalue(j, half_width)?;
    Ok((1.0 / half_width).sqrt() * (lambda.sqrt() * (x + half_width)).sin())
}

/// Fills `phi[j] = phi_{j+1}(x)` and, when given, `dphi[j] = d phi_{j+1} / dx`
/// for a centered `x`, using the angle-addition recurrence instead of `M`
/// separate sine evaluations.
#[inline]
pub(crate) fn eval_row(x: f64, half_width: f64, phi: &mut [f64], dphi: Option<&mut [f64]>) {
    let scale = (1.0 / half_width).sqrt();
    let base = PI / (2.0 * half_width);
    let theta = base * (x + half_width);
    let (s1, c1) = theta.sin_cos();
    let (mut s, mut c) = (s1, c1);
    match dphi {
        Some(dphi) => {
            for (j, (p, d)) in phi.iter_mut().zip(dphi.iter_mut()).enumerate() {
                *p = scale * s;
                *d = scale * c * base * (j + 1) as f64;
                let next_s = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = next_s;
            }
        }
        None => {
            for p in phi.iter_mut() {
                *p = scale * s;
                let next_s = s * c1 + c * s1;
                c = c * c1 - s * s1;
                s = next_s;
            }
        }
    }
}

/// Evaluates the basis at raw inputs `x` (centering is applied here).
pub fn build_basis(x: &[f64], config: &BasisConfig) -> Result<BasisMatrix> {
    let n = x.len();
    let m = config.m;
    let mut values = Matrix::zeros(n, m);
    for (i, &xi) in x.iter().enumerate() {
        let xc = xi - config.center;
        if !(xc.abs() < config.half_width) {
            return Err(Error::BoundaryViolation {
                index: i,
                value: xc,
                half_width: config.half_width,
            });
        }
        eval_row(xc, config.half_width, values.row_mut(i), None);
    }
    Ok(BasisMatrix {
        values,
        eigenvalues: config.eigenvalues(),
    })
}

/// Spectral weights `S(sqrt(lambda_j))` for the given eigenvalues.
pub fn spectral_weights(eigenvalues: &[f64], family: KernelFamily, hyper: KernelHyper) -> Vec<f64> {
    eigenvalues.iter().map(|l| family.spectral(l.sqrt(), hyper)).collect()
}

/// Reduced-rank covariance `Phi Delta Phi^T`.
pub fn approx_covariance(basis: &BasisMatrix, family: KernelFamily, hyper: KernelHyper) -> Matrix {
    let weights = spectral_weights(&basis.eigenvalues, family, hyper);
    let phi = &basis.values;
    let n = phi.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for k in 0..=i {
            let v: f64 = phi
                .row(i)
                .iter()
                .zip(phi.row(k))
                .zip(&weights)
                .map(|((a, b), w)| a * w * b)
                .sum();
            out[(i, k)] = v;
            out[(k, i)] = v;
        }
    }
    out
}

/// Family-specific proportionality constant of the minimum basis heuristic.
pub fn min_basis_constant(family: KernelFamily) -> f64 {
    match family {
        KernelFamily::SquaredExponential => 1.75,
        KernelFamily::Matern32 => 3.42,
        KernelFamily::Matern52 => 2.65,
    }
}

/// Minimum number of basis functions, `ceil(kappa * c * range / mean_rho)`.
pub fn min_basis(family: KernelFamily, boundary_factor: f64, input_range: f64, mean_rho: f64) -> Result<usize> {
    for (name, v) in [("boundary factor", boundary_factor), ("input range", input_range), ("length-scale mean", mean_rho)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    let raw = min_basis_constant(family) * boundary_factor * input_range / mean_rho;
    // Guard against products such as 21.000000000000004 rounding up.
    Ok(((raw - 1e-9).ceil() as usize).max(1))
}
