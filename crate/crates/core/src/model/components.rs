//! Building blocks of the joint density, exposed individually so each can
//! be checked on its own.

use crate::basis::BasisMatrix;
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelHyper};
use crate::linalg::{self, Matrix};
use crate::priors::{normal_log_density, HALF_LN_2PI};

/// Relative jitter schedule for exact-GP Gram matrices, as multiples of `alpha^2`.
pub const JITTER_START: f64 = 1e-8;
pub const JITTER_MAX: f64 = 1e-4;

/// `f_d = mu_d + Phi (sqrt(S(sqrt(lambda))) .* beta_d)` for one output dimension.
pub fn gp_functions_hsgp(
    basis: &BasisMatrix,
    beta: &[f64],
    family: KernelFamily,
    hyper: KernelHyper,
    mu: f64,
) -> Result<Vec<f64>> {
    let m = basis.eigenvalues.len();
    if beta.len() != m || basis.values.cols() != m {
        return Err(Error::Shape(format!("{} weights for {} basis functions", beta.len(), m)));
    }
    let w: Vec<f64> = basis
        .eigenvalues
        .iter()
        .zip(beta)
        .map(|(l, b)| family.spectral(l.sqrt(), hyper).sqrt() * b)
        .collect();
    Ok((0..basis.values.rows())
        .map(|i| mu + basis.values.row(i).iter().zip(&w).map(|(p, w)| p * w).sum::<f64>())
        .collect())
}

/// Exact Gram matrix `K[i][j] = k(|x_i - x_j|)`.
pub fn gram_matrix(x: &[f64], family: KernelFamily, hyper: KernelHyper) -> Matrix {
    let n = x.len();
    let mut k = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = family.covariance((x[i] - x[j]).abs(), hyper);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

/// Cholesky factor of `K + jitter I` with the jitter escalation policy.
/// Returns the factor and the absolute jitter used.
pub fn gram_cholesky(x: &[f64], family: KernelFamily, hyper: KernelHyper) -> Result<(Matrix, f64)> {
    let k = gram_matrix(x, family, hyper);
    let a2 = hyper.alpha * hyper.alpha;
    linalg::cholesky_jittered(&k, JITTER_START * a2, JITTER_MAX * a2).ok_or_else(|| {
        Error::Numerical(format!(
            "Gram matrix not positive definite with jitter up to {:e}",
            JITTER_MAX * a2
        ))
    })
}

/// `f_d = mu_d + chol(K_d + jitter I) beta_d` with whitened `beta_d`.
pub fn exact_gp_functions(x: &[f64], beta: &[f64], family: KernelFamily, hyper: KernelHyper, mu: f64) -> Result<Vec<f64>> {
    if beta.len() != x.len() {
        return Err(Error::Shape(format!("{} whitened values for {} inputs", beta.len(), x.len())));
    }
    if x.len() > 200 {
        eprintln!("warning: exact GP with N = {} inputs; cost grows cubically", x.len());
    }
    let (l, _) = gram_cholesky(x, family, hyper)?;
    Ok(linalg::lower_mul_vec(&l, beta).into_iter().map(|v| v + mu).collect())
}

/// Row-wise mixing `F*[i] = A F[i]`.
pub fn mix_outputs(a: &Matrix, f: &Matrix) -> Result<Matrix> {
    let d = a.rows();
    if a.cols() != d || f.cols() != d {
        return Err(Error::Shape(format!(
            "mixing matrix {}x{} with function matrix {}x{}",
            a.rows(),
            a.cols(),
            f.rows(),
            f.cols()
        )));
    }
    let mut out = Matrix::zeros(f.rows(), d);
    for i in 0..f.rows() {
        let fi = f.row(i);
        let oi = out.row_mut(i);
        for (dd, o) in oi.iter_mut().enumerate() {
            *o = a.row(dd)[..=dd].iter().zip(fi).map(|(x, y)| x * y).sum();
        }
    }
    Ok(out)
}

/// Gaussian log-likelihood of `y` around `f_star` with per-column SD.
pub fn log_likelihood(y: &Matrix, f_star: &Matrix, sigma: &[f64]) -> Result<f64> {
    if y.rows() != f_star.rows() || y.cols() != f_star.cols() || sigma.len() != y.cols() {
        return Err(Error::Shape("data, mean and noise SD disagree in shape".into()));
    }
    let d = y.cols();
    let mut total = 0.0;
    for i in 0..y.rows() {
        for dd in 0..d {
            let r = (y[(i, dd)] - f_star[(i, dd)]) / sigma[dd];
            total += -0.5 * r * r;
        }
    }
    let log_sigma: f64 = sigma.iter().map(|s| s.ln()).sum();
    Ok(total - y.rows() as f64 * (log_sigma + d as f64 * HALF_LN_2PI))
}

/// Log-density of the noisy measurements `x_tilde` given latent `x`.
pub fn log_latent_prior(x: &[f64], x_tilde: &[f64], s: f64) -> Result<f64> {
    if x.len() != x_tilde.len() {
        return Err(Error::Shape(format!("{} latent inputs, {} measurements", x.len(), x_tilde.len())));
    }
    Ok(x.iter().zip(x_tilde).map(|(xi, ti)| normal_log_density(*ti, *xi, s)).sum())
}
