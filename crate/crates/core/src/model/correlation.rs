//! Cholesky factors of correlation matrices from unconstrained coordinates.
//!
//! Each coordinate maps through `tanh` to a canonical partial correlation
//! `z`. Row `i` of the factor is `A[i][j] = z_ij w_ij` for `j < i` and
//! `A[i][i] = w_ii`, where `w_ij = prod_{k<j} sqrt(1 - z_ik^2)`, so every row
//! has unit norm. Coordinates are ordered row by row over the strict lower
//! triangle.

use crate::linalg::Matrix;

/// Number of free coordinates for a `d x d` correlation matrix.
pub fn num_coordinates(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// `log(1 - tanh(y)^2)`, stable for large `|y|`.
#[inline]
fn log1m_tanh_sq(y: f64) -> f64 {
    let a = y.abs();
    -2.0 * (a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2)
}

/// Factor and log-Jacobian of the map from coordinates to the strict lower
/// triangle of the factor.
pub fn constrain(coords: &[f64], d: usize) -> (Matrix, f64) {
    debug_assert_eq!(coords.len(), num_coordinates(d));
    let mut a = Matrix::zeros(d, d);
    let mut log_jac = 0.0;
    if d == 0 {
        return (a, 0.0);
    }
    a[(0, 0)] = 1.0;
    let mut idx = 0;
    for i in 1..d {
        // log w_j accumulated along the row.
        let mut log_w: f64 = 0.0;
        for j in 0..i {
            let y = coords[idx];
            idx += 1;
            let z = y.tanh();
            let l1mz2 = log1m_tanh_sq(y);
            a[(i, j)] = z * log_w.exp();
            log_jac += l1mz2;
            if j >= 1 {
                log_jac += log_w;
            }
            log_w += 0.5 * l1mz2;
        }
        a[(i, i)] = log_w.exp();
    }
    (a, log_jac)
}

/// Inverse of [`constrain`].
///
/// Works from tail norms of each row, `w_j = |A[i][j..=i]|`, so the
/// recovered coordinates stay accurate when partial correlations approach 1.
pub fn unconstrain(a: &Matrix) -> Vec<f64> {
    let d = a.rows();
    let mut coords = Vec::with_capacity(num_coordinates(d));
    for i in 1..d {
        let row = &a.row(i)[..=i];
        let mut tail = vec![0.0; i + 2];
        for j in (0..=i).rev() {
            tail[j] = tail[j + 1] + row[j] * row[j];
        }
        for j in 0..i {
            let w = tail[j].sqrt();
            let t = tail[j + 1].sqrt();
            let v = row[j];
            coords.push(v.signum() * ((w + v.abs()) / t).ln());
        }
    }
    coords
}

/// Gradient with respect to the coordinates of
/// `sum_ij a_bar[i][j] A[i][j] + sum_i diag_coef[i] log A[i][i] + log_jacobian`.
pub fn backward(coords: &[f64], a: &Matrix, a_bar: &Matrix, diag_coef: &[f64], out: &mut [f64]) {
    let d = a.rows();
    let mut idx = 0;
    for i in 1..d {
        // suffix[k] = sum_{j=k..=i} a_bar[i][j] A[i][j]
        let mut suffix = vec![0.0; i + 2];
        for j in (0..=i).rev() {
            suffix[j] = suffix[j + 1] + a_bar[(i, j)] * a[(i, j)];
        }
        let mut log_w: f64 = 0.0;
        for k in 0..i {
            let y = coords[idx];
            let z = y.tanh();
            let one_minus = 1.0 - z * z;
            let w = log_w.exp();
            let tail = suffix[k + 1] + diag_coef[i] + (i - 1 - k) as f64;
            out[idx] = one_minus * a_bar[(i, k)] * w - z * tail - 2.0 * z;
            log_w += 0.5 * log1m_tanh_sq(y);
            idx += 1;
        }
    }
}

/// `(eta - 1) log det C` for `C = A A^T`; the LKJ density up to its constant.
pub fn lkj_log_density(a: &Matrix, eta: f64) -> f64 {
    if eta == 1.0 {
        return 0.0;
    }
    let d = a.rows();
    2.0 * (eta - 1.0) * (1..d).map(|i| a[(i, i)].ln()).sum::<f64>()
}

/// Log-Jacobian of `A -> A A^T` restricted to correlation matrices.
pub fn cholesky_jacobian(a: &Matrix) -> f64 {
    let d = a.rows();
    (1..d).map(|i| (d - i - 1) as f64 * a[(i, i)].ln()).sum()
}

/// Coefficients of `log A[i][i]` in `lkj_log_density + cholesky_jacobian`.
pub fn lkj_diag_coefficients(d: usize, eta: f64) -> Vec<f64> {
    (0..d)
        .map(|i| if i == 0 { 0.0 } else { (d - i - 1) as f64 + 2.0 * (eta - 1.0) })
        .collect()
}

/// `A A^T`.
pub fn correlation_from_factor(a: &Matrix) -> Matrix {
    let d = a.rows();
    let mut c = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v: f64 = a.row(i)[..=j].iter().zip(&a.row(j)[..=j]).map(|(x, y)| x * y).sum();
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}
