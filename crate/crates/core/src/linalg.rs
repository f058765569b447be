//! Small dense row-major matrices and the handful of factorizations the
//! models need. Sizes here are tens to a few hundred, so plain loops win.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
///
/// Only the lower triangle of `a` is read. Returns `None` when a pivot is
/// not strictly positive.
pub fn cholesky(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    debug_assert_eq!(n, a.cols());
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let lj = j * n;
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l.data[lj + k] * l.data[lj + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l.data[lj + j] = ljj;
        for i in (j + 1)..n {
            let li = i * n;
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l.data[li + k] * l.data[lj + k];
            }
            l.data[li + j] = s / ljj;
        }
    }
    Some(l)
}

/// Cholesky with diagonal jitter escalation: starts at `start` and multiplies
/// by ten up to `max`. Returns the factor and the jitter that succeeded.
pub fn cholesky_jittered(a: &Matrix, start: f64, max: f64) -> Option<(Matrix, f64)> {
    let mut jitter = start;
    let mut work = a.clone();
    loop {
        for i in 0..a.rows() {
            work[(i, i)] = a[(i, i)] + jitter;
        }
        if let Some(l) = cholesky(&work) {
            return Some((l, jitter));
        }
        if jitter >= max * (1.0 - 1e-12) {
            return None;
        }
        jitter = (jitter * 10.0).min(max);
    }
}

/// Solves `L^T X = B` in place for upper-triangular `L^T`, column by column of `B`.
pub fn solve_lower_transpose_in_place(l: &Matrix, b: &mut Matrix) {
    let n = l.rows();
    for c in 0..b.cols() {
        for i in (0..n).rev() {
            let mut s = b[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)] * b[(k, c)];
            }
            b[(i, c)] = s / l[(i, i)];
        }
    }
}

/// Solves `L x = b` for lower-triangular `L`.
pub fn solve_lower(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[(i, k)] * x[k];
        }
        x[i] = s / l[(i, i)];
    }
    x
}

/// `L * v` for lower-triangular `L`.
pub fn lower_mul_vec(l: &Matrix, v: &[f64]) -> Vec<f64> {
    let n = l.rows();
    (0..n)
        .map(|i| l.row(i)[..=i].iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Reverse-mode sensitivity of the Cholesky factorization.
///
/// Given `L = chol(K)` and the adjoint `l_bar` of a scalar objective with
/// respect to the lower triangle of `L`, returns the symmetric adjoint
/// `K_bar` so that `d objective = sum_ij K_bar[i,j] dK[i,j]` for symmetric
/// perturbations `dK`.
pub fn cholesky_backward(l: &Matrix, l_bar: &Matrix) -> Matrix {
    let n = l.rows();
    let lv = &l.data;
    // Unblocked reverse sweep over columns; `g` starts as the lower triangle
    // of `l_bar` and ends as the lower-triangle adjoint of `K`.
    let mut g = vec![0.0; n * n];
    for i in 0..n {
        g[i * n..i * n + i + 1].copy_from_slice(&l_bar.data[i * n..i * n + i + 1]);
    }
    for j in (0..n).rev() {
        let ljj = lv[j * n + j];
        let mut dot = 0.0;
        for i in j + 1..n {
            dot += lv[i * n + j] * g[i * n + j];
        }
        g[j * n + j] -= dot / ljj;
        for i in j..n {
            g[i * n + j] /= ljj;
        }
        // g[j, :j] -= sum_{i >= j} g[i, j] L[i, :j]
        for i in j..n {
            let gij = g[i * n + j];
            if gij == 0.0 {
                continue;
            }
            for k in 0..j {
                g[j * n + k] -= gij * lv[i * n + k];
            }
        }
        // g[i, :j] -= g[i, j] L[j, :j] for i > j
        for i in j + 1..n {
            let gij = g[i * n + j];
            if gij == 0.0 {
                continue;
            }
            for k in 0..j {
                g[i * n + k] -= gij * lv[j * n + k];
            }
        }
        g[j * n + j] *= 0.5;
    }
    // Symmetric form: off-diagonal sensitivities are shared by (i, j) and (j, i).
    Matrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => g[i * n + i],
        std::cmp::Ordering::Greater => 0.5 * g[i * n + j],
        std::cmp::Ordering::Less => 0.5 * g[j * n + i],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> Matrix {
        let b = Matrix::from_fn(n, n, |i, j| ((i * 7 + j * 3) % 5) as f64 * 0.3 + if i == j { 1.0 } else { 0.0 });
        let mut a = b.matmul(&b.transpose()).unwrap();
        for i in 0..n {
            a[(i, i)] += 0.5;
        }
        a
    }

    #[test]
    fn cholesky_reconstructs() {
        let a = spd(6);
        let l = cholesky(&a).unwrap();
        let back = l.matmul(&l.transpose()).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(cholesky(&a).is_none());
    }

    #[test]
    fn jitter_escalates_for_singular_matrix() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let (_, jitter) = cholesky_jittered(&a, 1e-12, 1e-4).unwrap();
        assert!(jitter >= 1e-12);
        let neg = Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(cholesky_jittered(&neg, 1e-8, 1e-4).is_none());
    }

    #[test]
    fn backward_matches_finite_differences() {
        let n = 4;
        let a = spd(n);
        let weights = Matrix::from_fn(n, n, |i, j| ((i + 2 * j) as f64).sin());
        let objective = |m: &Matrix| -> f64 {
            let l = cholesky(m).unwrap();
            (0..n)
                .flat_map(|i| (0..=i).map(move |j| (i, j)))
                .map(|(i, j)| weights[(i, j)] * l[(i, j)])
                .sum()
        };
        let l = cholesky(&a).unwrap();
        let l_bar = Matrix::from_fn(n, n, |i, j| if j <= i { weights[(i, j)] } else { 0.0 });
        let k_bar = cholesky_backward(&l, &l_bar);
        let h = 1e-6;
        for i in 0..n {
            for j in 0..=i {
                let mut plus = a.clone();
                let mut minus = a.clone();
                plus[(i, j)] += h;
                minus[(i, j)] -= h;
                if i != j {
                    plus[(j, i)] += h;
                    minus[(j, i)] -= h;
                }
                let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
                let analytic = if i == j { k_bar[(i, i)] } else { 2.0 * k_bar[(i, j)] };
                assert!((fd - analytic).abs() < 1e-6, "({i},{j}) fd={fd} analytic={analytic}");
            }
        }
    }
}
