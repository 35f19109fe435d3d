//! Dense row-major matrices and the Householder QR used by the estimator.

use std::ops::{Index, IndexMut};

use serde::{Serialize, Serializer};

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

    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// # Panics
    /// On incompatible shapes.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn scale(&mut self, factor: f64) {
        for x in &mut self.data {
            *x *= factor;
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Principal submatrix on the given indices.
    pub fn select(&self, idx: &[usize]) -> Matrix {
        let mut m = Matrix::zeros(idx.len(), idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(a, b)] = self[(i, j)];
            }
        }
        m
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

/// Compact Householder QR of an `n x k` matrix with `n >= k`.
///
/// The reflectors are stored below the diagonal of `packed`, `R` on and
/// above it, with the diagonal of `R` held separately in `r_diag`.
#[derive(Debug, Clone)]
pub struct Qr {
    packed: Matrix,
    r_diag: Vec<f64>,
}

impl Qr {
    pub fn new(a: &Matrix) -> Self {
        let (n, k) = (a.rows(), a.cols());
        assert!(n >= k, "QR needs at least as many rows as columns");
        let mut qr = a.clone();
        let mut r_diag = vec![0.0; k];
        for j in 0..k {
            let norm = (j..n).map(|i| qr[(i, j)] * qr[(i, j)]).sum::<f64>().sqrt();
            if norm == 0.0 {
                r_diag[j] = 0.0;
                continue;
            }
            let alpha = if qr[(j, j)] > 0.0 { -norm } else { norm };
            for i in j..n {
                qr[(i, j)] /= -alpha;
            }
            qr[(j, j)] += 1.0;
            for c in (j + 1)..k {
                let s: f64 = (j..n).map(|i| qr[(i, j)] * qr[(i, c)]).sum::<f64>() / qr[(j, j)];
                for i in j..n {
                    let v = qr[(i, j)];
                    qr[(i, c)] -= s * v;
                }
            }
            r_diag[j] = alpha;
        }
        Self { packed: qr, r_diag }
    }

    pub fn r_diagonal(&self) -> &[f64] {
        &self.r_diag
    }

    /// Computes `Qᵀ b`.
    pub fn qt_mul(&self, b: &[f64]) -> Vec<f64> {
        let (n, k) = (self.packed.rows(), self.packed.cols());
        assert_eq!(b.len(), n);
        let mut y = b.to_vec();
        for j in 0..k {
            let pivot = self.packed[(j, j)];
            if self.r_diag[j] == 0.0 || pivot == 0.0 {
                continue;
            }
            let s: f64 = (j..n).map(|i| self.packed[(i, j)] * y[i]).sum::<f64>() / pivot;
            for (i, yi) in y.iter_mut().enumerate().skip(j) {
                *yi -= s * self.packed[(i, j)];
            }
        }
        y
    }

    /// The `k x k` upper-triangular factor.
    pub fn r(&self) -> Matrix {
        let k = self.packed.cols();
        let mut r = Matrix::zeros(k, k);
        for i in 0..k {
            r[(i, i)] = self.r_diag[i];
            for j in (i + 1)..k {
                r[(i, j)] = self.packed[(i, j)];
            }
        }
        r
    }
}

/// Solves `R x = b` for upper-triangular `R` by back substitution.
pub fn solve_upper(r: &Matrix, b: &[f64]) -> Vec<f64> {
    let k = r.cols();
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = ((i + 1)..k).map(|j| r[(i, j)] * x[j]).sum();
        x[i] = (b[i] - s) / r[(i, i)];
    }
    x
}

/// Inverse of an upper-triangular matrix.
pub fn invert_upper(r: &Matrix) -> Matrix {
    let k = r.cols();
    let mut inv = Matrix::zeros(k, k);
    for c in 0..k {
        let mut e = vec![0.0; k];
        e[c] = 1.0;
        let col = solve_upper(r, &e);
        for (i, v) in col.into_iter().enumerate() {
            inv[(i, c)] = v;
        }
    }
    inv
}

/// Cholesky solve of a symmetric positive definite system. Returns `None`
/// when a pivot falls below `tol * max(diag)`.
pub fn cholesky_solve(a: &Matrix, b: &[f64], tol: f64) -> Option<Vec<f64>> {
    let n = a.rows();
    let scale = a.diagonal().into_iter().fold(0.0_f64, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|p| l[(j, p)] * l[(j, p)]).sum::<f64>();
        if !(d > tol * scale) {
            return None;
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let s = a[(i, j)] - (0..j).map(|p| l[(i, p)] * l[(j, p)]).sum::<f64>();
            l[(i, j)] = s / d;
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|p| l[(i, p)] * z[p]).sum();
        z[i] = (b[i] - s) / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|p| l[(p, i)] * x[p]).sum();
        x[i] = (z[i] - s) / l[(i, i)];
    }
    Some(x)
}
