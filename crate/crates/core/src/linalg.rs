//! Dense complex matrices sized for per-cell problems (a few dozen rows).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::math::{sqrt, C64};

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        check_len("matrix data", rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Builds an `n × columns.len()` matrix whose columns are the given vectors.
    pub fn from_columns(n: usize, columns: &[&[C64]]) -> Result<Self> {
        let mut m = Self::zeros(n, columns.len());
        for (c, col) in columns.iter().enumerate() {
            check_len("matrix column", n, col.len())?;
            for (r, v) in col.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<C64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)].conj();
            }
        }
        t
    }

    pub fn matmul(&self, other: &CMat) -> Result<CMat> {
        check_len("matmul inner dimension", self.cols, other.rows)?;
        let mut out = CMat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.frobenius_norm_sqr())
    }

    /// Numerical rank by Gram-Schmidt on the columns of `self^T`'s rows,
    /// counting residual norms above `tol · ‖self‖_F`.
    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.frobenius_norm();
        if scale == 0.0 {
            return 0;
        }
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for r in 0..self.rows {
            let mut v: Vec<C64> = self.row(r).to_vec();
            for _ in 0..2 {
                for b in &basis {
                    let proj: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, bi) in v.iter_mut().zip(b) {
                        *vi -= proj * bi;
                    }
                }
            }
            let n = sqrt(v.iter().map(|x| x.norm_sqr()).sum());
            if n > tol * scale {
                basis.push(v.into_iter().map(|x| x / n).collect());
            }
        }
        basis.len()
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Kronecker product of two vectors: `out[i·b.len() + j] = a[i]·b[j]`.
pub fn kron(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

/// Thin QR factorisation `A = Q·R` of a tall matrix by modified Gram-Schmidt
/// with one re-orthogonalisation pass. Fails with [`Error::Singular`] when a
/// column is numerically dependent on the previous ones.
pub fn thin_qr(a: &CMat) -> Result<(CMat, CMat)> {
    let (n, q) = (a.rows(), a.cols());
    if q > n {
        return Err(Error::Singular);
    }
    let scale = a.frobenius_norm();
    if scale == 0.0 {
        return Err(Error::Singular);
    }
    let mut qm = CMat::zeros(n, q);
    let mut r = CMat::zeros(q, q);
    for c in 0..q {
        let mut v = a.column(c);
        for _ in 0..2 {
            for i in 0..c {
                let mut proj = C64::new(0.0, 0.0);
                for row in 0..n {
                    proj += qm[(row, i)].conj() * v[row];
                }
                for row in 0..n {
                    v[row] -= proj * qm[(row, i)];
                }
                r[(i, c)] += proj;
            }
        }
        let len = sqrt(norm_sqr(&v));
        if len <= 1e-12 * scale {
            return Err(Error::Singular);
        }
        r[(c, c)] = C64::new(len, 0.0);
        for row in 0..n {
            qm[(row, c)] = v[row] / len;
        }
    }
    Ok((qm, r))
}

/// Inverse of an upper-triangular matrix by back substitution.
pub fn upper_triangular_inverse(r: &CMat) -> Result<CMat> {
    let n = r.rows();
    check_len("triangular matrix columns", n, r.cols())?;
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        for i in (0..=col).rev() {
            let mut acc = if i == col {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            };
            for k in i + 1..=col {
                acc -= r[(i, k)] * inv[(k, col)];
            }
            let d = r[(i, i)];
            if d == C64::new(0.0, 0.0) {
                return Err(Error::Singular);
            }
            inv[(i, col)] = acc / d;
        }
    }
    Ok(inv)
}

/// Inverse of a Hermitian positive-definite matrix via Cholesky.
pub fn hpd_inverse(a: &CMat) -> Result<CMat> {
    let n = a.rows();
    check_len("hermitian matrix columns", n, a.cols())?;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::Singular);
        }
        let d = sqrt(d);
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    // A^{-1} = L^{-H} L^{-1}; L^H is upper triangular.
    let linv_h = upper_triangular_inverse(&l.conj_transpose())?;
    linv_h.matmul(&linv_h.conj_transpose())
}
