//! Dense complex operators on `(ℂ^N)^{⊗L}` and site-local products.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(DMatrix<Complex64>);

impl OperatorMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}x{} operator is not square", m.nrows(), m.ncols())));
        }
        Ok(OperatorMatrix(m))
    }

    pub fn zeros(dim: usize) -> Self {
        OperatorMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        OperatorMatrix(DMatrix::identity(dim, dim))
    }

    pub fn scalar(dim: usize, c: Complex64) -> Self {
        OperatorMatrix(DMatrix::from_diagonal_element(dim, dim, c))
    }

    /// Matrix unit `E_{ij}` on `ℂ^n`, 0-based.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = Complex64::new(1.0, 0.0);
        OperatorMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn kron(&self, other: &Self) -> Self {
        OperatorMatrix(self.0.kronecker(&other.0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        OperatorMatrix(&self.0 * c)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(OperatorMatrix)
    }

    /// Ratio of extreme singular values; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let sv = self.0.singular_values();
        let max = sv.max();
        let min = sv.min();
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.0 * v
    }

    pub fn commutator(&self, other: &Self) -> Self {
        OperatorMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Largest absolute entry strictly below (`lower = true`) or above the diagonal.
    pub fn off_triangle_max(&self, lower: bool) -> f64 {
        let n = self.dim();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                if (lower && i > j) || (!lower && i < j) {
                    worst = worst.max(self.0[(i, j)].norm());
                }
            }
        }
        worst
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 - &rhs.0)
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: Self) -> OperatorMatrix {
        OperatorMatrix(&self.0 * &rhs.0)
    }
}

/// `‖a - b‖ / max(‖a‖, ‖b‖)` in Frobenius norm, zero when both vanish.
pub fn relative_residual(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Sparse operator on one site: `(row, col, value)` entries of an `n×n` matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalOp(pub Vec<(usize, usize, Complex64)>);

impl LocalOp {
    pub fn dense(&self, n: usize) -> OperatorMatrix {
        let mut m = DMatrix::zeros(n, n);
        for &(r, c, v) in &self.0 {
            m[(r, c)] += v;
        }
        OperatorMatrix(m)
    }
}

/// Tensor-product layout `(ℂ^n)^{⊗len}` with site 0 the most significant digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SiteLayout {
    pub n: usize,
    pub len: usize,
}

impl SiteLayout {
    pub fn dim(&self) -> usize {
        self.n.pow(self.len as u32)
    }

    pub fn stride(&self, site: usize) -> usize {
        self.n.pow((self.len - 1 - site) as u32)
    }

    pub fn digit(&self, index: usize, site: usize) -> usize {
        (index / self.stride(site)) % self.n
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.len).map(|s| self.digit(index, s)).collect()
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &d| acc * self.n + d)
    }

    /// Occupation number of each color in basis state `index`.
    pub fn occupancy(&self, index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.n];
        for d in self.digits(index) {
            occ[d] += 1;
        }
        occ
    }

    /// `m · X_site` without forming `X_site`.
    pub fn right_mul_local(&self, m: &DMatrix<Complex64>, site: usize, x: &LocalOp) -> DMatrix<Complex64> {
        let dim = self.dim();
        let stride = self.stride(site);
        let mut out = DMatrix::zeros(m.nrows(), dim);
        for col in 0..dim {
            let sp = self.digit(col, site);
            for &(s, s2, v) in &x.0 {
                if s2 != sp {
                    continue;
                }
                let src = col - sp * stride + s * stride;
                let mut dst = out.column_mut(col);
                dst.axpy(v, &m.column(src), Complex64::new(1.0, 0.0));
            }
        }
        out
    }

    /// Dense `1 ⊗ … ⊗ X ⊗ … ⊗ 1` with `X` on `site`.
    pub fn embed(&self, site: usize, x: &OperatorMatrix) -> OperatorMatrix {
        let left = OperatorMatrix::identity(self.n.pow(site as u32));
        let right = OperatorMatrix::identity(self.stride(site));
        left.kron(x).kron(&right)
    }
}
