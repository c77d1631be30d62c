//! Dense complex matrices and the handful of operations the rest of the
//! crate is built on: products, adjoints, Kronecker products, norms.
//!
//! Everything here is desk-scale (dimensions stay below a few dozen), so
//! storage is a plain row-major `Vec<Complex64>` and all algorithms are the
//! straightforward dense ones.

use num_complex::Complex64;

use crate::error::{CoreError, Result};

pub type C64 = Complex64;

/// Shorthand complex constructor used pervasively in tests and builders.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Diagonal matrix from real entries.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &x) in entries.iter().enumerate() {
            m[(i, i)] = c(x, 0.0);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        // ikj order keeps the inner loop contiguous in both operands.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::ZERO {
                    continue;
                }
                let src = k * other.cols;
                let dst = i * other.cols;
                for j in 0..other.cols {
                    out.data[dst + j] += a * other.data[src + j];
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conjugate(&self) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max elementwise deviation from Hermitian symmetry.
    pub fn hermiticity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(CoreError::Dimension(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let dev = self.hermiticity_deviation();
        if dev > tol {
            return Err(CoreError::NotHermitian { deviation: dev, tol });
        }
        Ok(())
    }

    /// Max elementwise deviation of U†U from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        assert!(self.is_square());
        let gram = self.adjoint().matmul(self);
        gram.max_abs_diff(&ComplexMatrix::identity(self.rows))
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<()> {
        if !self.is_square() {
            return Err(CoreError::Dimension(format!(
                "expected square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        let dev = self.unitarity_deviation();
        if dev > tol {
            return Err(CoreError::NotUnitary(dev));
        }
        Ok(())
    }

    /// (M + M†)/2, used to scrub roundoff before Hermitian algorithms.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Kronecker product with `a`'s indices outermost.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for ia in 0..a.rows() {
        for ja in 0..a.cols() {
            let va = a[(ia, ja)];
            if va == C64::ZERO {
                continue;
            }
            for ib in 0..b.rows() {
                for jb in 0..b.cols() {
                    out[(ia * b.rows() + ib, ja * b.cols() + jb)] = va * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a chain of factors, left to right.
pub fn tensor_chain(factors: &[&ComplexMatrix]) -> ComplexMatrix {
    assert!(!factors.is_empty());
    let mut acc = factors[0].clone();
    for f in &factors[1..] {
        acc = tensor(&acc, f);
    }
    acc
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), c(0.0, -1.0)], vec![c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn tensor_of_pauli_z_pair_has_alternating_diagonal() {
        let zz = tensor(&pauli_z(), &pauli_z());
        let expect = [1.0, -1.0, -1.0, 1.0];
        for (i, &e) in expect.iter().enumerate() {
            assert_eq!(zz[(i, i)], c(e, 0.0));
            for j in 0..4 {
                if i != j {
                    assert_eq!(zz[(i, j)], C64::ZERO);
                }
            }
        }
    }

    #[test]
    fn tensor_is_associative() {
        let a = pauli_x();
        let b = pauli_y();
        let d = ComplexMatrix::from_rows(&[
            vec![c(0.3, 0.1), c(-0.2, 0.7)],
            vec![c(1.1, -0.4), c(0.0, 0.9)],
        ]);
        let left = tensor(&tensor(&a, &b), &d);
        let right = tensor(&a, &tensor(&b, &d));
        assert_eq!(left, right);
    }

    #[test]
    fn tensor_matches_brute_force_kronecker_oracle() {
        // Independent element-by-element oracle: out[(ia*rb+ib, ja*cb+jb)]
        // = a[ia][ja] * b[ib][jb].
        let kron_oracle = |a: &ComplexMatrix, b: &ComplexMatrix| {
            let mut out = ComplexMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
            for ia in 0..a.rows() {
                for ja in 0..a.cols() {
                    for ib in 0..b.rows() {
                        for jb in 0..b.cols() {
                            out[(ia * b.rows() + ib, ja * b.cols() + jb)] =
                                a[(ia, ja)] * b[(ib, jb)];
                        }
                    }
                }
            }
            out
        };
        let y = pauli_y();
        assert_eq!(tensor(&y, &y), kron_oracle(&y, &y));
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.5, -0.6), c(0.3, 0.2)],
            vec![c(-0.1, 0.9), c(0.0, -0.2)],
        ]);
        assert_eq!(tensor(&y, &m), kron_oracle(&y, &m));
        assert_eq!(tensor(&m, &y), kron_oracle(&m, &y));
    }

    #[test]
    fn adjoint_of_product_reverses_order() {
        let a = pauli_x();
        let b = pauli_y();
        let ab = a.matmul(&b);
        assert!(ab.adjoint().max_abs_diff(&b.adjoint().matmul(&a.adjoint())) < 1e-15);
    }
}
