//! Dense `D x D` operators in the eigenbasis of the undriven Hamiltonian.
//!
//! Vectorization is column-stacking throughout the crate: entry `(i, j)` of a
//! `D x D` operator lands at position `j * D + i`. This coincides with the
//! column-major storage nalgebra already uses.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Default tolerance for the Hermiticity check.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    /// Wraps a square matrix.
    pub fn from_matrix(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Operator(m))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Operator(DMatrix::from_fn(dim, dim, f))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        Operator::from_fn(d, |i, j| if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// `c |n><m|`.
    pub fn ket_bra(dim: usize, n: usize, m: usize, c: C64) -> Self {
        let mut op = Operator::zeros(dim);
        op.0[(n, m)] = c;
        op
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.0[(i, j)] = v;
    }

    pub fn adjoint(&self) -> Self {
        Operator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius_norm(self)
    }

    pub fn scale(&self, c: C64) -> Self {
        Operator(&self.0 * c)
    }

    pub fn dot(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0)
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.0[(i, j)] - self.0[(j, i)].conj()).norm() <= tol))
    }

    /// `(A + A^dagger) / 2`.
    pub fn hermitian_part(&self) -> Operator {
        Operator((&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0))
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.0[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().0.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Density-matrix check: Hermitian, unit trace and no eigenvalue below `-tol`.
    pub fn is_density_matrix(&self, tol: f64) -> bool {
        self.is_hermitian(tol)
            && (self.trace() - C64::new(1.0, 0.0)).norm() <= tol
            && self.hermitian_eigenvalues().first().is_some_and(|&e| e >= -tol)
    }

    /// Column-stacking vectorization.
    pub fn vectorize(&self) -> DVector<C64> {
        vectorize(self)
    }
}

/// Column-stacking vectorization, `vec(X)[j * D + i] = X[i, j]`.
pub fn vectorize(op: &Operator) -> DVector<C64> {
    DVector::from_column_slice(op.0.as_slice())
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &DVector<C64>, dim: usize) -> Result<Operator> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(Operator(DMatrix::from_column_slice(dim, dim, v.as_slice())))
}

pub fn frobenius_norm(op: &Operator) -> f64 {
    op.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        self.dot(rhs)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}
