//! Sparse superoperators acting on column-stacked operators.
//!
//! With `vec(X)[j * D + i] = X[i, j]` the identities used here are
//! `vec(A X B) = (B^T (x) A) vec(X)`, so left multiplication is `I (x) A`
//! and right multiplication is `B^T (x) I`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::operator::{devectorize, vectorize, Operator, C64, I};

/// Entries with modulus at or below this are not stored.
const DROP_TOL: f64 = 0.0;

/// Square sparse matrix in compressed-row form, acting on `C^(D^2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Superoperator {
    pub fn zeros(dim: usize) -> Self {
        Superoperator {
            dim,
            row_ptr: vec![0; dim * dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let n = dim * dim;
        Self::from_triplets(dim, (0..n).map(|i| (i, i, C64::new(1.0, 0.0))))
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let n = dim * dim;
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); n];
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = C64::new(0.0, 0.0);
                while k < row.len() && row[k].0 == c {
                    v += row[k].1;
                    k += 1;
                }
                if v.norm() > DROP_TOL {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Superoperator { dim, row_ptr, cols, vals }
    }

    /// `A (x) B` for `D x D` matrices, skipping structural zeros.
    pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Self {
        let d = a.nrows();
        let nz = |m: &DMatrix<C64>| -> Vec<(usize, usize, C64)> {
            let mut out = Vec::new();
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    let v = m[(i, j)];
                    if v.norm() > DROP_TOL {
                        out.push((i, j, v));
                    }
                }
            }
            out
        };
        let (na, nb) = (nz(a), nz(b));
        let mut trip = Vec::with_capacity(na.len() * nb.len());
        for &(i, j, x) in &na {
            for &(k, l, y) in &nb {
                trip.push((i * d + k, j * d + l, x * y));
            }
        }
        Self::from_triplets(d, trip)
    }

    /// Superoperator of `X -> A X`.
    pub fn left(a: &Operator) -> Self {
        Self::kron(&DMatrix::identity(a.dim(), a.dim()), a.matrix())
    }

    /// Superoperator of `X -> X B`.
    pub fn right(b: &Operator) -> Self {
        Self::kron(&b.matrix().transpose(), &DMatrix::identity(b.dim(), b.dim()))
    }

    /// Superoperator of `X -> -i [H, X]`; `H` need not be Hermitian.
    pub fn commutator(h: &Operator) -> Self {
        Self::left(h).add(&Self::right(h), -1.0).scale(-I)
    }

    /// Hilbert-space dimension `D`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Matrix size `D^2`.
    pub fn size(&self) -> usize {
        self.dim * self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(row, col, value)` over stored entries.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.size()).flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k])))
    }

    /// `self + alpha * other`.
    pub fn add(&self, other: &Superoperator, alpha: impl Into<C64>) -> Superoperator {
        assert_eq!(self.dim, other.dim, "superoperator dimension mismatch");
        let alpha = alpha.into();
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets().map(|(r, c, v)| (r, c, v * alpha))))
    }

    pub fn scale(&self, alpha: impl Into<C64>) -> Superoperator {
        let alpha = alpha.into();
        Superoperator {
            vals: self.vals.iter().map(|v| v * alpha).collect(),
            ..self.clone()
        }
    }

    /// `self + alpha * identity`.
    pub fn shifted(&self, alpha: C64) -> Superoperator {
        let n = self.size();
        Self::from_triplets(self.dim, self.triplets().chain((0..n).map(|i| (i, i, alpha))))
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.size());
        self.apply_into(x, &mut y, C64::new(1.0, 0.0), false);
        y
    }

    /// `y = alpha * self * x` (or `y += ...` when `accumulate`).
    pub fn apply_into(&self, x: &DVector<C64>, y: &mut DVector<C64>, alpha: C64, accumulate: bool) {
        for r in 0..self.size() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            if accumulate {
                y[r] += alpha * acc;
            } else {
                y[r] = alpha * acc;
            }
        }
    }

    /// `self^dagger * x`.
    pub fn apply_adjoint(&self, x: &DVector<C64>) -> DVector<C64> {
        let mut y = DVector::zeros(self.size());
        for r in 0..self.size() {
            let xr = x[r];
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.cols[k]] += self.vals[k].conj() * xr;
            }
        }
        y
    }

    pub fn apply_op(&self, op: &Operator) -> Operator {
        devectorize(&self.apply(&vectorize(op)), op.dim()).expect("dimension checked by construction")
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Matrix form of `rate * D[A]`, with `D[A] rho = A rho A^dagger - {A^dagger A, rho} / 2`.
pub fn dissipator_superop(a: &Operator, rate: f64) -> Result<Superoperator> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::InvalidRate(rate));
    }
    let d = a.dim();
    let id = DMatrix::<C64>::identity(d, d);
    let ada = a.matrix().adjoint() * a.matrix();
    let jump = Superoperator::kron(&a.matrix().map(|z| z.conj()), a.matrix());
    let anti = Superoperator::kron(&id, &ada).add(&Superoperator::kron(&ada.transpose(), &id), 1.0);
    Ok(jump.add(&anti, -0.5).scale(rate))
}

/// Matrix form of `L rho = -i [h, rho] + sum_k rate_k D[A_k] rho`.
pub fn liouvillian<'a>(h: &Operator, channels: impl IntoIterator<Item = (&'a Operator, f64)>) -> Result<Superoperator> {
    let d = h.dim();
    let mut l = Superoperator::commutator(h);
    for (a, rate) in channels {
        if a.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: a.dim(),
            });
        }
        l = l.add(&dissipator_superop(a, rate)?, 1.0);
    }
    Ok(l)
}

/// Superoperator of `rho -> -i [c |n><m|, rho]`.
pub fn drive_commutator(dim: usize, n: usize, m: usize, c: C64) -> Superoperator {
    Superoperator::commutator(&Operator::ket_bra(dim, n, m, c))
}
