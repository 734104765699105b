//! Steady-state and shifted linear solves for Liouvillians.

use nalgebra::{DMatrix, DVector, LU};

use crate::error::{Error, Result};
use crate::operator::{devectorize, vectorize, Operator, C64};
use crate::superop::Superoperator;

/// How the singular zero-shift system `L0 x = b` is solved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroShiftMethod {
    /// Replace the redundant `(0,0)` equation by `Tr x = 0` and LU-factorize.
    #[default]
    Bordered,
    /// Minimum-norm least squares (LSQR on the sparse operator), then the
    /// traceless projection `x - Tr(x) rho_s`.
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Singular values below `nullspace_tol * sigma_max` count as zero.
    pub nullspace_tol: f64,
    /// Pivot-ratio condition estimate above which the steady-state solve
    /// falls back to the smallest singular vector.
    pub condition_limit: f64,
    pub zero_shift: ZeroShiftMethod,
    /// Relative stopping tolerance for LSQR.
    pub lsqr_tol: f64,
    pub lsqr_max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            nullspace_tol: 1e-10,
            condition_limit: 1e12,
            zero_shift: ZeroShiftMethod::Bordered,
            lsqr_tol: 1e-14,
            lsqr_max_iterations: 20_000,
        }
    }
}

/// Indices of the diagonal entries in a column-stacked `D x D` operator.
fn diagonal_indices(dim: usize) -> impl Iterator<Item = usize> {
    (0..dim).map(move |i| i * dim + i)
}

/// Replaces row 0 (the `(0,0)` equation) with the trace functional.
fn border_with_trace(mut m: DMatrix<C64>, dim: usize) -> DMatrix<C64> {
    m.row_mut(0).fill(C64::new(0.0, 0.0));
    for k in diagonal_indices(dim) {
        m[(0, k)] = C64::new(1.0, 0.0);
    }
    m
}

/// Ratio of largest to smallest pivot magnitude; a cheap lower bound on the
/// condition number.
fn pivot_condition(lu: &LU<C64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..u.nrows() {
        let p = u[(i, i)].norm();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn normalize_density(mut rho: Operator) -> Operator {
    let tr = rho.trace();
    rho = rho.scale(C64::new(1.0, 0.0) / tr);
    rho.hermitian_part()
}

/// Solves `L rho = 0` with `Tr rho = 1` for a Liouvillian with a
/// one-dimensional kernel.
pub fn solve_steady_state(l: &Superoperator) -> Result<Operator> {
    solve_steady_state_with(l, &SolverOptions::default())
}

pub fn solve_steady_state_with(l: &Superoperator, opts: &SolverOptions) -> Result<Operator> {
    let d = l.dim();
    if d == 1 {
        return Ok(Operator::identity(1));
    }
    let dense = l.to_dense();
    let bordered = border_with_trace(dense.clone(), d);
    let lu = bordered.lu();
    if pivot_condition(&lu) <= opts.condition_limit {
        let mut rhs = DVector::zeros(d * d);
        rhs[0] = C64::new(1.0, 0.0);
        if let Some(x) = lu.solve(&rhs) {
            return Ok(normalize_density(devectorize(&x, d)?));
        }
    }
    log::debug!("steady state: bordered system ill-conditioned, using singular vectors");
    nullspace_vector(dense, d, opts)
}

fn nullspace_vector(dense: DMatrix<C64>, d: usize, opts: &SolverOptions) -> Result<Operator> {
    let svd = dense.svd(false, true);
    let v_t = svd.v_t.as_ref().ok_or(Error::Diagonalization)?;
    let sv = &svd.singular_values;
    let smax = sv.max();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[a].total_cmp(&sv[b]));
    let (s0, s1) = (sv[order[0]], sv[order[1]]);
    let thresh = opts.nullspace_tol * smax;
    if s0 <= thresh && s1 <= thresh {
        return Err(Error::NonUniqueSteadyState(s0 / smax, s1 / smax));
    }
    let x = DVector::from_iterator(d * d, v_t.row(order[0]).iter().map(|z| z.conj()));
    let rho = devectorize(&x, d)?;
    if rho.trace().norm() < f64::EPSILON {
        return Err(Error::NonUniqueSteadyState(s0 / smax, s1 / smax));
    }
    Ok(normalize_density(rho))
}

/// Solver for `(L0 - i shift) x = b` around a fixed Liouvillian and its
/// steady state.
pub struct ShiftedSolver<'a> {
    l0: &'a Superoperator,
    dense: DMatrix<C64>,
    rho_s: &'a Operator,
    opts: SolverOptions,
}

enum Kind {
    Regular(LU<C64, nalgebra::Dyn, nalgebra::Dyn>),
    Bordered(LU<C64, nalgebra::Dyn, nalgebra::Dyn>),
    LeastSquares,
}

/// A factorization for one shift value.
pub struct ShiftedFactor<'s, 'a> {
    solver: &'s ShiftedSolver<'a>,
    shift: f64,
    kind: Kind,
}

impl<'a> ShiftedSolver<'a> {
    pub fn new(l0: &'a Superoperator, rho_s: &'a Operator, opts: SolverOptions) -> Result<Self> {
        if rho_s.dim() != l0.dim() {
            return Err(Error::DimensionMismatch {
                expected: l0.dim(),
                found: rho_s.dim(),
            });
        }
        Ok(ShiftedSolver {
            l0,
            dense: l0.to_dense(),
            rho_s,
            opts,
        })
    }

    pub fn factor(&self, shift: f64) -> Result<ShiftedFactor<'_, 'a>> {
        let d = self.l0.dim();
        let kind = if shift != 0.0 {
            let mut m = self.dense.clone();
            let s = C64::new(0.0, -shift);
            for i in 0..d * d {
                m[(i, i)] += s;
            }
            Kind::Regular(m.lu())
        } else {
            match self.opts.zero_shift {
                ZeroShiftMethod::Bordered => Kind::Bordered(border_with_trace(self.dense.clone(), d).lu()),
                ZeroShiftMethod::LeastSquares => Kind::LeastSquares,
            }
        };
        Ok(ShiftedFactor { solver: self, shift, kind })
    }

    pub fn solve(&self, shift: f64, rhs: &Operator) -> Result<Operator> {
        self.factor(shift)?.solve(rhs)
    }
}

impl ShiftedFactor<'_, '_> {
    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn solve(&self, rhs: &Operator) -> Result<Operator> {
        let s = self.solver;
        let d = s.l0.dim();
        if rhs.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rhs.dim(),
            });
        }
        let b = vectorize(rhs);
        let singular = || Error::SolverFailure {
            iterations: 0,
            residual: f64::INFINITY,
        };
        match &self.kind {
            Kind::Regular(lu) => {
                let x = lu.solve(&b).ok_or_else(singular)?;
                devectorize(&x, d)
            }
            Kind::Bordered(lu) => {
                // drop the component outside range(L0) = traceless matrices
                let tr = rhs.trace() / d as f64;
                let mut b = b;
                for k in diagonal_indices(d) {
                    b[k] -= tr;
                }
                b[0] = C64::new(0.0, 0.0);
                let x = lu.solve(&b).ok_or_else(singular)?;
                devectorize(&x, d)
            }
            Kind::LeastSquares => {
                let x = lsqr(s.l0, &b, s.opts.lsqr_tol, s.opts.lsqr_max_iterations)?;
                let x = devectorize(&x, d)?;
                let tr = x.trace();
                Ok(&x - &s.rho_s.scale(tr))
            }
        }
    }
}

/// Solves `(L0 - i shift) x = rhs`; for `shift == 0` returns the traceless
/// least-squares solution.
pub fn solve_shifted(l0: &Superoperator, rho_s: &Operator, shift: f64, rhs: &Operator, opts: &SolverOptions) -> Result<Operator> {
    ShiftedSolver::new(l0, rho_s, opts.clone())?.solve(shift, rhs)
}

/// LSQR (Paige & Saunders) for `min ||A x - b||`, started from zero so the
/// iterates converge to the minimum-norm solution.
pub fn lsqr(a: &Superoperator, b: &DVector<C64>, tol: f64, max_iterations: usize) -> Result<DVector<C64>> {
    let n = a.size();
    let mut x = DVector::<C64>::zeros(n);
    let bnorm = b.norm();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let anorm = a.frobenius_norm();
    let mut u = b / C64::new(bnorm, 0.0);
    let mut beta = bnorm;
    let mut v = a.apply_adjoint(&u);
    let mut alpha = v.norm();
    if alpha == 0.0 {
        return Ok(x);
    }
    v /= C64::new(alpha, 0.0);
    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;

    for it in 1..=max_iterations {
        u = a.apply(&v) - &u * C64::new(alpha, 0.0);
        beta = u.norm();
        if beta > 0.0 {
            u /= C64::new(beta, 0.0);
        }
        v = a.apply_adjoint(&u) - &v * C64::new(beta, 0.0);
        alpha = v.norm();
        if alpha > 0.0 {
            v /= C64::new(alpha, 0.0);
        }

        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        x += &w * C64::new(phi / rho, 0.0);
        w = &v - &w * C64::new(theta / rho, 0.0);

        let residual = phibar;
        let normal_residual = phibar * alpha * c.abs();
        if residual <= tol * bnorm || normal_residual <= tol * anorm * residual.max(tol * bnorm) {
            log::trace!("lsqr converged in {it} iterations");
            return Ok(x);
        }
    }
    let r = a.apply(&x) - b;
    Err(Error::SolverFailure {
        iterations: max_iterations,
        residual: r.norm() / bnorm,
    })
}
