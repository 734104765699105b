//! Relevance parameters of individual drive terms and their ranking.
//!
//! The relevance of `V_nm |n><m|` is the Frobenius norm of the first-order
//! density-matrix response it induces around the current steady state,
//! `sqrt(2) ||rho_k||_F` with `(L0 - i k w_d) rho_k = -+ L_nm rho_s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{DriveTerm, LindbladModel};
use crate::operator::{Operator, C64, I};
use crate::solve::{ShiftedSolver, SolverOptions};
use crate::superop::{liouvillian, Superoperator};

/// Terms below this fraction of the largest relevance are treated as zero.
pub const RELEVANCE_FLOOR: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub n: usize,
    pub m: usize,
    pub relevance: f64,
}

/// Drive terms by descending relevance; ties ordered by `(n, m)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<RankEntry>,
    pub iteration: usize,
}

impl Ranking {
    /// A ranking in exactly the given order; relevances decrease linearly.
    /// Useful for replaying a fixed ordering through the graph builder.
    pub fn from_order(pairs: &[(usize, usize)]) -> Self {
        let k = pairs.len() as f64;
        Ranking {
            entries: pairs
                .iter()
                .enumerate()
                .map(|(i, &(n, m))| RankEntry {
                    n,
                    m,
                    relevance: (k - i as f64) / k,
                })
                .collect(),
            iteration: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entries.iter().map(|e| (e.n, e.m)).collect()
    }

    pub fn relevance(&self, n: usize, m: usize) -> Option<f64> {
        self.entries.iter().find(|e| e.n == n && e.m == m).map(|e| e.relevance)
    }
}

/// Closed-form first-iteration relevance around the thermal state:
/// `sqrt 2 |V_nm| |p_m - p_n| / |w_mn - w_d + i (G_n + G_m)/2|`.
pub fn bootstrap_relevance(populations: &[f64], total_rates: &[f64], energies: &[f64], omega_d: f64, term: &DriveTerm) -> f64 {
    let (n, m) = term.pair();
    let dp = (populations[m] - populations[n]).abs();
    if dp == 0.0 {
        return 0.0;
    }
    let denom = C64::new(energies[m] - energies[n] - omega_d, 0.5 * (total_rates[n] + total_rates[m]));
    std::f64::consts::SQRT_2 * term.amplitude.norm() * dp / denom.norm()
}

/// Bootstrap relevance for every drive term of `model`, in model order.
pub fn bootstrap_relevances(model: &LindbladModel) -> Vec<f64> {
    let p = model.thermal_populations();
    let g = model.total_rates();
    model
        .drives()
        .iter()
        .map(|t| bootstrap_relevance(&p, &g, model.energies(), model.drive_frequency(), t))
        .collect()
}

/// Whether a term is currently part of the effective Hamiltonian; selects the
/// sign of the inhomogeneity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermRole {
    Included,
    Excluded,
}

/// `-i [c |n><m|, rho]`.
pub fn drive_commutator(rho: &Operator, n: usize, m: usize, c: C64) -> Operator {
    let d = rho.dim();
    let mut out = Operator::zeros(d);
    // (|n><m| rho)_{n j} = rho_{m j};  (rho |n><m|)_{i m} = rho_{i n}
    for j in 0..d {
        let v = out.get(n, j) + c * rho.get(m, j);
        out.set(n, j, v);
    }
    for i in 0..d {
        let v = out.get(i, m) - c * rho.get(i, n);
        out.set(i, m, v);
    }
    out.scale(-I)
}

/// A term to evaluate in the current frame.
#[derive(Clone, Copy, Debug)]
pub struct FramedTerm {
    pub n: usize,
    pub m: usize,
    pub amplitude: C64,
    /// `k_n - k_m + 1`.
    pub k_shift: i64,
    pub role: TermRole,
}

/// Everything shared by the relevance evaluations of one iteration.
pub struct RelevanceContext<'a> {
    omega_d: f64,
    rho_s: &'a Operator,
    l0: Superoperator,
    opts: SolverOptions,
}

impl<'a> RelevanceContext<'a> {
    pub fn new(model: &LindbladModel, h: &Operator, rho_s: &'a Operator, opts: SolverOptions) -> Result<Self> {
        let l0 = liouvillian(h, model.channel_pairs())?;
        Ok(RelevanceContext {
            omega_d: model.drive_frequency(),
            rho_s,
            l0,
            opts,
        })
    }

    pub fn liouvillian(&self) -> &Superoperator {
        &self.l0
    }

    /// The Fourier component `rho_k` induced by one term.
    pub fn response(&self, term: &FramedTerm) -> Result<Operator> {
        let solver = ShiftedSolver::new(&self.l0, self.rho_s, self.opts.clone())?;
        let rhs = self.rhs(term);
        solver.solve(term.k_shift as f64 * self.omega_d, &rhs)
    }

    fn rhs(&self, term: &FramedTerm) -> Operator {
        let l_nm = drive_commutator(self.rho_s, term.n, term.m, term.amplitude);
        match term.role {
            TermRole::Included => l_nm.scale(C64::new(-1.0, 0.0)),
            TermRole::Excluded => l_nm,
        }
    }

    /// Relevance of every term; one factorization per distinct shift, terms
    /// sharing it are solved in parallel.
    pub fn evaluate(&self, terms: &[FramedTerm]) -> Result<Vec<f64>> {
        let solver = ShiftedSolver::new(&self.l0, self.rho_s, self.opts.clone())?;
        let mut shifts: Vec<i64> = terms.iter().map(|t| t.k_shift).collect();
        shifts.sort_unstable();
        shifts.dedup();
        let mut out = vec![0.0; terms.len()];
        for k in shifts {
            let factor = solver.factor(k as f64 * self.omega_d)?;
            let idx: Vec<usize> = (0..terms.len()).filter(|&i| terms[i].k_shift == k).collect();
            let vals: Vec<Result<f64>> = idx
                .par_iter()
                .map(|&i| {
                    let t = &terms[i];
                    if t.amplitude.norm() == 0.0 {
                        return Ok(0.0);
                    }
                    let rho_k = factor.solve(&self.rhs(t))?;
                    Ok(std::f64::consts::SQRT_2 * rho_k.frobenius_norm())
                })
                .collect();
            for (i, v) in idx.into_iter().zip(vals) {
                out[i] = v?;
            }
        }
        Ok(out)
    }
}

/// Relevance of a single term against the rotating-frame pair `(h, rho_s)`.
pub fn iterative_relevance(model: &LindbladModel, h: &Operator, rho_s: &Operator, term: &FramedTerm, opts: &SolverOptions) -> Result<f64> {
    let ctx = RelevanceContext::new(model, h, rho_s, opts.clone())?;
    Ok(ctx.evaluate(std::slice::from_ref(term))?[0])
}

/// Orders `(n, m, relevance)` triples, dropping zero and sub-floor entries.
pub fn rank(relevances: impl IntoIterator<Item = (usize, usize, f64)>, iteration: usize) -> Ranking {
    let all: Vec<(usize, usize, f64)> = relevances.into_iter().collect();
    let max = all.iter().map(|e| e.2).fold(0.0, f64::max);
    let mut entries: Vec<RankEntry> = all
        .into_iter()
        .filter(|&(_, _, r)| r > 0.0 && r > RELEVANCE_FLOOR * max)
        .map(|(n, m, relevance)| RankEntry { n, m, relevance })
        .collect();
    entries.sort_by(|a, b| b.relevance.total_cmp(&a.relevance).then((a.n, a.m).cmp(&(b.n, b.m))));
    Ranking { entries, iteration }
}
