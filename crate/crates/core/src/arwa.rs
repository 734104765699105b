//! The adaptive iteration: rank drive terms, build the frame graph, solve for
//! the rotating-frame steady state, re-rank against it, repeat until the
//! frame stops changing.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{extract_frame, EdgeStyle, Frame, FrameGraph, GraphSignature, MergePolicy};
use crate::model::{DriveStatus, DriveTerm, LindbladModel, ObservableSpec};
use crate::operator::{vectorize, Operator, C64};
use crate::oracle::{long_time_average, OracleConfig};
use crate::relevance::{bootstrap_relevances, rank, FramedTerm, Ranking, RelevanceContext, TermRole};
use crate::solve::{solve_steady_state_with, SolverOptions};
use crate::superop::liouvillian;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ArwaConfig {
    pub max_iterations: usize,
    pub solver: SolverOptions,
    pub merge_policy: MergePolicy,
    /// Replaces every ranking by this fixed order (strongest first).
    pub fixed_ranking: Option<Vec<(usize, usize)>>,
}

impl Default for ArwaConfig {
    fn default() -> Self {
        ArwaConfig {
            max_iterations: 20,
            solver: SolverOptions::default(),
            merge_policy: MergePolicy::default(),
            fixed_ranking: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationSnapshot {
    pub iteration: usize,
    pub ranking: Ranking,
    pub graph: FrameGraph,
    pub solid: Vec<(usize, usize)>,
    pub dashed: Vec<(usize, usize)>,
    /// `||L(h) rho_s||_F / ||L(h)||_F`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArwaResult {
    pub rho_s: Operator,
    pub h: Operator,
    pub omega: Operator,
    pub labels: Vec<i64>,
    pub graph: FrameGraph,
    pub terms: Vec<DriveTerm>,
    pub iterations: Vec<IterationSnapshot>,
    pub converged: bool,
    /// A graph seen two or more iterations earlier came back.
    pub oscillating: bool,
}

impl ArwaResult {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }

    pub fn residual(&self) -> f64 {
        self.iterations.last().map_or(0.0, |s| s.residual)
    }

    pub fn dashed_terms(&self) -> impl Iterator<Item = &DriveTerm> {
        self.terms.iter().filter(|t| t.status == DriveStatus::Excluded)
    }

    pub fn dashed_count(&self) -> usize {
        self.graph.dashed_count()
    }

    /// `Tr(O rho_s)` in the rotating frame.
    pub fn expectation(&self, op: &Operator) -> C64 {
        op.dot(&self.rho_s).trace()
    }
}

/// Root-mean-square lab-frame magnitude of `<O>` over one drive period.
///
/// In the lab frame `rho_ij` rotates as `exp(-i w_d (k_i - k_j) t)`, so the
/// entries of `O rho_s` are grouped by `k_i - k_j` and the groups add in
/// quadrature. When all contributing entries share one frequency (the usual
/// case, e.g. `a` on a ladder) this is `|Tr(O rho_s)|`.
pub fn expectation_magnitude(result: &ArwaResult, obs: &ObservableSpec) -> Result<f64> {
    let d = result.rho_s.dim();
    if obs.op.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: obs.op.dim(),
        });
    }
    let mut groups: HashMap<i64, C64> = HashMap::new();
    for i in 0..d {
        for j in 0..d {
            let o = obs.op.get(j, i);
            if o.norm() == 0.0 {
                continue;
            }
            *groups.entry(result.labels[i] - result.labels[j]).or_default() += o * result.rho_s.get(i, j);
        }
    }
    Ok(groups.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
}

fn bootstrap_ranking(model: &LindbladModel) -> Ranking {
    let rel = bootstrap_relevances(model);
    rank(model.drives().iter().zip(rel).map(|(t, r)| (t.n, t.m, r)), 1)
}

fn iterative_ranking(
    model: &LindbladModel,
    graph: &FrameGraph,
    frame: &Frame,
    rho_s: &Operator,
    opts: &SolverOptions,
    iteration: usize,
) -> Result<Ranking> {
    let terms: Vec<FramedTerm> = model
        .drives()
        .iter()
        .map(|t| FramedTerm {
            n: t.n,
            m: t.m,
            amplitude: t.amplitude,
            k_shift: frame.labels[t.n] - frame.labels[t.m] + 1,
            role: match graph.edge(t.n, t.m) {
                Some(e) if e.style == EdgeStyle::Solid => TermRole::Included,
                _ => TermRole::Excluded,
            },
        })
        .collect();
    let ctx = RelevanceContext::new(model, &frame.h, rho_s, opts.clone())?;
    let rel = ctx.evaluate(&terms)?;
    Ok(rank(terms.iter().zip(rel).map(|(t, r)| (t.n, t.m, r)), iteration))
}

fn fixed_ranking(pairs: &[(usize, usize)], iteration: usize) -> Ranking {
    let mut r = Ranking::from_order(pairs);
    r.iteration = iteration;
    r
}

/// Steady state of the effective Hamiltonian of `frame`, with its relative
/// residual.
pub fn frame_steady_state(model: &LindbladModel, frame: &Frame, opts: &SolverOptions) -> Result<(Operator, f64)> {
    let l = liouvillian(&frame.h, model.channel_pairs())?;
    let rho = solve_steady_state_with(&l, opts)?;
    let lnorm = l.frobenius_norm();
    let residual = if lnorm > 0.0 {
        l.apply(&vectorize(&rho)).norm() / lnorm
    } else {
        0.0
    };
    Ok((rho, residual))
}

pub fn solve(model: &LindbladModel, config: &ArwaConfig) -> Result<ArwaResult> {
    if config.max_iterations == 0 {
        return Err(Error::config("max_iterations", "must be at least 1"));
    }
    let d = model.dim();
    let opts = &config.solver;

    if model.drives().is_empty() && config.fixed_ranking.is_none() {
        let graph = FrameGraph::with_policy(d, config.merge_policy);
        let frame = extract_frame(&graph, model)?;
        let (rho_s, residual) = frame_steady_state(model, &frame, opts).map_err(|e| e.at_iteration(1))?;
        let snapshot = IterationSnapshot {
            iteration: 1,
            ranking: Ranking::default(),
            graph: graph.clone(),
            solid: vec![],
            dashed: vec![],
            residual,
        };
        return Ok(ArwaResult {
            rho_s,
            h: frame.h,
            omega: frame.omega,
            labels: frame.labels,
            terms: vec![],
            graph,
            iterations: vec![snapshot],
            converged: true,
            oscillating: false,
        });
    }

    let mut snapshots: Vec<IterationSnapshot> = Vec::new();
    let mut seen: HashMap<GraphSignature, usize> = HashMap::new();
    let mut current: Option<(FrameGraph, Frame, Operator, GraphSignature)> = None;
    let mut converged = false;
    let mut oscillating = false;

    for it in 1..=config.max_iterations {
        let ranking = match (&config.fixed_ranking, &current) {
            (Some(pairs), _) => fixed_ranking(pairs, it),
            (None, None) => bootstrap_ranking(model),
            (None, Some((g, f, rho, _))) => iterative_ranking(model, g, f, rho, opts, it).map_err(|e| e.at_iteration(it))?,
        };
        let graph = FrameGraph::build_with_policy(&ranking, d, config.merge_policy).map_err(|e| e.at_iteration(it))?;
        let frame = extract_frame(&graph, model)?;
        let (rho, residual) = frame_steady_state(model, &frame, opts).map_err(|e| e.at_iteration(it))?;
        let sig = graph.signature();
        log::debug!(
            "iteration {it}: {} solid, {} dashed, residual {residual:.2e}",
            sig.solid.len(),
            graph.dashed_count()
        );
        snapshots.push(IterationSnapshot {
            iteration: it,
            ranking,
            solid: sig.solid.clone(),
            dashed: graph.dashed_edges().map(|e| (e.n, e.m)).collect(),
            graph: graph.clone(),
            residual,
        });

        let repeated = current.as_ref().is_some_and(|c| c.3 == sig);
        if repeated {
            converged = true;
        } else if let Some(first) = seen.get(&sig) {
            log::warn!("frame graph of iteration {it} repeats iteration {first}; stopping");
            oscillating = true;
        }
        seen.insert(sig.clone(), it);
        current = Some((graph, frame, rho, sig));
        if converged || oscillating {
            break;
        }
    }

    let (graph, frame, rho_s, _) = current.expect("at least one iteration ran");
    let terms = graph.classify(model);
    Ok(ArwaResult {
        rho_s,
        h: frame.h,
        omega: frame.omega,
        labels: frame.labels,
        graph,
        terms,
        iterations: snapshots,
        converged,
        oscillating,
    })
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub parameter: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub dashed_count: usize,
    /// Time-averaged oracle values, when requested.
    pub oracle: Option<Vec<f64>>,
    pub error: Option<String>,
}

impl SweepRow {
    fn failed(parameter: f64, err: &Error) -> Self {
        SweepRow {
            parameter,
            values: vec![],
            iterations: 0,
            converged: false,
            dashed_count: 0,
            oracle: None,
            error: Some(err.to_string()),
        }
    }
}

/// Solves one model per value; `build` maps the swept parameter to a model
/// and its observables. Rows come back in input order, failures are recorded
/// per row.
pub fn sweep<F>(values: &[f64], build: F, config: &ArwaConfig, oracle: Option<&OracleConfig>) -> Vec<SweepRow>
where
    F: Fn(f64) -> Result<(LindbladModel, Vec<ObservableSpec>)> + Sync,
{
    values
        .par_iter()
        .map(|&p| sweep_point(p, &build, config, oracle).unwrap_or_else(|e| SweepRow::failed(p, &e)))
        .collect()
}

fn sweep_point<F>(p: f64, build: &F, config: &ArwaConfig, oracle: Option<&OracleConfig>) -> Result<SweepRow>
where
    F: Fn(f64) -> Result<(LindbladModel, Vec<ObservableSpec>)>,
{
    let (model, obs) = build(p)?;
    let res = solve(&model, config)?;
    let values = obs.iter().map(|o| expectation_magnitude(&res, o)).collect::<Result<Vec<_>>>()?;
    let oracle = match oracle {
        Some(cfg) => Some(long_time_average(&model, &obs, cfg)?.values),
        None => None,
    };
    Ok(SweepRow {
        parameter: p,
        values,
        iterations: res.iteration_count(),
        converged: res.converged,
        dashed_count: res.dashed_count(),
        oracle,
        error: None,
    })
}

/// Sweep over the drive frequency of a fixed model.
pub fn sweep_drive_frequency(
    model: &LindbladModel,
    frequencies: &[f64],
    observables: &[ObservableSpec],
    config: &ArwaConfig,
    oracle: Option<&OracleConfig>,
) -> Vec<SweepRow> {
    sweep(
        frequencies,
        |w| Ok((model.with_drive_frequency(w)?, observables.to_vec())),
        config,
        oracle,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{driven_oscillator, lowering_operator};

    fn cavity(delta: f64, zeta: f64, kappa: f64) -> LindbladModel {
        driven_oscillator(1.0, zeta, 1.0 + delta, 12, kappa, 0.0).unwrap()
    }

    #[test]
    fn undriven_is_thermal() {
        let m = driven_oscillator(1.0, 0.0, 1.0, 5, 0.1, temp(0.7)).unwrap();
        let r = solve(&m, &ArwaConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iteration_count(), 1);
        assert!(r.graph.edges().is_empty());
        assert!((&r.rho_s - &m.thermal_state()).frobenius_norm() < 1e-12);
        let a = ObservableSpec::new("a", lowering_operator(5));
        assert_eq!(expectation_magnitude(&r, &a).unwrap(), 0.0);
        let id = ObservableSpec::new("1", Operator::identity(5));
        assert!((expectation_magnitude(&r, &id).unwrap() - 1.0).abs() < 1e-14);
    }

    fn temp(beta_inv: f64) -> f64 {
        crate::model::temperature_of(1.0 / beta_inv)
    }

    #[test]
    fn warm_oscillator_settles_in_two_iterations() {
        // every ladder term is populated from the start, so the bootstrap
        // ranking already fixes the whole frame
        let m = driven_oscillator(1.0, 0.002, 1.01, 9, 0.02, temp(0.5)).unwrap();
        let r = solve(&m, &ArwaConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iteration_count(), 2);
        assert_eq!(r.dashed_count(), 0);
        assert_eq!(r.labels, (0..9).collect::<Vec<i64>>());
    }

    #[test]
    fn damped_cavity_amplitude() {
        let (zeta, kappa) = (0.01, 0.1);
        for delta in [-0.2, -0.03, 0.0, 0.05, 0.3] {
            let r = solve(&cavity(delta, zeta, kappa), &ArwaConfig::default()).unwrap();
            assert!(r.converged);
            assert_eq!(r.dashed_count(), 0);
            let a = ObservableSpec::new("a", lowering_operator(12));
            let got = expectation_magnitude(&r, &a).unwrap();
            let want = zeta / (delta * delta + kappa * kappa / 4.0).sqrt();
            assert!((got - want).abs() < 1e-8 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn snapshots_end_with_repeat() {
        let m = driven_oscillator(1.0, 0.05, 1.02, 6, 0.1, temp(0.5)).unwrap();
        let r = solve(&m, &ArwaConfig::default()).unwrap();
        assert!(r.converged);
        let n = r.iterations.len();
        assert!(n >= 2);
        assert_eq!(r.iterations[n - 1].solid, r.iterations[n - 2].solid);
        assert!(r.residual() < 1e-9);
        assert!(r.rho_s.is_density_matrix(1e-8));
    }

    #[test]
    fn single_iteration_cap() {
        let m = driven_oscillator(1.0, 0.05, 1.02, 6, 0.1, temp(0.5)).unwrap();
        let cfg = ArwaConfig {
            max_iterations: 1,
            ..Default::default()
        };
        let r = solve(&m, &cfg).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iteration_count(), 1);
        assert!(solve(&m, &ArwaConfig { max_iterations: 0, ..cfg }).is_err());
    }

    #[test]
    fn sweep_single_value_matches_solve() {
        let m = cavity(0.0, 0.01, 0.1);
        let a = ObservableSpec::new("a", lowering_operator(12));
        let rows = sweep_drive_frequency(&m, &[1.03], std::slice::from_ref(&a), &ArwaConfig::default(), None);
        assert_eq!(rows.len(), 1);
        let r = solve(&m.with_drive_frequency(1.03).unwrap(), &ArwaConfig::default()).unwrap();
        assert_eq!(rows[0].values[0], expectation_magnitude(&r, &a).unwrap());
        assert_eq!(rows[0].iterations, r.iteration_count());
    }

    #[test]
    fn sweep_records_row_errors() {
        let m = cavity(0.0, 0.01, 0.1);
        let a = ObservableSpec::new("a", lowering_operator(12));
        let rows = sweep_drive_frequency(&m, &[1.0, -1.0, 1.1], &[a], &ArwaConfig::default(), None);
        assert_eq!(rows.len(), 3);
        assert!(rows[0].error.is_none() && rows[2].error.is_none());
        assert!(rows[1].error.is_some());
        assert_eq!(rows[1].parameter, -1.0);
    }

    #[test]
    fn fixed_ranking_hook() {
        let m = LindbladModel::new(
            (0..6).map(|i| i as f64).collect(),
            [(0, 1), (2, 3), (4, 5), (0, 4), (1, 3), (2, 4), (3, 4)].map(|(n, m)| (n, m, C64::new(0.01, 0.0))),
            crate::model::with_detailed_balance(
                (1..6)
                    .map(|m| crate::model::Channel::transition(&(0..6).map(|i| i as f64).collect::<Vec<_>>(), m - 1, m, 0.05))
                    .collect(),
                f64::INFINITY,
            ),
            0.0,
            1.0,
        )
        .unwrap();
        let cfg = ArwaConfig {
            fixed_ranking: Some(vec![(0, 1), (2, 3), (4, 5), (0, 4), (1, 3), (2, 4), (3, 4)]),
            ..Default::default()
        };
        let r = solve(&m, &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iteration_count(), 2);
        assert_eq!(r.dashed_count(), 2);
        assert_eq!(r.dashed_terms().count(), 2);
    }
}
