mod common;

use std::collections::BTreeSet;

use arwa::arwa::frame_steady_state;
use arwa::graph::{extract_frame_with_labels, zero_cyclicity_check, EdgeStyle};
use arwa::operator::vectorize;
use arwa::relevance::{rank, FramedTerm, RelevanceContext, TermRole};
use arwa::{extract_frame, liouvillian, solve, ArwaConfig, FrameGraph, Operator, Ranking, SolverOptions, C64};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_density(rng: &mut StdRng, d: usize) -> Operator {
    let a = Operator::from_fn(d, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let p = a.adjoint().dot(&a);
    let t = p.trace();
    p.scale(t.inv())
}

/// Union-find over solid edges; independent of the builder's own bookkeeping.
fn solid_components(g: &FrameGraph) -> Vec<usize> {
    let mut parent: Vec<usize> = (0..g.dim()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            p[x] = find(p, p[x]);
        }
        p[x]
    }
    for e in g.solid_edges() {
        let (a, b) = (find(&mut parent, e.n), find(&mut parent, e.m));
        parent[a] = b;
    }
    (0..g.dim()).map(|v| find(&mut parent, v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn liouvillian_preserves_trace_and_hermiticity(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, dim);
        let h = &model.hamiltonian() + &model.drive_operator().hermitian_part();
        let l = liouvillian(&h, model.channel_pairs()).unwrap();
        let rho = random_density(&mut rng, dim);
        let out = l.apply_op(&rho);
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!((&out - &out.adjoint()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn steady_state_is_a_density_matrix(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, dim);
        let res = solve(&model, &ArwaConfig::default()).unwrap();
        prop_assert!((res.rho_s.trace() - C64::new(1.0, 0.0)).norm() < 1e-10);
        prop_assert!(res.rho_s.is_hermitian(1e-10));
        prop_assert!(res.rho_s.hermitian_eigenvalues().iter().all(|&x| x > -1e-10));
        prop_assert!(res.h.is_hermitian(1e-14));
        prop_assert!(res.omega.is_diagonal());
        prop_assert!((0..dim).all(|i| res.omega.get(i, i).im == 0.0));
        let l = liouvillian(&res.h, model.channel_pairs()).unwrap();
        prop_assert!(l.apply(&vectorize(&res.rho_s)).norm() < 1e-10);
    }

    #[test]
    fn ranking_is_descending_with_lexicographic_ties(
        vals in prop::collection::vec((0usize..6, 0usize..6, prop_oneof![Just(0.0), Just(0.5), 0.0f64..1.0]), 0..20)
    ) {
        let triples: Vec<(usize, usize, f64)> = vals
            .into_iter()
            .filter(|(n, m, _)| n < m)
            .map(|(n, m, r)| ((n, m), r))
            .collect::<std::collections::BTreeMap<_, _>>()
            .into_iter()
            .map(|((n, m), r)| (n, m, r))
            .collect();
        let r = rank(triples.clone(), 1);
        let e = &r.entries;
        prop_assert_eq!(e.len(), triples.iter().filter(|t| t.2 > 0.0).count());
        for w in e.windows(2) {
            prop_assert!(w[0].relevance > w[1].relevance || (w[0].relevance == w[1].relevance && (w[0].n, w[0].m) < (w[1].n, w[1].m)));
        }
    }

    #[test]
    fn odd_walks_are_never_zero_cyclic(walk in prop::collection::vec(0usize..10, 2..9)) {
        let mut w = walk.clone();
        w.dedup();
        if w.len() >= 3 && w.first() != w.last() && w.len() % 2 == 1 {
            prop_assert!(!zero_cyclicity_check(&w));
        }
    }

    #[test]
    fn graph_is_maximal_and_consistent(seed in any::<u64>(), dim in 2usize..9) {
        let mut rng = StdRng::seed_from_u64(seed);
        let max = dim * (dim - 1) / 2;
        let len = rng.gen_range(1..=max);
        let pairs = common::random_pairs(&mut rng, dim, len);
        let g = FrameGraph::build(&Ranking::from_order(&pairs), dim).unwrap();
        let k = g.frame_labels();
        for e in g.solid_edges() {
            prop_assert_eq!(k[e.m] - k[e.n], 1);
        }
        let comp = solid_components(&g);
        for e in g.dashed_edges() {
            prop_assert!(g.label(e.n).is_some() && g.label(e.m).is_some());
            prop_assert_ne!(k[e.m] - k[e.n], 1);
            // shifting m's solid component is the only freedom that keeps
            // every solid edge; none of the shifts may fix this edge
            let fixable = comp[e.n] != comp[e.m]
                && (-2 * dim as i64..=2 * dim as i64).any(|s| k[e.m] + s - k[e.n] == 1);
            prop_assert!(!fixable, "dashed ({}, {}) could be solid", e.n, e.m);
        }
        let all: BTreeSet<(usize, usize)> = g.edges().iter().map(|e| (e.n, e.m)).collect();
        prop_assert_eq!(all, pairs.iter().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn global_label_shift_leaves_state_unchanged(seed in any::<u64>(), dim in 2usize..7, shift in -5i64..5) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, dim);
        let pairs: Vec<(usize, usize)> = model.drives().iter().map(|t| t.pair()).collect();
        let g = FrameGraph::build(&Ranking::from_order(&pairs), dim).unwrap();
        let opts = SolverOptions::default();
        let f0 = extract_frame(&g, &model).unwrap();
        let shifted: Vec<i64> = f0.labels.iter().map(|k| k + shift).collect();
        let f1 = extract_frame_with_labels(&g, &model, shifted).unwrap();
        let (r0, _) = frame_steady_state(&model, &f0, &opts).unwrap();
        let (r1, _) = frame_steady_state(&model, &f1, &opts).unwrap();
        prop_assert!((&r0 - &r1).frobenius_norm() < 1e-10);
    }

    #[test]
    fn relevance_ignores_drive_phase(seed in any::<u64>(), dim in 2usize..7, phase in 0.0f64..6.3) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, dim);
        let res = solve(&model, &ArwaConfig::default()).unwrap();
        let ctx = RelevanceContext::new(&model, &res.h, &res.rho_s, SolverOptions::default()).unwrap();
        let terms: Vec<FramedTerm> = res
            .terms
            .iter()
            .map(|t| FramedTerm {
                n: t.n,
                m: t.m,
                amplitude: t.amplitude,
                k_shift: t.k_shift,
                role: if t.status == arwa::DriveStatus::Included { TermRole::Included } else { TermRole::Excluded },
            })
            .collect();
        let rotated: Vec<FramedTerm> = terms.iter().map(|t| FramedTerm { amplitude: t.amplitude * C64::from_polar(1.0, phase), ..*t }).collect();
        let a = ctx.evaluate(&terms).unwrap();
        let b = ctx.evaluate(&rotated).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-10 * x.max(1e-300));
        }
    }

    #[test]
    fn first_iteration_response_norm_is_time_independent(seed in any::<u64>(), dim in 2usize..7, t in 0.0f64..50.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let model = common::random_model(&mut rng, dim);
        let rho = model.thermal_state();
        let ctx = RelevanceContext::new(&model, &model.hamiltonian(), &rho, SolverOptions::default()).unwrap();
        let wd = model.drive_frequency();
        for d in model.drives() {
            let term = FramedTerm { n: d.n, m: d.m, amplitude: d.amplitude, k_shift: 1, role: TermRole::Excluded };
            let r = ctx.response(&term).unwrap();
            let x = r.scale(C64::from_polar(1.0, wd * t));
            let full = &x + &x.adjoint();
            let want = std::f64::consts::SQRT_2 * r.frobenius_norm();
            prop_assert!((full.frobenius_norm() - want).abs() <= 1e-12 * want.max(1e-300));
        }
    }
}

#[test]
fn resonant_ladder_ranks_two_photon_term_last() {
    use arwa::model::{three_level, ThreeLevelRates};
    let rates = ThreeLevelRates {
        gamma_10: 0.001,
        gamma_20: 0.0,
        gamma_21: 0.001,
        dephasing: 0.0,
        temperature: 0.0,
    };
    let v = C64::new(0.004, 0.0);
    let m = three_level([0.0, 1.0, 2.0], v, v, v, &rates, 1.0).unwrap();
    let res = solve(&m, &ArwaConfig::default()).unwrap();
    assert!(res.converged);
    let last = &res.iterations.last().unwrap().ranking;
    assert_eq!(last.pairs().last(), Some(&(0, 2)));
    assert_eq!(res.graph.edge(0, 2).unwrap().style, EdgeStyle::Dashed);
}
