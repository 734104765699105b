mod common;

use arwa::model::{fluxonium_resonator, CouplingForm, FluxoniumResonator};
use arwa::{solve, ArwaConfig, FrameGraph, Ranking, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Depth-first enumeration of simple cycles in the undirected graph of
/// `edges`; returns one whose up-steps and down-steps differ, if any.
/// An edge `(n, m)` with `n < m` counts as up when walked from `n` to `m`.
fn unbalanced_cycle(dim: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut adj = vec![vec![]; dim];
    for &(n, m) in edges {
        adj[n].push(m);
        adj[m].push(n);
    }
    fn dfs(adj: &[Vec<usize>], start: usize, path: &mut Vec<usize>, seen: &mut [bool], found: &mut Option<Vec<usize>>) {
        let v = *path.last().unwrap();
        for &w in &adj[v] {
            if found.is_some() {
                return;
            }
            if w == start && path.len() >= 3 {
                let mut net = 0i64;
                for i in 0..path.len() {
                    let (a, b) = (path[i], path[(i + 1) % path.len()]);
                    net += if b > a { 1 } else { -1 };
                }
                if net != 0 {
                    *found = Some(path.clone());
                }
            } else if w > start && !seen[w] {
                seen[w] = true;
                path.push(w);
                dfs(adj, start, path, seen, found);
                path.pop();
                seen[w] = false;
            }
        }
    }
    let mut found = None;
    for s in 0..dim {
        let mut seen = vec![false; dim];
        seen[s] = true;
        dfs(&adj, s, &mut vec![s], &mut seen, &mut found);
        if found.is_some() {
            break;
        }
    }
    found
}

fn dense_charge_matrix(q: usize, seed: u64) -> DMatrix<C64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut n = DMatrix::from_element(q, q, C64::new(0.0, 0.0));
    for i in 0..q {
        for j in i + 1..q {
            let x = C64::new(rng.gen_range(0.2..1.0), rng.gen_range(-0.3..0.3));
            n[(i, j)] = x;
            n[(j, i)] = x.conj();
        }
    }
    n
}

#[test]
fn dense_charge_coupling_forces_dashed_edges() {
    let p = FluxoniumResonator {
        omega_r: 1.0,
        qubit_energies: vec![0.0, 0.31, 1.07, 1.52],
        charge_matrix: dense_charge_matrix(4, 11),
        g: 0.02,
        zeta: 0.002,
        omega_d: 1.0,
        photon_levels: 2,
        dim: None,
        kappa: 0.01,
        qubit_decay: 0.002,
        temperature: 0.0,
        coupling: CouplingForm::Full,
    };
    let sys = fluxonium_resonator(&p).unwrap();
    let res = solve(&sys.model, &ArwaConfig::default()).unwrap();
    let ranked: Vec<(usize, usize)> = res.graph.edges().iter().map(|e| (e.n, e.m)).collect();
    let cycle = unbalanced_cycle(sys.model.dim(), &ranked);
    assert!(cycle.is_some(), "oracle found no unbalanced cycle among {ranked:?}");
    assert!(res.dashed_count() >= 1);
    assert!(res.rho_s.is_density_matrix(1e-9));
}

#[test]
fn oracle_recognizes_balanced_ladder() {
    let ladder = [(0, 1), (1, 2), (2, 3), (0, 2)];
    assert!(unbalanced_cycle(4, &ladder[..3]).is_none());
    assert_eq!(unbalanced_cycle(4, &ladder).map(|c| c.len()), Some(3));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// A dashed edge appears exactly when some cycle of the ranked edges is
    /// not zero-cyclic.
    #[test]
    fn dashed_edges_iff_unbalanced_cycle(seed in any::<u64>(), dim in 2usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let max = dim * (dim - 1) / 2;
        let len = rng.gen_range(1..=max);
        let pairs = common::random_pairs(&mut rng, dim, len);
        let g = FrameGraph::build(&Ranking::from_order(&pairs), dim).unwrap();
        prop_assert_eq!(g.dashed_count() > 0, unbalanced_cycle(dim, &pairs).is_some());
    }
}
