#![allow(dead_code)]

use arwa::model::{temperature_of, with_detailed_balance, Channel};
use arwa::{LindbladModel, C64};
use rand::rngs::StdRng;
use rand::Rng;

/// Random diagonal model: sorted distinct energies, random complex drives on
/// a random subset of pairs, single-transition decay with detailed balance
/// and level dephasing. Every channel is a single `|n><m|`.
pub fn random_model(rng: &mut StdRng, dim: usize) -> LindbladModel {
    let energies = random_spectrum(rng, dim);

    let mut pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|n| (n + 1..dim).map(move |m| (n, m)))
        .filter(|_| rng.gen_bool(0.6))
        .collect();
    if pairs.is_empty() {
        pairs.push((0, 1));
    }
    model_on_pairs(rng, energies, &pairs)
}

/// Random spectrum of `dim` sorted, well separated levels starting at zero.
pub fn random_spectrum(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    let mut e = vec![0.0];
    for _ in 1..dim {
        let last = *e.last().unwrap();
        e.push(last + rng.gen_range(0.05..0.8));
    }
    e
}

/// Random drives on exactly `pairs`, with random single-transition channels.
pub fn model_on_pairs(rng: &mut StdRng, energies: Vec<f64>, pairs: &[(usize, usize)]) -> LindbladModel {
    let dim = energies.len();
    let drives: Vec<(usize, usize, C64)> = pairs
        .iter()
        .map(|&(n, m)| {
            (
                n,
                m,
                C64::from_polar(rng.gen_range(0.001..0.05), rng.gen_range(0.0..std::f64::consts::TAU)),
            )
        })
        .collect();
    let mut channels = Vec::new();
    for m in 1..dim {
        let n = rng.gen_range(0..m);
        channels.push(Channel::transition(&energies, n, m, rng.gen_range(0.005..0.05)));
        if n + 1 != m {
            channels.push(Channel::transition(&energies, m - 1, m, rng.gen_range(0.005..0.05)));
        }
    }
    let beta = rng.gen_range(0.5..6.0);
    let mut channels = with_detailed_balance(channels, beta);
    for n in 0..dim {
        if rng.gen_bool(0.5) {
            channels.push(Channel::dephasing(dim, n, rng.gen_range(0.001..0.01)));
        }
    }
    let omega_d = rng.gen_range(0.3..1.5);
    LindbladModel::new(energies, drives, channels, temperature_of(beta), omega_d).unwrap()
}

/// Random permutation of all pairs `(n, m)`, `n < m`, of `dim` states,
/// truncated to `len`.
pub fn random_pairs(rng: &mut StdRng, dim: usize, len: usize) -> Vec<(usize, usize)> {
    let mut all: Vec<(usize, usize)> = (0..dim).flat_map(|n| (n + 1..dim).map(move |m| (n, m))).collect();
    for i in (1..all.len()).rev() {
        let j = rng.gen_range(0..=i);
        all.swap(i, j);
    }
    all.truncate(len);
    all
}
