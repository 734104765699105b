//! Wall-clock comparison between the steady-state solve and direct
//! integration on models with a very slow relaxation channel.

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::arwa::{expectation_magnitude, solve, ArwaConfig};
use crate::error::{Error, Result};
use crate::model::{with_detailed_balance, Channel, LindbladModel, ObservableSpec};
use crate::operator::{Operator, C64};
use crate::oracle::{initial_state, integrate_recording, OracleConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub dim: usize,
    pub arwa_seconds: f64,
    pub arwa_iterations: usize,
    pub arwa_converged: bool,
    pub arwa_values: Vec<f64>,
    /// `10 / (slowest channel rate)`.
    pub target_horizon: f64,
    pub measured_horizon: f64,
    pub oracle_seconds: f64,
    pub oracle_steps: usize,
    pub extrapolated_oracle_seconds: f64,
    pub speedup: f64,
}

/// A qubit-resonator ladder (`qubit_levels x photon_levels` states) whose
/// first qubit excitation decays at `slow_rate`. Drive phases and small
/// energy offsets are drawn from `seed`.
pub fn metastable_model(
    qubit_levels: usize,
    photon_levels: usize,
    slow_rate: f64,
    seed: u64,
) -> Result<(LindbladModel, Vec<ObservableSpec>)> {
    if qubit_levels < 2 || photon_levels < 2 {
        return Err(Error::InvalidModel("metastable model needs at least 2 x 2 levels".into()));
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let qubit = [0.0, 0.62, 1.71, 2.93, 4.2];
    let chi = 0.013;
    let mut states: Vec<(f64, usize, usize)> = Vec::new();
    for q in 0..qubit_levels {
        let eq = qubit.get(q).copied().unwrap_or(q as f64 * 1.1) + rng.gen_range(-0.01..0.01);
        for n in 0..photon_levels {
            states.push((eq + n as f64 + chi * (q * n) as f64, q, n));
        }
    }
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    let index = |q: usize, n: usize| states.iter().position(|s| s.1 == q && s.2 == n).unwrap();
    let energies: Vec<f64> = states.iter().map(|s| s.0).collect();
    let d = energies.len();

    let zeta = 0.004;
    let mut drives = Vec::new();
    let mut a = Operator::zeros(d);
    for q in 0..qubit_levels {
        for n in 1..photon_levels {
            let (lo, hi) = (index(q, n - 1), index(q, n));
            let amp = (n as f64).sqrt();
            a.set(lo, hi, C64::new(amp, 0.0));
            let phase = C64::from_polar(1.0, rng.gen_range(0.0..0.05));
            drives.push((lo.min(hi), lo.max(hi), zeta * amp * phase));
        }
    }
    // weak direct qubit drive
    for q in 1..qubit_levels {
        let (lo, hi) = (index(q - 1, 0), index(q, 0));
        drives.push((lo.min(hi), lo.max(hi), C64::new(0.1 * zeta, 0.0)));
    }

    let kappa = 0.02;
    let mut channels = Vec::new();
    for q in 0..qubit_levels {
        for n in 1..photon_levels {
            let (lo, hi) = (index(q, n - 1), index(q, n));
            let (lo, hi) = (lo.min(hi), lo.max(hi));
            channels.push(Channel::transition(&energies, lo, hi, kappa * n as f64));
        }
    }
    for q in 1..qubit_levels {
        let rate = if q == 1 { slow_rate } else { 0.003 };
        for n in 0..photon_levels {
            let (lo, hi) = (index(q - 1, n), index(q, n));
            channels.push(Channel::transition(&energies, lo.min(hi), lo.max(hi), rate));
        }
    }
    let omega_d = 1.0 + 0.5 * chi;
    let model = LindbladModel::new(energies, drives, with_detailed_balance(channels, f64::INFINITY), 0.0, omega_d)?;
    Ok((model, vec![ObservableSpec::new("a", a)]))
}

/// Times one steady-state solve and `1/fraction` of the oracle horizon
/// `10 / (slowest channel rate)`, then extrapolates the oracle linearly.
pub fn run(
    model: &LindbladModel,
    observables: &[ObservableSpec],
    arwa: &ArwaConfig,
    oracle: &OracleConfig,
    fraction: f64,
) -> Result<BenchReport> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::config("fraction", "must lie in (0, 1]"));
    }
    let slowest = model.channels().iter().map(|c| c.rate).fold(f64::INFINITY, f64::min);
    if !slowest.is_finite() {
        return Err(Error::InvalidModel("benchmark needs at least one channel".into()));
    }
    let target = 10.0 / slowest;
    let measured = target * fraction;

    let start = Instant::now();
    let res = solve(model, arwa)?;
    let values = observables
        .iter()
        .map(|o| expectation_magnitude(&res, o))
        .collect::<Result<Vec<_>>>()?;
    let arwa_seconds = start.elapsed().as_secs_f64();

    let rho0 = initial_state(model, oracle.initial);
    let start = Instant::now();
    let traj = integrate_recording(model, &rho0, measured, measured, observables, oracle)?;
    let oracle_seconds = start.elapsed().as_secs_f64();
    let extrapolated = oracle_seconds / fraction;
    Ok(BenchReport {
        dim: model.dim(),
        arwa_seconds,
        arwa_iterations: res.iteration_count(),
        arwa_converged: res.converged,
        arwa_values: values,
        target_horizon: target,
        measured_horizon: measured,
        oracle_seconds,
        oracle_steps: traj.steps,
        extrapolated_oracle_seconds: extrapolated,
        speedup: extrapolated / arwa_seconds.max(f64::MIN_POSITIVE),
    })
}
