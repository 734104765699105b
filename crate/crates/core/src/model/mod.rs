//! The driven open system `H(t) = H0 + (V e^{i w_d t} + h.c.)` with
//! Lindblad channels, expressed in the eigenbasis of `H0`.

mod builders;

pub use builders::{
    driven_oscillator, fluxonium_resonator, lowering_operator, three_level, transmon_resonator, CoupledSystem, CouplingForm,
    FluxoniumResonator, ThreeLevelRates, TransmonResonator,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{Operator, C64};

/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const KB: f64 = 1.380_649e-23;

/// Drive amplitudes below this fraction of the largest one are dropped.
pub const DEFAULT_DRIVE_FLOOR: f64 = 1e-12;

/// Relative tolerance for the eigenoperator check on channels.
const CHANNEL_OMEGA_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveStatus {
    Included,
    Excluded,
    Undecided,
}

/// One lowering drive term `V_nm |n><m|` with `n < m`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveTerm {
    pub n: usize,
    pub m: usize,
    pub amplitude: C64,
    pub relevance: f64,
    pub status: DriveStatus,
    /// `k_n - k_m + 1` in the current frame.
    pub k_shift: i64,
}

impl DriveTerm {
    pub fn new(n: usize, m: usize, amplitude: C64) -> Self {
        DriveTerm {
            n,
            m,
            amplitude,
            relevance: 0.0,
            status: DriveStatus::Undecided,
            k_shift: 1,
        }
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.n, self.m)
    }
}

/// A collapse operator with its rate and transition label `omega`
/// (`omega > 0` releases energy, `omega < 0` absorbs it, `0` dephases).
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    pub op: Operator,
    pub rate: f64,
    pub omega: f64,
}

impl Channel {
    /// `|n><m|` with the label fixed by the spectrum.
    pub fn transition(energies: &[f64], n: usize, m: usize, rate: f64) -> Self {
        Channel {
            op: Operator::ket_bra(energies.len(), n, m, C64::new(1.0, 0.0)),
            rate,
            omega: energies[m] - energies[n],
        }
    }

    pub fn dephasing(dim: usize, n: usize, rate: f64) -> Self {
        Channel {
            op: Operator::ket_bra(dim, n, n, C64::new(1.0, 0.0)),
            rate,
            omega: 0.0,
        }
    }

    /// The reverse process `A^dagger` at the detailed-balance rate.
    pub fn thermal_partner(&self, beta: f64) -> Option<Channel> {
        if self.omega <= 0.0 || !beta.is_finite() {
            return None;
        }
        let rate = self.rate * (-beta * self.omega).exp();
        (rate > 0.0).then(|| Channel {
            op: self.op.adjoint(),
            rate,
            omega: -self.omega,
        })
    }
}

/// Appends detailed-balance partners for every energy-releasing channel.
pub fn with_detailed_balance(channels: Vec<Channel>, beta: f64) -> Vec<Channel> {
    let partners: Vec<Channel> = channels.iter().filter_map(|c| c.thermal_partner(beta)).collect();
    channels.into_iter().chain(partners).collect()
}

/// Inverse temperature in s/rad (energies are angular frequencies).
pub fn beta_of(temperature: f64) -> f64 {
    if temperature <= 0.0 {
        f64::INFINITY
    } else {
        HBAR / (KB * temperature)
    }
}

/// Temperature (K) whose inverse is `beta` in s/rad.
pub fn temperature_of(beta: f64) -> f64 {
    if beta.is_infinite() {
        0.0
    } else {
        HBAR / (KB * beta)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSpec {
    pub op: Operator,
    pub label: String,
}

impl ObservableSpec {
    pub fn new(label: impl Into<String>, op: Operator) -> Self {
        ObservableSpec { op, label: label.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladModel {
    energies: Vec<f64>,
    drives: Vec<DriveTerm>,
    channels: Vec<Channel>,
    temperature: f64,
    drive_frequency: f64,
}

impl LindbladModel {
    /// Validates and assembles a model. Drives with `|V| <= floor * max|V|`
    /// are dropped; duplicate `(n, m)` drives are summed.
    pub fn new(
        energies: Vec<f64>,
        drives: impl IntoIterator<Item = (usize, usize, C64)>,
        channels: Vec<Channel>,
        temperature: f64,
        drive_frequency: f64,
    ) -> Result<Self> {
        Self::with_drive_floor(energies, drives, channels, temperature, drive_frequency, DEFAULT_DRIVE_FLOOR)
    }

    pub fn with_drive_floor(
        energies: Vec<f64>,
        drives: impl IntoIterator<Item = (usize, usize, C64)>,
        channels: Vec<Channel>,
        temperature: f64,
        drive_frequency: f64,
        floor: f64,
    ) -> Result<Self> {
        let d = energies.len();
        if d == 0 {
            return Err(Error::InvalidModel("empty spectrum".into()));
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidModel("non-finite energy".into()));
        }
        if energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidModel("energies must be sorted ascending".into()));
        }
        if !(temperature >= 0.0) {
            return Err(Error::InvalidModel(format!("temperature {temperature} must be >= 0")));
        }
        if !(drive_frequency > 0.0) || !drive_frequency.is_finite() {
            return Err(Error::InvalidModel(format!("drive frequency {drive_frequency} must be > 0")));
        }

        let mut merged: std::collections::BTreeMap<(usize, usize), C64> = Default::default();
        for (n, m, v) in drives {
            if n >= m {
                return Err(Error::InvalidModel(format!("drive ({n},{m}) is not lowering (need n < m)")));
            }
            if m >= d {
                return Err(Error::InvalidModel(format!("drive ({n},{m}) out of range for D = {d}")));
            }
            *merged.entry((n, m)).or_default() += v;
        }
        let vmax = merged.values().map(|v| v.norm()).fold(0.0, f64::max);
        let drives = merged
            .into_iter()
            .filter(|(_, v)| v.norm() > floor * vmax && v.norm() > 0.0)
            .map(|((n, m), v)| DriveTerm::new(n, m, v))
            .collect();

        let scale = energies
            .iter()
            .map(|e| (e - energies[0]).abs())
            .fold(0.0, f64::max)
            .max(f64::MIN_POSITIVE);
        for (idx, ch) in channels.iter().enumerate() {
            if ch.op.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: ch.op.dim(),
                });
            }
            if !(ch.rate > 0.0) || !ch.rate.is_finite() {
                return Err(Error::InvalidRate(ch.rate));
            }
            for i in 0..d {
                for j in 0..d {
                    if ch.op.get(i, j).norm() > 0.0 {
                        let gap = energies[j] - energies[i];
                        if (gap - ch.omega).abs() > CHANNEL_OMEGA_TOL * scale.max(ch.omega.abs()) {
                            return Err(Error::InvalidModel(format!(
                                "channel {idx} is not an eigenoperator of H0: entry ({i},{j}) has gap {gap:.6e}, label {:.6e}",
                                ch.omega
                            )));
                        }
                    }
                }
            }
        }

        Ok(LindbladModel {
            energies,
            drives,
            channels,
            temperature,
            drive_frequency,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn drives(&self) -> &[DriveTerm] {
        &self.drives
    }

    pub fn drive(&self, n: usize, m: usize) -> Option<&DriveTerm> {
        self.drives.iter().find(|t| t.n == n && t.m == m)
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn beta(&self) -> f64 {
        beta_of(self.temperature)
    }

    pub fn drive_frequency(&self) -> f64 {
        self.drive_frequency
    }

    pub fn with_drive_frequency(&self, omega_d: f64) -> Result<Self> {
        if !(omega_d > 0.0) || !omega_d.is_finite() {
            return Err(Error::InvalidModel(format!("drive frequency {omega_d} must be > 0")));
        }
        Ok(LindbladModel {
            drive_frequency: omega_d,
            ..self.clone()
        })
    }

    /// Copy with every drive amplitude multiplied by `factor`.
    pub fn with_drive_scale(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.drives {
            t.amplitude *= factor;
        }
        out.drives.retain(|t| t.amplitude.norm() > 0.0);
        out
    }

    /// Copy with one more channel; the channel is validated like in [`LindbladModel::new`].
    pub fn with_channel(&self, channel: Channel) -> Result<Self> {
        let mut channels = self.channels.clone();
        channels.push(channel);
        LindbladModel::with_drive_floor(
            self.energies.clone(),
            self.drives.iter().map(|t| (t.n, t.m, t.amplitude)),
            channels,
            self.temperature,
            self.drive_frequency,
            0.0,
        )
    }

    /// Copy with all energies, rates and the drive frequency multiplied by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.energies.iter_mut().for_each(|e| *e *= factor);
        out.drives.iter_mut().for_each(|t| t.amplitude *= factor);
        for ch in &mut out.channels {
            ch.rate *= factor;
            ch.omega *= factor;
        }
        out.drive_frequency *= factor;
        // keep beta * energy fixed
        out.temperature *= factor;
        out
    }

    pub fn hamiltonian(&self) -> Operator {
        Operator::diagonal(&self.energies)
    }

    /// `V = sum V_nm |n><m|`.
    pub fn drive_operator(&self) -> Operator {
        let mut v = Operator::zeros(self.dim());
        for t in &self.drives {
            v.set(t.n, t.m, t.amplitude);
        }
        v
    }

    pub fn channel_pairs(&self) -> impl Iterator<Item = (&Operator, f64)> {
        self.channels.iter().map(|c| (&c.op, c.rate))
    }

    /// Boltzmann populations `e^{-beta E_n} / Z`.
    pub fn thermal_populations(&self) -> Vec<f64> {
        let beta = self.beta();
        let e0 = self.energies[0];
        let w: Vec<f64> = if beta.is_infinite() {
            self.energies
                .iter()
                .enumerate()
                .map(|(i, _)| if i == 0 { 1.0 } else { 0.0 })
                .collect()
        } else {
            self.energies.iter().map(|e| (-beta * (e - e0)).exp()).collect()
        };
        let z: f64 = w.iter().sum();
        w.into_iter().map(|x| x / z).collect()
    }

    pub fn thermal_state(&self) -> Operator {
        thermal_state(self)
    }

    pub fn total_rates(&self) -> Vec<f64> {
        total_rates(self)
    }
}

/// Equilibrium state of the undriven model.
pub fn thermal_state(model: &LindbladModel) -> Operator {
    Operator::diagonal(&model.thermal_populations())
}

/// Total decoherence rate of each state, `Gamma_n = sum_k rate_k (A_k^dagger A_k)_nn`.
pub fn total_rates(model: &LindbladModel) -> Vec<f64> {
    let d = model.dim();
    let mut out = vec![0.0; d];
    for ch in &model.channels {
        for (n, g) in out.iter_mut().enumerate() {
            let weight: f64 = (0..d).map(|i| ch.op.get(i, n).norm_sqr()).sum();
            *g += ch.rate * weight;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn qubit(beta: f64) -> LindbladModel {
        let e = vec![0.0, 1.0];
        LindbladModel::new(
            e.clone(),
            [(0, 1, c(0.1))],
            vec![Channel::transition(&e, 0, 1, 0.5)],
            temperature_of(beta),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn zero_temperature_is_ground_state() {
        let rho = qubit(f64::INFINITY).thermal_state();
        assert_eq!(rho, Operator::diagonal(&[1.0, 0.0]));
    }

    #[test]
    fn ln2_qubit() {
        let rho = qubit(2f64.ln()).thermal_state();
        assert!((rho.get(0, 0).re - 2.0 / 3.0).abs() < 1e-12);
        assert!((rho.get(1, 1).re - 1.0 / 3.0).abs() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn transmon_temperature_ratio() {
        // 5 GHz at 30 mK: h f / (k_B T) computed from SI constants directly
        let h_planck = 6.626_070_15e-34;
        let expected = (-h_planck * 5e9 / (KB * 0.03)).exp();
        let e = vec![0.0, 2.0 * std::f64::consts::PI * 5e9];
        let m = LindbladModel::new(e, [], vec![], 0.03, 1.0).unwrap();
        let p = m.thermal_populations();
        assert!(((p[1] / p[0]) - expected).abs() < 1e-9 * expected);
        assert!((expected - 3.4e-4).abs() < 0.1e-4);
    }

    #[test]
    fn total_rate_examples() {
        let e = vec![0.0, 1.0];
        let one = LindbladModel::new(e.clone(), [], vec![Channel::transition(&e, 0, 1, 0.3)], 0.0, 1.0).unwrap();
        assert_eq!(one.total_rates(), vec![0.0, 0.3]);

        let two = LindbladModel::new(
            e.clone(),
            [],
            vec![Channel::transition(&e, 0, 1, 0.3), Channel::transition(&e, 1, 0, 0.05)],
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(two.total_rates(), vec![0.05, 0.3]);

        let e3 = vec![0.0, 1.0, 2.1];
        let three = LindbladModel::new(
            e3.clone(),
            [],
            vec![Channel::transition(&e3, 0, 1, 0.2), Channel::transition(&e3, 1, 2, 0.7)],
            0.0,
            1.0,
        )
        .unwrap();
        assert_eq!(three.total_rates(), vec![0.0, 0.2, 0.7]);
    }

    #[test]
    fn validation() {
        let e = vec![0.0, 1.0, 3.0];
        assert!(LindbladModel::new(vec![1.0, 0.0], [], vec![], 0.0, 1.0).is_err());
        assert!(LindbladModel::new(e.clone(), [(1, 0, c(1.0))], vec![], 0.0, 1.0).is_err());
        assert!(LindbladModel::new(e.clone(), [(0, 3, c(1.0))], vec![], 0.0, 1.0).is_err());
        assert!(LindbladModel::new(e.clone(), [], vec![], -1.0, 1.0).is_err());
        assert!(LindbladModel::new(e.clone(), [], vec![], 0.0, 0.0).is_err());
        // mislabeled channel
        let mut ch = Channel::transition(&e, 0, 1, 0.1);
        ch.omega = 2.0;
        assert!(LindbladModel::new(e.clone(), [], vec![ch], 0.0, 1.0).is_err());
        // mixing two different gaps is not an eigenoperator
        let mut op = Operator::ket_bra(3, 0, 1, c(1.0));
        op.set(1, 2, c(1.0));
        let bad = Channel { op, rate: 0.1, omega: 1.0 };
        assert!(LindbladModel::new(e.clone(), [], vec![bad], 0.0, 1.0).is_err());
        let zero_rate = Channel::transition(&e, 0, 1, 0.0);
        assert_eq!(LindbladModel::new(e, [], vec![zero_rate], 0.0, 1.0), Err(Error::InvalidRate(0.0)));
    }

    #[test]
    fn tiny_drives_dropped() {
        let e = vec![0.0, 1.0, 2.0];
        let m = LindbladModel::new(e, [(0, 1, c(1.0)), (1, 2, c(1e-13)), (0, 2, c(0.0))], vec![], 0.0, 1.0).unwrap();
        assert_eq!(m.drives().len(), 1);
    }

    #[test]
    fn detailed_balance_partner() {
        let e = vec![0.0, 2.0];
        let chans = with_detailed_balance(vec![Channel::transition(&e, 0, 1, 1.0)], 0.5);
        assert_eq!(chans.len(), 2);
        assert!((chans[1].rate - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(chans[1].omega, -2.0);
        assert_eq!(chans[1].op, Operator::ket_bra(2, 1, 0, c(1.0)));
        assert_eq!(
            with_detailed_balance(vec![Channel::transition(&e, 0, 1, 1.0)], f64::INFINITY).len(),
            1
        );
    }

    #[test]
    fn thermal_state_commutes_with_h0() {
        let m = qubit(0.7);
        assert_eq!(m.thermal_state().commutator(&m.hamiltonian()).frobenius_norm(), 0.0);
    }
}
