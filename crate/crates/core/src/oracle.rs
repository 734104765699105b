//! Direct integration of the time-dependent master equation.
//!
//! The equation is integrated exactly (no rotating-wave step) in the
//! interaction picture of `H0`: there each drive term carries the phase
//! `exp(i (w_d - w_mn) t)` and every eigenoperator dissipator is unchanged.
//! Observables are mapped back to the lab frame at every sample.

use std::io::Write;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LindbladModel, ObservableSpec};
use crate::operator::{devectorize, vectorize, Operator, C64};
use crate::superop::{liouvillian, Superoperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Thermal,
    Ground,
    MaximallyMixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleConfig {
    pub rtol: f64,
    pub atol: f64,
    pub samples_per_period: usize,
    /// Transient skip in units of `max(1/G_min, 1/w_d)`.
    pub transient_factor: f64,
    /// Explicit transient skip, overriding `transient_factor`.
    pub transient: Option<f64>,
    /// Averaging window in drive periods.
    pub periods: usize,
    pub stationarity_tol: f64,
    pub check_stationarity: bool,
    pub initial: InitialState,
    pub max_steps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            rtol: 1e-8,
            atol: 1e-11,
            samples_per_period: 64,
            transient_factor: 10.0,
            transient: None,
            periods: 100,
            stationarity_tol: 1e-3,
            check_stationarity: true,
            initial: InitialState::Thermal,
            max_steps: 200_000_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub times: Vec<f64>,
    pub labels: Vec<String>,
    /// `expectations[k][s]` is the lab-frame `<O_k>` at `times[s]`.
    pub expectations: Vec<Vec<C64>>,
    pub steps: usize,
    pub rejected: usize,
    /// Largest `|Tr rho - 1|` seen at a sample.
    pub max_trace_drift: f64,
    /// Smallest eigenvalue of the final state.
    pub min_eigenvalue: f64,
    /// Lab-frame density matrix at the final time.
    pub final_state: Operator,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AverageResult {
    /// `sqrt(mean |<O>|^2)` over the window.
    pub values: Vec<f64>,
    pub first_half: Vec<f64>,
    pub second_half: Vec<f64>,
    pub transient: f64,
    pub window: f64,
    pub trajectory: TrajectoryResult,
}

struct DriveRhs {
    dim: usize,
    dissipator: Superoperator,
    /// `(n, m, V_nm, w_d - (E_m - E_n))`.
    terms: Vec<(usize, usize, C64, f64)>,
}

impl DriveRhs {
    fn new(model: &LindbladModel) -> Result<Self> {
        let d = model.dim();
        let dissipator = liouvillian(&Operator::zeros(d), model.channel_pairs())?;
        let e = model.energies();
        let wd = model.drive_frequency();
        let terms = model
            .drives()
            .iter()
            .map(|t| (t.n, t.m, t.amplitude, wd - (e[t.m] - e[t.n])))
            .collect();
        Ok(DriveRhs { dim: d, dissipator, terms })
    }

    /// `dx = D x - i [V_I(t) + V_I(t)^dagger, x]` on the column-stacked state.
    fn eval(&self, t: f64, x: &DVector<C64>, dx: &mut DVector<C64>) {
        self.dissipator.apply_into(x, dx, C64::new(1.0, 0.0), false);
        let d = self.dim;
        let mi = C64::new(0.0, -1.0);
        for &(n, m, v, w) in &self.terms {
            let c = v * C64::from_polar(1.0, w * t);
            let cm = mi * c;
            let cc = mi * c.conj();
            for j in 0..d {
                // -i c |n><m| x  and  -i c* |m><n| x
                dx[j * d + n] += cm * x[j * d + m];
                dx[j * d + m] += cc * x[j * d + n];
            }
            for i in 0..d {
                // +i x c |n><m|  and  +i x c* |m><n|
                dx[m * d + i] -= cm * x[n * d + i];
                dx[n * d + i] -= cc * x[m * d + i];
            }
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand-Prince 5(4) with FSAL and standard step control.
struct Dopri5<'a> {
    rhs: &'a DriveRhs,
    rtol: f64,
    atol: f64,
    t: f64,
    h: f64,
    y: DVector<C64>,
    k1: DVector<C64>,
    k: [DVector<C64>; 6],
    tmp: DVector<C64>,
    steps: usize,
    rejected: usize,
    max_steps: usize,
}

fn axpy_into(out: &mut DVector<C64>, y: &DVector<C64>, h: f64, terms: &[(f64, &DVector<C64>)]) {
    for i in 0..y.len() {
        let mut acc = C64::new(0.0, 0.0);
        for &(a, k) in terms {
            acc += k[i] * a;
        }
        out[i] = y[i] + acc * h;
    }
}

impl<'a> Dopri5<'a> {
    fn new(rhs: &'a DriveRhs, y0: DVector<C64>, t0: f64, h0: f64, cfg: &OracleConfig) -> Self {
        let n = y0.len();
        let mut k1 = DVector::zeros(n);
        rhs.eval(t0, &y0, &mut k1);
        let z = || DVector::zeros(n);
        Dopri5 {
            rhs,
            rtol: cfg.rtol,
            atol: cfg.atol,
            t: t0,
            h: h0,
            y: y0,
            k1,
            k: [z(), z(), z(), z(), z(), z()],
            tmp: z(),
            steps: 0,
            rejected: 0,
            max_steps: cfg.max_steps,
        }
    }

    /// Advances exactly to `t_target`.
    fn advance_to(&mut self, t_target: f64) -> Result<()> {
        while self.t < t_target {
            let remaining = t_target - self.t;
            let clamped = self.h >= remaining;
            let h = if clamped { remaining } else { self.h };
            if h <= 1e-13 * self.t.abs().max(1.0) && !clamped {
                return Err(Error::Stiffness { t: self.t, h });
            }
            if self.steps + self.rejected >= self.max_steps {
                return Err(Error::Stiffness { t: self.t, h });
            }
            let err = self.trial(h);
            if err <= 1.0 {
                self.steps += 1;
                self.t = if clamped { t_target } else { self.t + h };
                std::mem::swap(&mut self.y, &mut self.tmp);
                std::mem::swap(&mut self.k1, &mut self.k[5]);
                let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                let next = h * fac;
                self.h = if clamped { next.max(self.h) } else { next };
            } else {
                self.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
                self.h = h * fac;
                if self.h <= 1e-13 * self.t.abs().max(1.0) {
                    return Err(Error::Stiffness { t: self.t, h: self.h });
                }
            }
        }
        Ok(())
    }

    /// One trial step of size `h`; the candidate lands in `tmp`, its
    /// derivative in `k[5]`. Returns the scaled error norm.
    fn trial(&mut self, h: f64) -> f64 {
        let t = self.t;
        let y = &self.y;
        let k1 = &self.k1;
        let [k2, k3, k4, k5, k6, k7] = &mut self.k;
        let tmp = &mut self.tmp;
        axpy_into(tmp, y, h, &[(A21, k1)]);
        self.rhs.eval(t + C2 * h, tmp, k2);
        axpy_into(tmp, y, h, &[(A31, k1), (A32, k2)]);
        self.rhs.eval(t + C3 * h, tmp, k3);
        axpy_into(tmp, y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        self.rhs.eval(t + C4 * h, tmp, k4);
        axpy_into(tmp, y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        self.rhs.eval(t + C5 * h, tmp, k5);
        axpy_into(tmp, y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
        self.rhs.eval(t + h, tmp, k6);
        axpy_into(tmp, y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        self.rhs.eval(t + h, tmp, k7);
        let mut sum = 0.0;
        for i in 0..y.len() {
            let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = self.atol + self.rtol * y[i].norm().max(tmp[i].norm());
            sum += (e.norm() / sc).powi(2);
        }
        (sum / y.len() as f64).sqrt()
    }
}

fn initial_step(rhs: &DriveRhs, y: &DVector<C64>, period: f64) -> f64 {
    let mut f = DVector::zeros(y.len());
    rhs.eval(0.0, y, &mut f);
    let fnorm = f.norm();
    let h = if fnorm > 0.0 { 0.01 * y.norm() / fnorm } else { period };
    h.min(period / 8.0)
}

/// The lab-frame state at `t` from the interaction-picture state.
fn to_lab(x: &DVector<C64>, energies: &[f64], t: f64) -> Operator {
    let d = energies.len();
    Operator::from_fn(d, |i, j| x[j * d + i] * C64::from_polar(1.0, -(energies[i] - energies[j]) * t))
}

fn expectation(obs: &[(usize, usize, C64)], x: &DVector<C64>, energies: &[f64], t: f64) -> C64 {
    let d = energies.len();
    // <O> = sum O_ji rho_ij
    obs.iter()
        .map(|&(j, i, o)| o * x[j * d + i] * C64::from_polar(1.0, -(energies[i] - energies[j]) * t))
        .sum()
}

fn sparse_entries(op: &Operator) -> Vec<(usize, usize, C64)> {
    let d = op.dim();
    let mut out = Vec::new();
    for j in 0..d {
        for i in 0..d {
            let v = op.get(i, j);
            if v.norm() != 0.0 {
                out.push((i, j, v));
            }
        }
    }
    out
}

/// Integrates from `rho0` at `t = 0` to `t_end`, sampling observables every
/// `T / samples_per_period` from `record_from` on.
pub fn integrate_recording(
    model: &LindbladModel,
    rho0: &Operator,
    t_end: f64,
    record_from: f64,
    observables: &[ObservableSpec],
    config: &OracleConfig,
) -> Result<TrajectoryResult> {
    let d = model.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: rho0.dim(),
        });
    }
    if !rho0.is_density_matrix(1e-8) {
        return Err(Error::InvalidModel("initial state is not a density matrix".into()));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::config("t_end", "must be finite and non-negative"));
    }
    if config.samples_per_period == 0 {
        return Err(Error::config("samples_per_period", "must be at least 1"));
    }
    for o in observables {
        if o.op.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: o.op.dim(),
            });
        }
    }
    let energies = model.energies();
    let rhs = DriveRhs::new(model)?;
    let period = 2.0 * std::f64::consts::PI / model.drive_frequency();
    let dt = period / config.samples_per_period as f64;
    let obs: Vec<Vec<(usize, usize, C64)>> = observables.iter().map(|o| sparse_entries(&o.op)).collect();

    let y0 = vectorize(rho0);
    let h0 = initial_step(&rhs, &y0, period);
    let mut solver = Dopri5::new(&rhs, y0, 0.0, h0, config);
    let mut times = Vec::new();
    let mut expectations = vec![Vec::new(); observables.len()];
    let mut max_trace_drift: f64 = 0.0;

    let first = (record_from.max(0.0) / dt).ceil() as usize;
    let last = (t_end / dt * (1.0 + 1e-12)).floor() as usize;
    let mut record = |t: f64, x: &DVector<C64>| {
        times.push(t);
        let tr: C64 = (0..d).map(|i| x[i * d + i]).sum();
        max_trace_drift = max_trace_drift.max((tr - 1.0).norm());
        for (k, o) in obs.iter().enumerate() {
            expectations[k].push(expectation(o, x, energies, t));
        }
    };
    for s in first..=last.max(first) {
        let t = (s as f64 * dt).min(t_end);
        if s > last {
            break;
        }
        solver.advance_to(t)?;
        record(t, &solver.y);
    }
    solver.advance_to(t_end)?;

    let final_state = to_lab(&solver.y, energies, t_end);
    let min_eigenvalue = final_state
        .hermitian_part()
        .hermitian_eigenvalues()
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min_eigenvalue < -1e-6 {
        log::warn!("trajectory lost positivity: min eigenvalue {min_eigenvalue:.3e}");
    }
    if max_trace_drift > 1e-7 {
        log::warn!("trace drift {max_trace_drift:.3e} above 1e-7");
    }
    Ok(TrajectoryResult {
        times,
        labels: observables.iter().map(|o| o.label.clone()).collect(),
        expectations,
        steps: solver.steps,
        rejected: solver.rejected,
        max_trace_drift,
        min_eigenvalue,
        final_state,
    })
}

pub fn integrate(
    model: &LindbladModel,
    rho0: &Operator,
    t_end: f64,
    observables: &[ObservableSpec],
    config: &OracleConfig,
) -> Result<TrajectoryResult> {
    integrate_recording(model, rho0, t_end, 0.0, observables, config)
}

/// Smallest non-zero relaxation rate used by the transient heuristic:
/// the minimum over `n <= m` of `(G_n + G_m) / 2`.
pub fn slowest_rate(model: &LindbladModel) -> Option<f64> {
    let g = model.total_rates();
    let mut best = f64::INFINITY;
    for n in 0..g.len() {
        for m in n..g.len() {
            let r = 0.5 * (g[n] + g[m]);
            if r > 0.0 {
                best = best.min(r);
            }
        }
    }
    best.is_finite().then_some(best)
}

pub fn transient_time(model: &LindbladModel, config: &OracleConfig) -> Result<f64> {
    if let Some(t) = config.transient {
        return Ok(t);
    }
    let g = slowest_rate(model).ok_or_else(|| Error::InvalidModel("no dissipation: long-time average undefined".into()))?;
    Ok(config.transient_factor * (1.0 / g).max(1.0 / model.drive_frequency()))
}

pub fn initial_state(model: &LindbladModel, which: InitialState) -> Operator {
    match which {
        InitialState::Thermal => model.thermal_state(),
        InitialState::Ground => Operator::ket_bra(model.dim(), 0, 0, C64::new(1.0, 0.0)),
        InitialState::MaximallyMixed => Operator::identity(model.dim()).scale(C64::new(1.0 / model.dim() as f64, 0.0)),
    }
}

fn rms(v: &[C64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    (v.iter().map(|z| z.norm_sqr()).sum::<f64>() / v.len() as f64).sqrt()
}

/// `sqrt(mean |<O>(t)|^2)` over `periods` drive periods after the transient
/// skip, starting from the configured initial state.
pub fn long_time_average(model: &LindbladModel, observables: &[ObservableSpec], config: &OracleConfig) -> Result<AverageResult> {
    long_time_average_from(model, &initial_state(model, config.initial), observables, config)
}

pub fn long_time_average_from(
    model: &LindbladModel,
    rho0: &Operator,
    observables: &[ObservableSpec],
    config: &OracleConfig,
) -> Result<AverageResult> {
    if config.periods == 0 {
        return Err(Error::config("periods", "must be at least 1"));
    }
    let skip = transient_time(model, config)?;
    let period = 2.0 * std::f64::consts::PI / model.drive_frequency();
    let dt = period / config.samples_per_period as f64;
    let start = (skip / dt).ceil() * dt;
    let n = config.periods * config.samples_per_period;
    // the last sample is at start + (n - 1) dt
    let t_end = start + (n - 1) as f64 * dt;
    let traj = integrate_recording(model, rho0, t_end, start, observables, config)?;
    let half = n / 2;
    let mut values = Vec::new();
    let mut first_half = Vec::new();
    let mut second_half = Vec::new();
    for (k, series) in traj.expectations.iter().enumerate() {
        let s = &series[series.len().saturating_sub(n)..];
        let (a, b) = (rms(&s[..half]), rms(&s[half..]));
        if config.check_stationarity && (a - b).abs() > config.stationarity_tol * a.max(b) + 1e-12 {
            return Err(Error::NotStationary {
                label: traj.labels[k].clone(),
                first: a,
                second: b,
            });
        }
        values.push(rms(s));
        first_half.push(a);
        second_half.push(b);
    }
    Ok(AverageResult {
        values,
        first_half,
        second_half,
        transient: skip,
        window: n as f64 * dt,
        trajectory: traj,
    })
}

/// Long-time averages from the ground state and from the thermal state.
pub fn initial_state_pair(
    model: &LindbladModel,
    observables: &[ObservableSpec],
    config: &OracleConfig,
) -> Result<(AverageResult, AverageResult)> {
    let (g, t) = rayon::join(
        || long_time_average_from(model, &initial_state(model, InitialState::Ground), observables, config),
        || long_time_average_from(model, &initial_state(model, InitialState::Thermal), observables, config),
    );
    Ok((g?, t?))
}

/// `time, Re<O1>, Im<O1>, ...` with 17 significant digits.
pub fn write_trajectory_csv<W: Write>(traj: &TrajectoryResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["time".to_string()];
    for l in &traj.labels {
        header.push(format!("re_{l}"));
        header.push(format!("im_{l}"));
    }
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for (s, t) in traj.times.iter().enumerate() {
        let mut row = vec![format!("{t:.16e}")];
        for series in &traj.expectations {
            row.push(format!("{:.16e}", series[s].re));
            row.push(format!("{:.16e}", series[s].im));
        }
        w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// The interaction-picture right-hand side at `t`, for diagnostics.
pub fn rhs_at(model: &LindbladModel, rho: &Operator, t: f64) -> Result<Operator> {
    let rhs = DriveRhs::new(model)?;
    let x = vectorize(rho);
    let mut dx = DVector::zeros(x.len());
    rhs.eval(t, &x, &mut dx);
    devectorize(&dx, model.dim())
}
