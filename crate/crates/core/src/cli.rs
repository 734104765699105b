//! Command-line front end: JSON model ingestion and the `solve`, `sweep`,
//! `graph`, `oracle` and `bench` subcommands.
//!
//! Exit codes: 0 success, 1 bad input or solver error, 2 non-convergence
//! (ARWA iteration cap, oscillation, oracle stiffness or non-stationarity).

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::arwa::{expectation_magnitude, solve, sweep, ArwaConfig, ArwaResult, SweepRow};
use crate::bench;
use crate::error::{Error, Result};
use crate::model::{with_detailed_balance, Channel, LindbladModel, ObservableSpec};
use crate::operator::{Operator, C64};
use crate::oracle::{long_time_average, write_trajectory_csv, OracleConfig};

/// `2 pi 1e9`: GHz to rad/s.
pub const GHZ: f64 = 2.0 * std::f64::consts::PI * 1e9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Energies {
    List(Vec<f64>),
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub n: usize,
    pub m: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub i: usize,
    pub j: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelSpec {
    /// `|n><m|`, `n < m`.
    Lowering { n: usize, m: usize, rate: f64 },
    /// `|n><n|`.
    Dephasing { n: usize, rate: f64 },
    /// Explicit entries (inline or a CSV `i,j,re,im` file). `omega` defaults
    /// to the gap of the first non-zero entry.
    Custom {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        entries: Option<Vec<Entry>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<PathBuf>,
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        omega: Option<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ObservableFile {
    /// The drive operator `V`.
    Drive {
        #[serde(default = "default_drive_label")]
        label: String,
    },
    Entries {
        label: String,
        entries: Vec<Entry>,
    },
    Projector {
        label: String,
        n: usize,
    },
}

fn default_drive_label() -> String {
    "V".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrequencyUnit {
    #[serde(rename = "rad/s")]
    RadPerSecond,
    #[serde(rename = "GHz")]
    GHz,
}

impl FrequencyUnit {
    pub fn scale(self) -> f64 {
        match self {
            FrequencyUnit::RadPerSecond => 1.0,
            FrequencyUnit::GHz => GHZ,
        }
    }
}

/// The JSON model schema. All frequencies, amplitudes and rates share the
/// unit named by `frequency_unit` (rad/s when absent).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub energies: Energies,
    #[serde(default)]
    pub drives: Vec<DriveSpec>,
    #[serde(default)]
    pub channels: Vec<ChannelSpec>,
    #[serde(rename = "temperature_K", default)]
    pub temperature_k: f64,
    pub drive_frequency: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency_unit: Option<FrequencyUnit>,
    /// Add the thermal partner of every energy-releasing channel.
    #[serde(default = "yes")]
    pub detailed_balance: bool,
    #[serde(default)]
    pub observables: Vec<ObservableFile>,
}

fn yes() -> bool {
    true
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn read_energy_csv(path: &Path) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::config("energies.path", e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::config("energies.path", e.to_string()))?;
        for field in rec.iter().filter(|f| !f.trim().is_empty()) {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::config("energies.path", format!("not a number: {field:?}")))?;
            out.push(v);
        }
    }
    Ok(out)
}

fn read_entry_csv(path: &Path) -> Result<Vec<Entry>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::config("channels.path", e.to_string()))?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::config("channels.path", e.to_string()))?;
        let f = |k: usize| -> Result<&str> {
            rec.get(k)
                .map(str::trim)
                .ok_or_else(|| Error::config("channels.path", "expected i,j,re[,im]"))
        };
        fn bad<E>(_: E) -> Error {
            Error::config("channels.path", "expected i,j,re[,im]")
        }
        out.push(Entry {
            i: f(0)?.parse().map_err(bad)?,
            j: f(1)?.parse().map_err(bad)?,
            re: f(2)?.parse().map_err(bad)?,
            im: rec.get(3).map_or(Ok(0.0), |s| s.trim().parse()).map_err(bad)?,
        });
    }
    Ok(out)
}

fn entries_operator(dim: usize, entries: &[Entry], field: &str) -> Result<Operator> {
    let mut op = Operator::zeros(dim);
    for e in entries {
        if e.i >= dim || e.j >= dim {
            return Err(Error::config(field, format!("entry ({},{}) out of range for D = {dim}", e.i, e.j)));
        }
        op.set(e.i, e.j, op.get(e.i, e.j) + C64::new(e.re, e.im));
    }
    Ok(op)
}

impl ModelFile {
    pub fn from_path(path: &Path) -> Result<(Self, Option<PathBuf>)> {
        let text = read_text(path)?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::config("model", e.to_string()))?;
        Ok((file, path.parent().map(Path::to_path_buf)))
    }

    pub fn unit_scale(&self) -> f64 {
        self.frequency_unit.map_or(1.0, FrequencyUnit::scale)
    }

    /// Builds the validated model; relative paths resolve against `base`.
    pub fn to_model(&self, base: Option<&Path>) -> Result<LindbladModel> {
        let s = self.unit_scale();
        let energies: Vec<f64> = match &self.energies {
            Energies::List(v) => v.clone(),
            Energies::File { path } => read_energy_csv(&resolve(base, path))?,
        };
        if energies.is_empty() {
            return Err(Error::config("energies", "empty spectrum"));
        }
        let energies: Vec<f64> = energies.into_iter().map(|e| e * s).collect();
        let d = energies.len();
        let mut channels = Vec::new();
        for (k, c) in self.channels.iter().enumerate() {
            let field = format!("channels[{k}]");
            let ch = match c {
                ChannelSpec::Lowering { n, m, rate } => {
                    if n >= m || *m >= d {
                        return Err(Error::config(field, format!("lowering channel needs n < m < {d}")));
                    }
                    Channel::transition(&energies, *n, *m, rate * s)
                }
                ChannelSpec::Dephasing { n, rate } => {
                    if *n >= d {
                        return Err(Error::config(field, format!("level {n} out of range")));
                    }
                    Channel::dephasing(d, *n, rate * s)
                }
                ChannelSpec::Custom {
                    entries,
                    path,
                    rate,
                    omega,
                } => {
                    let entries = match (entries, path) {
                        (Some(e), None) => e.clone(),
                        (None, Some(p)) => read_entry_csv(&resolve(base, p))?,
                        _ => return Err(Error::config(field, "custom channel needs exactly one of `entries` or `path`")),
                    };
                    let op = entries_operator(d, &entries, &field)?;
                    let omega = match omega {
                        Some(w) => w * s,
                        None => entries
                            .iter()
                            .find(|e| e.re != 0.0 || e.im != 0.0)
                            .map_or(0.0, |e| energies[e.j] - energies[e.i]),
                    };
                    Channel { op, rate: rate * s, omega }
                }
            };
            if !(ch.rate > 0.0) || !ch.rate.is_finite() {
                return Err(Error::config(
                    format!("channels[{k}].rate"),
                    format!("rate {} must be positive", ch.rate),
                ));
            }
            channels.push(ch);
        }
        let temperature = self.temperature_k;
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::config("temperature_K", "must be finite and non-negative"));
        }
        let beta = crate::model::beta_of(temperature);
        if self.detailed_balance {
            channels = with_detailed_balance(channels, beta);
        }
        for (k, dr) in self.drives.iter().enumerate() {
            if dr.n >= dr.m || dr.m >= d {
                return Err(Error::config(
                    format!("drives[{k}]"),
                    format!("need n < m < {d}, got ({}, {})", dr.n, dr.m),
                ));
            }
        }
        if !(self.drive_frequency > 0.0) || !self.drive_frequency.is_finite() {
            return Err(Error::config("drive_frequency", "must be positive"));
        }
        let drives = self.drives.iter().map(|dr| (dr.n, dr.m, C64::new(dr.re, dr.im) * s));
        LindbladModel::new(energies, drives, channels, temperature, self.drive_frequency * s)
            .map_err(|e| Error::config("model", e.to_string()))
    }

    /// Observables in model order; the drive operator when none are listed.
    pub fn observables(&self, model: &LindbladModel) -> Result<Vec<ObservableSpec>> {
        let d = model.dim();
        if self.observables.is_empty() {
            return Ok(vec![ObservableSpec::new("V", model.drive_operator())]);
        }
        self.observables
            .iter()
            .enumerate()
            .map(|(k, o)| match o {
                ObservableFile::Drive { label } => Ok(ObservableSpec::new(label.clone(), model.drive_operator())),
                ObservableFile::Entries { label, entries } => Ok(ObservableSpec::new(
                    label.clone(),
                    entries_operator(d, entries, &format!("observables[{k}]"))?,
                )),
                ObservableFile::Projector { label, n } => {
                    if *n >= d {
                        return Err(Error::config(format!("observables[{k}]"), format!("level {n} out of range")));
                    }
                    Ok(ObservableSpec::new(label.clone(), Operator::ket_bra(d, *n, *n, C64::new(1.0, 0.0))))
                }
            })
            .collect()
    }

    /// Exact JSON image of a model: every channel (thermal partners
    /// included) is written as a custom channel with its label.
    pub fn from_model(model: &LindbladModel) -> Self {
        let d = model.dim();
        let channels = model
            .channels()
            .iter()
            .map(|c| {
                let mut entries = Vec::new();
                for j in 0..d {
                    for i in 0..d {
                        let v = c.op.get(i, j);
                        if v.norm() != 0.0 {
                            entries.push(Entry { i, j, re: v.re, im: v.im });
                        }
                    }
                }
                ChannelSpec::Custom {
                    entries: Some(entries),
                    path: None,
                    rate: c.rate,
                    omega: Some(c.omega),
                }
            })
            .collect();
        ModelFile {
            energies: Energies::List(model.energies().to_vec()),
            drives: model
                .drives()
                .iter()
                .map(|t| DriveSpec {
                    n: t.n,
                    m: t.m,
                    re: t.amplitude.re,
                    im: t.amplitude.im,
                })
                .collect(),
            channels,
            temperature_k: model.temperature(),
            drive_frequency: model.drive_frequency(),
            frequency_unit: None,
            detailed_balance: false,
            observables: vec![],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Path(PathBuf),
    Inline(Box<ModelFile>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[default]
    DriveFrequency,
    /// Multiplies every drive amplitude.
    DriveScale,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Option<Vec<f64>>,
    pub linspace: Option<Linspace>,
}

impl SweepSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match (&self.values, &self.linspace) {
            (Some(v), None) => {
                if v.is_empty() {
                    return Err(Error::config("sweep.values", "must not be empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config("sweep.values", "must be finite"));
                }
                Ok(v.clone())
            }
            (None, Some(l)) => linspace(l.start, l.stop, l.count),
            _ => Err(Error::config("sweep", "give exactly one of `values` or `linspace`")),
        }
    }
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::config("sweep.linspace.count", "must be at least 1"));
    }
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::config("sweep.linspace", "endpoints must be finite"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count)
        .map(|k| if k == count - 1 { stop } else { start + step * k as f64 })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSpec {
    /// Fraction of the target horizon actually integrated.
    pub fraction: Option<f64>,
    pub qubit_levels: Option<usize>,
    pub photon_levels: Option<usize>,
    pub slow_rate: Option<f64>,
}

/// Everything a run needs besides the command-line flags, which override it.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSource>,
    pub arwa: ArwaConfig,
    pub oracle: OracleConfig,
    pub sweep: Option<SweepSpec>,
    pub bench: BenchSpec,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub compare_oracle: bool,
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Parser, Debug)]
#[command(
    name = "arwa",
    version,
    about = "Adaptive rotating-frame steady states of driven open quantum systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve for the steady state and print a JSON summary.
    Solve(RunArgs),
    /// Solve along a parameter axis and write a table.
    Sweep(RunArgs),
    /// Write the converged frame graph as DOT and JSON.
    Graph(RunArgs),
    /// Integrate the master equation directly and time-average.
    Oracle(RunArgs),
    /// Compare steady-state and direct-integration wall clock.
    Bench(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Run configuration JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub compare_oracle: bool,
}

/// A fully resolved run.
pub struct Run {
    pub config: RunConfig,
    pub model_file: Option<ModelFile>,
    pub base: Option<PathBuf>,
}

impl Run {
    pub fn load(args: &RunArgs) -> Result<Self> {
        let (mut config, cfg_base) = match &args.config {
            Some(p) => {
                let text = read_text(p)?;
                let c: RunConfig = serde_json::from_str(&text).map_err(|e| Error::config("config", e.to_string()))?;
                (c, p.parent().map(Path::to_path_buf))
            }
            None => (RunConfig::default(), None),
        };
        if let Some(p) = &args.model {
            config.model = Some(ModelSource::Path(p.clone()));
        }
        if args.out.is_some() {
            config.out = args.out.clone();
        }
        if args.format.is_some() {
            config.format = args.format;
        }
        if args.workers.is_some() {
            config.workers = args.workers;
        }
        if args.seed.is_some() {
            config.seed = args.seed;
        }
        config.compare_oracle |= args.compare_oracle;
        if config.workers == Some(0) {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let (model_file, base) = match &config.model {
            None => (None, None),
            Some(ModelSource::Inline(m)) => (Some((**m).clone()), cfg_base),
            Some(ModelSource::Path(p)) => {
                let p = if args.model.is_some() {
                    p.clone()
                } else {
                    resolve(cfg_base.as_deref(), p)
                };
                let (m, b) = ModelFile::from_path(&p)?;
                (Some(m), b)
            }
        };
        Ok(Run { config, model_file, base })
    }

    pub fn model(&self) -> Result<(LindbladModel, Vec<ObservableSpec>)> {
        let file = self
            .model_file
            .as_ref()
            .ok_or_else(|| Error::config("model", "no model given (use --model or `model` in the config)"))?;
        let model = file.to_model(self.base.as_deref())?;
        let obs = file.observables(&model)?;
        Ok((model, obs))
    }

    fn unit_scale(&self) -> f64 {
        self.model_file.as_ref().map_or(1.0, ModelFile::unit_scale)
    }

    fn with_pool<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.workers.unwrap_or(1))
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        Ok(pool.install(f))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut so = io::stdout().lock();
            so.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn sidecar(out: Option<&Path>, ext: &str) -> Option<PathBuf> {
    out.map(|p| p.with_extension(ext))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn solve_summary(result: &ArwaResult, observables: &[ObservableSpec], values: &[f64]) -> serde_json::Value {
    let obs: serde_json::Map<String, serde_json::Value> = observables
        .iter()
        .zip(values)
        .map(|(o, v)| (o.label.clone(), serde_json::json!(v)))
        .collect();
    let dashed: Vec<serde_json::Value> = result
        .graph
        .dashed_edges()
        .map(|e| serde_json::json!({"n": e.n, "m": e.m, "relevance": e.weight}))
        .collect();
    let solid: Vec<[usize; 2]> = result.graph.solid_edges().map(|e| [e.n, e.m]).collect();
    serde_json::json!({
        "converged": result.converged,
        "oscillating": result.oscillating,
        "iterations": result.iteration_count(),
        "observables": obs,
        "labels": result.labels,
        "solid_edges": solid,
        "dashed_edges": dashed,
        "residual": result.residual(),
    })
}

fn status(converged: bool) -> i32 {
    if converged {
        0
    } else {
        2
    }
}

pub fn cmd_solve(run: &Run) -> Result<i32> {
    let (model, obs) = run.model()?;
    let res = run.with_pool(|| solve(&model, &run.config.arwa))??;
    let values = obs.iter().map(|o| expectation_magnitude(&res, o)).collect::<Result<Vec<_>>>()?;
    let mut summary = solve_summary(&res, &obs, &values);
    if run.config.compare_oracle {
        let avg = long_time_average(&model, &obs, &run.config.oracle)?;
        let o: serde_json::Map<String, serde_json::Value> = obs
            .iter()
            .zip(&avg.values)
            .map(|(o, v)| (o.label.clone(), serde_json::json!(v)))
            .collect();
        summary["oracle"] = serde_json::Value::Object(o);
    }
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    emit(run.config.out.as_deref(), &(text + "\n"))?;
    Ok(status(res.converged))
}

pub fn sweep_rows(run: &Run) -> Result<(Vec<SweepRow>, Vec<String>)> {
    let spec = run
        .config
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "sweep axis not defined"))?;
    let values = spec.resolve()?;
    let (model, obs) = run.model()?;
    let labels = obs.iter().map(|o| o.label.clone()).collect();
    let s = run.unit_scale();
    let oracle = run.config.compare_oracle.then_some(&run.config.oracle);
    let rows = run.with_pool(|| match spec.axis {
        SweepAxis::DriveFrequency => sweep(
            &values,
            |w| Ok((model.with_drive_frequency(w * s)?, obs.clone())),
            &run.config.arwa,
            oracle,
        ),
        SweepAxis::DriveScale => sweep(&values, |f| Ok((model.with_drive_scale(f), obs.clone())), &run.config.arwa, oracle),
    })?;
    Ok((rows, labels))
}

pub fn sweep_csv(rows: &[SweepRow], labels: &[String], with_oracle: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["parameter".to_string()];
    header.extend(labels.iter().cloned());
    header.extend(["iterations", "converged", "dashed_count"].map(String::from));
    if with_oracle {
        header.extend(labels.iter().map(|l| format!("oracle_{l}")));
    }
    header.push("error".into());
    w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        let mut rec = vec![fmt_f(r.parameter)];
        for k in 0..labels.len() {
            rec.push(r.values.get(k).map_or(String::new(), |v| fmt_f(*v)));
        }
        rec.push(r.iterations.to_string());
        rec.push(r.converged.to_string());
        rec.push(r.dashed_count.to_string());
        if with_oracle {
            for k in 0..labels.len() {
                rec.push(r.oracle.as_ref().and_then(|o| o.get(k)).map_or(String::new(), |v| fmt_f(*v)));
            }
        }
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn cmd_sweep(run: &Run) -> Result<i32> {
    let (rows, labels) = sweep_rows(run)?;
    let text = match run.config.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows, &labels, run.config.compare_oracle)?,
        Format::Json => serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n",
    };
    emit(run.config.out.as_deref(), &text)?;
    Ok(status(rows.iter().all(|r| r.converged && r.error.is_none())))
}

pub fn cmd_graph(run: &Run) -> Result<i32> {
    let (model, _) = run.model()?;
    let res = solve(&model, &run.config.arwa)?;
    let dot = res.graph.export_dot();
    let json = serde_json::to_string_pretty(&res.graph.to_json()).expect("graph serializes") + "\n";
    let out = run.config.out.as_deref();
    match (out, run.config.format) {
        (Some(p), _) => {
            emit(Some(p), &dot)?;
            emit(sidecar(Some(p), "json").as_deref(), &json)?;
        }
        (None, Some(Format::Json)) => emit(None, &json)?,
        (None, _) => emit(None, &dot)?,
    }
    Ok(status(res.converged))
}

pub fn cmd_oracle(run: &Run) -> Result<i32> {
    let (model, obs) = run.model()?;
    let avg = match long_time_average(&model, &obs, &run.config.oracle) {
        Ok(a) => a,
        Err(e @ (Error::Stiffness { .. } | Error::NotStationary { .. })) => {
            eprintln!("arwa: {e}");
            return Ok(2);
        }
        Err(e) => return Err(e),
    };
    let values: serde_json::Map<String, serde_json::Value> = obs
        .iter()
        .zip(&avg.values)
        .map(|(o, v)| (o.label.clone(), serde_json::json!(v)))
        .collect();
    let summary = serde_json::json!({
        "averages": values,
        "first_half": avg.first_half,
        "second_half": avg.second_half,
        "transient": avg.transient,
        "window": avg.window,
        "steps": avg.trajectory.steps,
        "rejected_steps": avg.trajectory.rejected,
        "max_trace_drift": avg.trajectory.max_trace_drift,
        "min_eigenvalue": avg.trajectory.min_eigenvalue,
    });
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match run.config.out.as_deref() {
        Some(p) => {
            let f = fs::File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
            write_trajectory_csv(&avg.trajectory, io::BufWriter::new(f))?;
            emit(sidecar(Some(p), "json").as_deref(), &json)?;
        }
        None => emit(None, &json)?,
    }
    Ok(0)
}

pub fn cmd_bench(run: &Run) -> Result<i32> {
    let b = &run.config.bench;
    let (model, obs) = match run.model_file {
        Some(_) => run.model()?,
        None => bench::metastable_model(
            b.qubit_levels.unwrap_or(3),
            b.photon_levels.unwrap_or(5),
            b.slow_rate.unwrap_or(1e-6),
            run.config.seed.unwrap_or(0),
        )?,
    };
    let report = bench::run(&model, &obs, &run.config.arwa, &run.config.oracle, b.fraction.unwrap_or(1e-3))?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    emit(run.config.out.as_deref(), &text)?;
    Ok(0)
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (args, f): (&RunArgs, fn(&Run) -> Result<i32>) = match &cli.command {
        Command::Solve(a) => (a, cmd_solve),
        Command::Sweep(a) => (a, cmd_sweep),
        Command::Graph(a) => (a, cmd_graph),
        Command::Oracle(a) => (a, cmd_oracle),
        Command::Bench(a) => (a, cmd_bench),
    };
    match Run::load(args).and_then(|r| f(&r)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("arwa: {e}");
            1
        }
    }
}
