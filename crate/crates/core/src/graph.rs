//! The frame graph: eigenstates as vertices, drive terms as directed edges
//! `n -> m` (`n < m`) weighted by relevance.
//!
//! Edges are inserted greedily in ranking order. Each vertex carries an
//! integer `k_n`; a solid edge always satisfies `k_m = k_n + 1`, so every
//! solid term is static in the frame generated by `w_d sum k_j |j><j|`. An
//! edge that closes a cycle with the wrong label difference is kept as a
//! dashed (excluded) edge.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DriveStatus, DriveTerm, LindbladModel};
use crate::operator::{Operator, C64};
use crate::relevance::Ranking;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeStyle {
    Solid,
    Dashed,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub n: usize,
    pub m: usize,
    pub weight: f64,
    pub style: EdgeStyle,
}

/// Which side of a merge gets relabeled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergePolicy {
    /// Shift the component containing the higher-indexed endpoint `m`.
    #[default]
    ShiftHigher,
    /// Shift the component containing `n`.
    ShiftLower,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameGraph {
    labels: Vec<Option<i64>>,
    component: Vec<Option<usize>>,
    members: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    policy: MergePolicy,
}

/// Canonical form used to compare graphs across iterations: the solid edge
/// set plus labels normalized to start at zero within each component.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GraphSignature {
    pub solid: Vec<(usize, usize)>,
    pub labels: Vec<Option<i64>>,
}

impl FrameGraph {
    pub fn new(dim: usize) -> Self {
        Self::with_policy(dim, MergePolicy::default())
    }

    pub fn with_policy(dim: usize, policy: MergePolicy) -> Self {
        FrameGraph {
            labels: vec![None; dim],
            component: vec![None; dim],
            members: Vec::new(),
            edges: Vec::new(),
            policy,
        }
    }

    /// Builds the graph for `ranking` over `dim` states.
    pub fn build(ranking: &Ranking, dim: usize) -> Result<Self> {
        Self::build_with_policy(ranking, dim, MergePolicy::default())
    }

    pub fn build_with_policy(ranking: &Ranking, dim: usize, policy: MergePolicy) -> Result<Self> {
        let mut g = Self::with_policy(dim, policy);
        for e in &ranking.entries {
            g.insert(e.n, e.m, e.relevance)?;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, v: usize) -> Option<i64> {
        self.labels[v]
    }

    pub fn labels(&self) -> &[Option<i64>] {
        &self.labels
    }

    /// Labels with unlabeled (isolated) states set to zero.
    pub fn frame_labels(&self) -> Vec<i64> {
        self.labels.iter().map(|k| k.unwrap_or(0)).collect()
    }

    pub fn component_of(&self, v: usize) -> Option<usize> {
        self.component[v]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, n: usize, m: usize) -> Option<&Edge> {
        self.edges.iter().find(|e| e.n == n && e.m == m)
    }

    pub fn solid_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.style == EdgeStyle::Solid)
    }

    pub fn dashed_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(|e| e.style == EdgeStyle::Dashed)
    }

    pub fn dashed_count(&self) -> usize {
        self.dashed_edges().count()
    }

    /// Adds one ranked drive term.
    pub fn insert(&mut self, n: usize, m: usize, weight: f64) -> Result<EdgeStyle> {
        if n >= m || m >= self.dim() {
            return Err(Error::Contract(format!("edge ({n},{m}) must satisfy n < m < {}", self.dim())));
        }
        if self.edge(n, m).is_some() {
            return Err(Error::Contract(format!("edge ({n},{m}) inserted twice")));
        }
        let style = match (self.labels[n], self.labels[m]) {
            (None, None) => {
                let c = self.members.len();
                self.members.push(vec![n, m]);
                self.assign(n, 0, c);
                self.assign(m, 1, c);
                EdgeStyle::Solid
            }
            (Some(kn), None) => {
                let c = self.component[n].expect("labeled vertex has a component");
                self.members[c].push(m);
                self.assign(m, kn + 1, c);
                EdgeStyle::Solid
            }
            (None, Some(km)) => {
                let c = self.component[m].expect("labeled vertex has a component");
                self.members[c].push(n);
                self.assign(n, km - 1, c);
                EdgeStyle::Solid
            }
            (Some(kn), Some(km)) => {
                if self.component[n] != self.component[m] {
                    self.merge_components(n, m)?;
                    EdgeStyle::Solid
                } else if km == kn + 1 {
                    EdgeStyle::Solid
                } else {
                    EdgeStyle::Dashed
                }
            }
        };
        self.edges.push(Edge { n, m, weight, style });
        Ok(style)
    }

    fn assign(&mut self, v: usize, k: i64, c: usize) {
        self.labels[v] = Some(k);
        self.component[v] = Some(c);
    }

    /// Joins the components of `n` and `m` by shifting every label of one of
    /// them so that `k_m = k_n + 1`.
    pub fn merge_components(&mut self, n: usize, m: usize) -> Result<()> {
        let (Some(kn), Some(km)) = (self.labels[n], self.labels[m]) else {
            return Err(Error::Contract(format!("merge of ({n},{m}) needs both vertices labeled")));
        };
        let (cn, cm) = (self.component[n].unwrap(), self.component[m].unwrap());
        if cn == cm {
            return Err(Error::Contract(format!("vertices {n} and {m} already share a component")));
        }
        let (moved, kept, shift) = match self.policy {
            MergePolicy::ShiftHigher => (cm, cn, kn + 1 - km),
            MergePolicy::ShiftLower => (cn, cm, km - 1 - kn),
        };
        let verts = std::mem::take(&mut self.members[moved]);
        for &v in &verts {
            self.labels[v] = self.labels[v].map(|k| k + shift);
            self.component[v] = Some(kept);
        }
        self.members[kept].extend(verts);
        Ok(())
    }

    /// True when the closed walk `cycle` has as many index-increasing steps
    /// as index-decreasing ones. The walk is closed implicitly if its last
    /// vertex differs from the first.
    pub fn is_zero_cyclic(&self, cycle: &[usize]) -> bool {
        zero_cyclicity_check(cycle)
    }

    pub fn signature(&self) -> GraphSignature {
        let mut solid: Vec<(usize, usize)> = self.solid_edges().map(|e| (e.n, e.m)).collect();
        solid.sort_unstable();
        let mut base: BTreeMap<usize, i64> = BTreeMap::new();
        for (v, k) in self.labels.iter().enumerate() {
            if let (Some(k), Some(c)) = (k, self.component[v]) {
                let b = base.entry(c).or_insert(*k);
                *b = (*b).min(*k);
            }
        }
        let labels = self
            .labels
            .iter()
            .enumerate()
            .map(|(v, k)| k.map(|k| k - base[&self.component[v].unwrap()]))
            .collect();
        GraphSignature { solid, labels }
    }

    /// Drive terms of `model` annotated with status, relevance and `k_nm`.
    pub fn classify(&self, model: &LindbladModel) -> Vec<DriveTerm> {
        let k = self.frame_labels();
        model
            .drives()
            .iter()
            .map(|t| {
                let mut t = t.clone();
                t.k_shift = k[t.n] - k[t.m] + 1;
                match self.edge(t.n, t.m) {
                    Some(e) => {
                        t.relevance = e.weight;
                        t.status = match e.style {
                            EdgeStyle::Solid => DriveStatus::Included,
                            EdgeStyle::Dashed => DriveStatus::Excluded,
                        };
                    }
                    None => t.status = DriveStatus::Undecided,
                }
                t
            })
            .collect()
    }

    /// DOT rendering: vertices `n (k=k_n)`, edge labels are weights with
    /// three significant digits.
    pub fn export_dot(&self) -> String {
        export_dot(self)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vertices: Vec<serde_json::Value> = (0..self.dim())
            .filter(|&v| self.labels[v].is_some())
            .map(|v| {
                serde_json::json!({
                    "index": v,
                    "k": self.labels[v],
                    "component": self.component[v],
                })
            })
            .collect();
        serde_json::json!({
            "dim": self.dim(),
            "vertices": vertices,
            "edges": self.edges,
        })
    }
}

/// Checks `P - Q = 0` along a closed walk.
pub fn zero_cyclicity_check(cycle: &[usize]) -> bool {
    if cycle.len() < 2 {
        return true;
    }
    let mut walk = cycle.to_vec();
    if walk.first() != walk.last() {
        walk.push(walk[0]);
    }
    let (mut up, mut down) = (0usize, 0usize);
    for w in walk.windows(2) {
        match w[1].cmp(&w[0]) {
            std::cmp::Ordering::Greater => up += 1,
            std::cmp::Ordering::Less => down += 1,
            std::cmp::Ordering::Equal => {}
        }
    }
    up == down
}

pub fn export_dot(graph: &FrameGraph) -> String {
    let mut out = String::from("digraph {\n");
    for (v, k) in graph.labels.iter().enumerate() {
        if let Some(k) = k {
            let _ = writeln!(out, "  {v} [label=\"{v} (k={k})\"];");
        }
    }
    for e in &graph.edges {
        let style = match e.style {
            EdgeStyle::Solid => "solid",
            EdgeStyle::Dashed => "dashed",
        };
        let _ = writeln!(out, "  {} -> {} [label=\"{:.2e}\", style={style}];", e.n, e.m, e.weight);
    }
    out.push_str("}\n");
    out
}

/// The rotating frame read off a graph.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    /// `k_n` for every state, isolated states at zero.
    pub labels: Vec<i64>,
    /// `w_d diag(k)`.
    pub omega: Operator,
    /// Sum of the solid-edge drive terms.
    pub v0: Operator,
    /// `H0 - Omega + V0 + V0^dagger`.
    pub h: Operator,
}

pub fn extract_frame(graph: &FrameGraph, model: &LindbladModel) -> Result<Frame> {
    extract_frame_with_labels(graph, model, graph.frame_labels())
}

/// As [`extract_frame`], with explicit labels (e.g. globally shifted ones).
pub fn extract_frame_with_labels(graph: &FrameGraph, model: &LindbladModel, labels: Vec<i64>) -> Result<Frame> {
    let d = model.dim();
    if graph.dim() != d || labels.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: graph.dim(),
        });
    }
    let wd = model.drive_frequency();
    let omega = Operator::diagonal(&labels.iter().map(|&k| k as f64 * wd).collect::<Vec<_>>());
    let mut v0 = Operator::zeros(d);
    for e in graph.solid_edges() {
        let amp = model.drive(e.n, e.m).map_or(C64::new(0.0, 0.0), |t| t.amplitude);
        v0.set(e.n, e.m, amp);
    }
    let h = &(&(&model.hamiltonian() - &omega) + &v0) + &v0.adjoint();
    Ok(Frame { labels, omega, v0, h })
}
