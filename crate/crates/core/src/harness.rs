//! Method dispatch, run records and gap tables used by the command line front end.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::{greedy_expansion, lp_heuristic};
use crate::da::{run_da_unchecked, total_cost};
use crate::error::{Error, Result};
use crate::instance::{ExpansionVector, MatchingInstance};
use crate::oracle::brute_force_optimal;
use crate::tree::{OrderingKind, Representation};
use crate::uct::{default_exploration, search, SearchConfig, TrajectoryPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Da0,
    Greedy,
    Lph,
    Oracle,
    Uct(Representation, OrderingKind),
}

impl Method {
    /// Every method, in table order.
    pub fn all() -> Vec<Method> {
        use OrderingKind::*;
        use Representation::*;
        vec![
            Method::Da0,
            Method::Lph,
            Method::Greedy,
            Method::Oracle,
            Method::Uct(Iterative, Random),
            Method::Uct(Ipt, Random),
            Method::Uct(Ipt, Popularity),
            Method::Uct(Ipt, Envy),
            Method::Uct(Bt, Random),
            Method::Uct(Bt, Popularity),
            Method::Uct(Bt, Envy),
        ]
    }

    pub fn uct_variants() -> Vec<Method> {
        Method::all().into_iter().filter(Method::is_uct).collect()
    }

    pub fn is_uct(&self) -> bool {
        matches!(self, Method::Uct(..))
    }

    pub fn name(&self) -> String {
        match self {
            Method::Da0 => "da0".into(),
            Method::Greedy => "grdy".into(),
            Method::Lph => "lph".into(),
            Method::Oracle => "oracle".into(),
            Method::Uct(Representation::Iterative, _) => "uct-iter".into(),
            Method::Uct(repr, kind) => {
                let k = match kind {
                    OrderingKind::Random => 'r',
                    OrderingKind::Popularity => 'p',
                    OrderingKind::Envy => 'e',
                };
                format!("uct-{}-{k}", repr.as_str())
            }
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(m) = Method::all().into_iter().find(|m| m.name() == s) {
            return Ok(m);
        }
        match s {
            "agglin" | "agg-lin" => Err(Error::Parameter(format!(
                "method {s}: method not implemented; out of scope"
            ))),
            _ => Err(Error::Parameter(format!("unknown method {s:?}"))),
        }
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Settings shared by all methods; only UCT methods read them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Defaults to `B * 1000` when absent.
    pub rounds: Option<u64>,
    pub exploration: f64,
    pub seed: u64,
    pub time_limit_secs: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rounds: None,
            exploration: default_exploration(),
            seed: 0,
            time_limit_secs: None,
        }
    }
}

impl RunConfig {
    pub fn search_config(
        &self,
        instance: &MatchingInstance,
        representation: Representation,
        ordering: OrderingKind,
    ) -> SearchConfig {
        let mut config = SearchConfig::for_instance(instance, representation, ordering, self.seed);
        if let Some(rounds) = self.rounds {
            config.rounds = rounds;
        }
        config.exploration = self.exploration;
        config.time_limit = self.time_limit_secs.map(Duration::from_secs_f64);
        config
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub method: Method,
    pub best_cost: u64,
    pub best_expansion: ExpansionVector,
    pub wall_time: Duration,
    /// UCT only.
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    pub terminated_exhaustively: Option<bool>,
    pub rounds: Option<u64>,
}

pub fn run_method(
    instance: &MatchingInstance,
    method: Method,
    config: &RunConfig,
) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut trajectory = None;
    let mut exhaustive = None;
    let mut rounds = None;
    let (best_expansion, best_cost) = match method {
        Method::Da0 => {
            let t = instance.zero_expansion();
            let cost = total_cost(instance, &run_da_unchecked(instance, t.as_slice()));
            (t, cost)
        }
        Method::Greedy => {
            let out = greedy_expansion(instance)?;
            (out.expansion, out.cost)
        }
        Method::Lph => {
            let out = lp_heuristic(instance)?;
            (out.expansion, out.cost)
        }
        Method::Oracle => brute_force_optimal(instance)?,
        Method::Uct(repr, kind) => {
            let sc = config.search_config(instance, repr, kind);
            rounds = Some(sc.rounds);
            let result = search(instance, &sc)?;
            exhaustive = Some(result.terminated_exhaustively);
            trajectory = Some(result.trajectory);
            (result.best_expansion, result.best_cost)
        }
    };
    Ok(RunOutcome {
        method,
        best_cost,
        best_expansion,
        wall_time: start.elapsed(),
        trajectory,
        terminated_exhaustively: exhaustive,
        rounds,
    })
}

/// Hex SHA-256 of an instance file's bytes.
pub fn instance_digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub instance_digest: String,
    pub method: Method,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub rounds: Option<u64>,
    pub best_cost: u64,
    /// One entry per hospital, in file order.
    pub best_expansion: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub terminated_exhaustively: Option<bool>,
    pub wall_time_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectory_path: Option<String>,
}

impl RunRecord {
    pub fn new(
        instance: impl Into<String>,
        instance_digest: impl Into<String>,
        config: &RunConfig,
        outcome: &RunOutcome,
        trajectory_path: Option<String>,
    ) -> Self {
        Self {
            instance: instance.into(),
            instance_digest: instance_digest.into(),
            method: outcome.method,
            config: config.clone(),
            rounds: outcome.rounds,
            best_cost: outcome.best_cost,
            best_expansion: outcome.best_expansion.0.clone(),
            terminated_exhaustively: outcome.terminated_exhaustively,
            wall_time_secs: outcome.wall_time.as_secs_f64(),
            trajectory_path,
        }
    }

    /// Pretty JSON with the wall time zeroed, for reproducibility checks.
    pub fn to_json_without_wall_time(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_secs = 0.0;
        copy.to_json()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run record serializes")
    }
}

/// Percentage gap relative to the method's own cost: `100 (c - c_ref) / c`.
pub fn gap(method_cost: u64, reference_cost: u64) -> f64 {
    100.0 * (method_cost as f64 - reference_cost as f64) / method_cost as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapTable {
    pub methods: Vec<Method>,
    /// Instance label and one gap per method.
    pub rows: Vec<(String, Vec<f64>)>,
}

impl GapTable {
    pub fn new(methods: Vec<Method>) -> Self {
        Self {
            methods,
            rows: Vec::new(),
        }
    }

    /// Adds one instance given the cost of each method (in `methods` order).
    pub fn push(&mut self, label: impl Into<String>, costs: &[u64], reference_cost: u64) {
        assert_eq!(costs.len(), self.methods.len());
        let gaps = costs.iter().map(|&c| gap(c, reference_cost)).collect();
        self.rows.push((label.into(), gaps));
    }

    pub fn averages(&self) -> Vec<f64> {
        let n = self.rows.len().max(1) as f64;
        (0..self.methods.len())
            .map(|j| self.rows.iter().map(|(_, g)| g[j]).sum::<f64>() / n)
            .collect()
    }

    /// One row per instance plus a final `average` row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("instance");
        for m in &self.methods {
            out.push(',');
            out.push_str(&m.name());
        }
        out.push('\n');
        let fmt_row = |label: &str, gaps: &[f64]| {
            let mut line = label.replace(',', "_");
            for g in gaps {
                line.push_str(&format!(",{g:.4}"));
            }
            line.push('\n');
            line
        };
        for (label, gaps) in &self.rows {
            out.push_str(&fmt_row(label, gaps));
        }
        out.push_str(&fmt_row("average", &self.averages()));
        out
    }
}
