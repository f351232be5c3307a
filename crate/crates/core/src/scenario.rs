//! Scenario files: parsing, validation and canonical rendering.
//!
//! The format is line-oriented text with four sections:
//!
//! ```text
//! [params]
//! radio_range = 100.0
//! beacon_interval = 1.0
//! neighbor_timeout = 4.5
//! planarization = GG
//! duration = 60.0
//! seed = 42
//! [nodes]            # id x y
//! 0 0.0 0.0
//! 1 80.0 0.0
//! [mobility]         # id t x y   (waypoints; omitted => static)
//! 1 10.0 80.0 0.0
//! 1 30.0 80.0 50.0
//! [flows]            # src dst start interval count
//! 0 1 5.0 1.0 10
//! ```
//!
//! `#` starts a comment; tokens are whitespace-separated.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::geometry::{distance, Planarization, Position};
use crate::neighbor::NodeId;

/// Configurations closer than this to a geometric degeneracy (coincident
/// nodes, collinear mutual neighbors) are rejected at validation, so the
/// exact-sign predicates never decide a knife-edge case.
pub const DEGENERACY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub src: NodeId,
    pub dst: NodeId,
    pub start: f64,
    pub interval: f64,
    pub count: u32,
}

/// A parsed and validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub radio_range: f64,
    pub beacon_interval: f64,
    pub neighbor_timeout: f64,
    pub planarization: Planarization,
    pub duration: f64,
    pub seed: u64,
    pub ttl: u32,
    /// Radio propagation delay in seconds.
    pub delay: f64,
    /// Per-receiver frame loss probability.
    pub loss: f64,
    pub nodes: Vec<(NodeId, Position)>,
    /// Waypoint lists per mobile node; times strictly increasing.
    pub mobility: BTreeMap<NodeId, Vec<(f64, Position)>>,
    pub flows: Vec<Flow>,
}

pub const DEFAULT_BEACON_INTERVAL: f64 = 1.0;
/// Default timeout tolerates three consecutive lost or late beacons.
pub const DEFAULT_TIMEOUT_FACTOR: f64 = 4.5;
pub const DEFAULT_DELAY: f64 = 0.001;
pub const DEFAULT_TTL: u32 = 128;

/// Scenario parse or validation failure, citing the offending line when
/// one exists.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub msg: String,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

fn err(line: usize, msg: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line: Some(line),
        msg: msg.into(),
    }
}

fn verr(msg: impl Into<String>) -> ScenarioError {
    ScenarioError {
        line: None,
        msg: msg.into(),
    }
}

#[derive(PartialEq, Clone, Copy)]
enum Section {
    None,
    Params,
    Nodes,
    Mobility,
    Flows,
}

struct RawParams {
    radio_range: Option<f64>,
    beacon_interval: Option<f64>,
    neighbor_timeout: Option<f64>,
    planarization: Option<Planarization>,
    duration: Option<f64>,
    seed: Option<u64>,
    ttl: Option<u32>,
    delay: Option<f64>,
    loss: Option<f64>,
}

fn parse_num<T: std::str::FromStr>(tok: &str, what: &str, line: usize) -> Result<T, ScenarioError> {
    tok.parse::<T>()
        .map_err(|_| err(line, format!("invalid {what} `{tok}`")))
}

/// Parses and validates a scenario file.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, ScenarioError> {
    let mut section = Section::None;
    let mut params = RawParams {
        radio_range: None,
        beacon_interval: None,
        neighbor_timeout: None,
        planarization: None,
        duration: None,
        seed: None,
        ttl: None,
        delay: None,
        loss: None,
    };
    let mut nodes: Vec<(NodeId, Position)> = Vec::new();
    let mut node_lines: BTreeMap<NodeId, usize> = BTreeMap::new();
    let mut mobility: BTreeMap<NodeId, Vec<(f64, Position)>> = BTreeMap::new();
    let mut flows: Vec<Flow> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name {
                "params" => Section::Params,
                "nodes" => Section::Nodes,
                "mobility" => Section::Mobility,
                "flows" => Section::Flows,
                other => return Err(err(lineno, format!("unknown section `[{other}]`"))),
            };
            continue;
        }
        match section {
            Section::None => {
                return Err(err(lineno, "content before any section header"));
            }
            Section::Params => {
                let (key, value) = line
                    .split_once('=')
                    .ok_or_else(|| err(lineno, "expected `key = value`"))?;
                let key = key.trim();
                let value = value.trim();
                match key {
                    "radio_range" => params.radio_range = Some(parse_num(value, "radio_range", lineno)?),
                    "beacon_interval" => {
                        params.beacon_interval = Some(parse_num(value, "beacon_interval", lineno)?)
                    }
                    "neighbor_timeout" => {
                        params.neighbor_timeout = Some(parse_num(value, "neighbor_timeout", lineno)?)
                    }
                    "planarization" => {
                        params.planarization = Some(match value {
                            "GG" => Planarization::Gg,
                            "RNG" => Planarization::Rng,
                            other => {
                                return Err(err(
                                    lineno,
                                    format!("planarization must be GG or RNG, got `{other}`"),
                                ))
                            }
                        })
                    }
                    "duration" => params.duration = Some(parse_num(value, "duration", lineno)?),
                    "seed" => params.seed = Some(parse_num(value, "seed", lineno)?),
                    "ttl" => params.ttl = Some(parse_num(value, "ttl", lineno)?),
                    "delay" => params.delay = Some(parse_num(value, "delay", lineno)?),
                    "loss" => params.loss = Some(parse_num(value, "loss", lineno)?),
                    other => return Err(err(lineno, format!("unknown key `{other}`"))),
                }
            }
            Section::Nodes => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 3 {
                    return Err(err(lineno, "node line must be `id x y`"));
                }
                let id = NodeId(parse_num(toks[0], "node id", lineno)?);
                let x: f64 = parse_num(toks[1], "coordinate", lineno)?;
                let y: f64 = parse_num(toks[2], "coordinate", lineno)?;
                if !x.is_finite() || !y.is_finite() {
                    return Err(err(lineno, "coordinates must be finite"));
                }
                if x.abs() > f32::MAX as f64 || y.abs() > f32::MAX as f64 {
                    return Err(err(lineno, "coordinate overflows the beacon wire format"));
                }
                if node_lines.contains_key(&id) {
                    return Err(err(lineno, format!("duplicate node id {id}")));
                }
                let pos = Position::new(x, y);
                for &(other, p) in &nodes {
                    if distance(p, pos) < DEGENERACY_EPS {
                        return Err(err(
                            lineno,
                            format!("node {id} coincides with node {other}"),
                        ));
                    }
                }
                node_lines.insert(id, lineno);
                nodes.push((id, pos));
            }
            Section::Mobility => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 4 {
                    return Err(err(lineno, "mobility line must be `id t x y`"));
                }
                let id = NodeId(parse_num(toks[0], "node id", lineno)?);
                let t: f64 = parse_num(toks[1], "waypoint time", lineno)?;
                let x: f64 = parse_num(toks[2], "coordinate", lineno)?;
                let y: f64 = parse_num(toks[3], "coordinate", lineno)?;
                if !t.is_finite() || t < 0.0 {
                    return Err(err(lineno, "waypoint time must be nonnegative"));
                }
                if !x.is_finite() || !y.is_finite() {
                    return Err(err(lineno, "coordinates must be finite"));
                }
                let initial = nodes
                    .iter()
                    .find(|&&(nid, _)| nid == id)
                    .map(|&(_, p)| p)
                    .ok_or_else(|| err(lineno, format!("mobility for undeclared node {id}")))?;
                let pos = Position::new(x, y);
                let wps = mobility.entry(id).or_default();
                if t == 0.0 {
                    if !wps.is_empty() {
                        return Err(err(lineno, "waypoint times must be strictly increasing"));
                    }
                    if pos != initial {
                        return Err(err(
                            lineno,
                            format!("t=0 waypoint for node {id} conflicts with its initial position"),
                        ));
                    }
                    // redundant with the [nodes] entry; skip it
                    continue;
                }
                if let Some(&(last_t, _)) = wps.last() {
                    if t <= last_t {
                        return Err(err(lineno, "waypoint times must be strictly increasing"));
                    }
                }
                wps.push((t, pos));
            }
            Section::Flows => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                if toks.len() != 5 {
                    return Err(err(lineno, "flow line must be `src dst start interval count`"));
                }
                let src = NodeId(parse_num(toks[0], "node id", lineno)?);
                let dst = NodeId(parse_num(toks[1], "node id", lineno)?);
                for endpoint in [src, dst] {
                    if !node_lines.contains_key(&endpoint) {
                        return Err(err(
                            lineno,
                            format!("flow references undeclared node {endpoint}"),
                        ));
                    }
                }
                let start: f64 = parse_num(toks[2], "flow start", lineno)?;
                let interval: f64 = parse_num(toks[3], "flow interval", lineno)?;
                let count: u32 = parse_num(toks[4], "flow count", lineno)?;
                if !start.is_finite() || start < 0.0 {
                    return Err(err(lineno, "flow start must be nonnegative"));
                }
                if !interval.is_finite() || interval <= 0.0 {
                    return Err(err(lineno, "flow interval must be positive"));
                }
                if count == 0 {
                    return Err(err(lineno, "flow count must be at least 1"));
                }
                flows.push(Flow {
                    src,
                    dst,
                    start,
                    interval,
                    count,
                });
            }
        }
    }

    let radio_range = params
        .radio_range
        .ok_or_else(|| verr("missing required key `radio_range`"))?;
    let duration = params
        .duration
        .ok_or_else(|| verr("missing required key `duration`"))?;
    let beacon_interval = params.beacon_interval.unwrap_or(DEFAULT_BEACON_INTERVAL);
    let neighbor_timeout = params
        .neighbor_timeout
        .unwrap_or(DEFAULT_TIMEOUT_FACTOR * beacon_interval);

    let config = ScenarioConfig {
        radio_range,
        beacon_interval,
        neighbor_timeout,
        planarization: params.planarization.unwrap_or(Planarization::Gg),
        duration,
        seed: params.seed.unwrap_or(0),
        ttl: params.ttl.unwrap_or(DEFAULT_TTL),
        delay: params.delay.unwrap_or(DEFAULT_DELAY),
        loss: params.loss.unwrap_or(0.0),
        nodes,
        mobility,
        flows,
    };
    config.validate()?;
    Ok(config)
}

impl ScenarioConfig {
    /// Semantic validation of a config however it was built.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.nodes.is_empty() {
            return Err(verr("scenario declares no nodes"));
        }
        if !(self.radio_range > 0.0) {
            return Err(verr("radio_range must be positive"));
        }
        if !(self.beacon_interval > 0.0) {
            return Err(verr("beacon_interval must be positive"));
        }
        if !(self.neighbor_timeout > self.beacon_interval) {
            return Err(verr("neighbor_timeout must exceed beacon_interval"));
        }
        if !(self.duration > 0.0) {
            return Err(verr("duration must be positive"));
        }
        if !(0.0..=1.0).contains(&self.loss) {
            return Err(verr("loss must be within [0, 1]"));
        }
        if !(self.delay >= 0.0) {
            return Err(verr("delay must be nonnegative"));
        }
        if self.ttl == 0 {
            return Err(verr("ttl must be at least 1"));
        }

        let mut seen = std::collections::BTreeSet::new();
        for &(id, p) in &self.nodes {
            if !seen.insert(id) {
                return Err(verr(format!("duplicate node id {id}")));
            }
            if !p.is_finite() {
                return Err(verr(format!("node {id} has a non-finite position")));
            }
        }
        for i in 0..self.nodes.len() {
            for j in (i + 1)..self.nodes.len() {
                if distance(self.nodes[i].1, self.nodes[j].1) < DEGENERACY_EPS {
                    return Err(verr(format!(
                        "nodes {} and {} coincide",
                        self.nodes[i].0, self.nodes[j].0
                    )));
                }
            }
        }
        self.check_collinear_mutual_neighbors()?;

        for (id, wps) in &self.mobility {
            if !seen.contains(id) {
                return Err(verr(format!("mobility for undeclared node {id}")));
            }
            let mut last = 0.0;
            for &(t, p) in wps {
                if t <= last {
                    return Err(verr(format!(
                        "node {id} has non-increasing waypoint times"
                    )));
                }
                if !p.is_finite() {
                    return Err(verr(format!("node {id} has a non-finite waypoint")));
                }
                last = t;
            }
        }
        for f in &self.flows {
            for endpoint in [f.src, f.dst] {
                if !seen.contains(&endpoint) {
                    return Err(verr(format!("flow references undeclared node {endpoint}")));
                }
            }
            if !(f.start >= 0.0) || !(f.interval > 0.0) || f.count == 0 {
                return Err(verr("flow fields out of range"));
            }
        }
        Ok(())
    }

    /// Rejects any three nodes that are pairwise within radio range and
    /// within [`DEGENERACY_EPS`] of exact collinearity: those are exactly
    /// the triples the forwarding predicates could be asked to order.
    fn check_collinear_mutual_neighbors(&self) -> Result<(), ScenarioError> {
        let n = self.nodes.len();
        for i in 0..n {
            for j in (i + 1)..n {
                let (a_id, a) = self.nodes[i];
                let (b_id, b) = self.nodes[j];
                let dab = distance(a, b);
                if dab > self.radio_range {
                    continue;
                }
                for k in (j + 1)..n {
                    let (c_id, c) = self.nodes[k];
                    let dac = distance(a, c);
                    let dbc = distance(b, c);
                    if dac > self.radio_range || dbc > self.radio_range {
                        continue;
                    }
                    let area2 =
                        ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)).abs();
                    let longest = dab.max(dac).max(dbc);
                    if area2 / longest < DEGENERACY_EPS {
                        return Err(verr(format!(
                            "nodes {a_id}, {b_id}, {c_id} are mutual neighbors within {DEGENERACY_EPS} of collinear"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; parsing it back yields an identical config.
    pub fn render(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        out.push_str("[params]\n");
        let _ = writeln!(out, "radio_range = {}", self.radio_range);
        let _ = writeln!(out, "beacon_interval = {}", self.beacon_interval);
        let _ = writeln!(out, "neighbor_timeout = {}", self.neighbor_timeout);
        let _ = writeln!(out, "planarization = {}", self.planarization);
        let _ = writeln!(out, "duration = {}", self.duration);
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "ttl = {}", self.ttl);
        let _ = writeln!(out, "delay = {}", self.delay);
        let _ = writeln!(out, "loss = {}", self.loss);
        out.push_str("[nodes]\n");
        for &(id, p) in &self.nodes {
            let _ = writeln!(out, "{id} {} {}", p.x, p.y);
        }
        if self.mobility.values().any(|w| !w.is_empty()) {
            out.push_str("[mobility]\n");
            for (id, wps) in &self.mobility {
                for &(t, p) in wps {
                    let _ = writeln!(out, "{id} {t} {} {}", p.x, p.y);
                }
            }
        }
        if !self.flows.is_empty() {
            out.push_str("[flows]\n");
            for f in &self.flows {
                let _ = writeln!(
                    out,
                    "{} {} {} {} {}",
                    f.src, f.dst, f.start, f.interval, f.count
                );
            }
        }
        out
    }
}
