//! Scenario files: JSON documents describing the initial network, the
//! discovery events that grow it, and which costs to evaluate.
//!
//! Loading is strict. Unknown keys, wrong types and broken invariants are
//! all reported as validation errors carrying the offending field path;
//! malformed JSON is a parse error.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use rust_decimal::Decimal;
use serde::Deserialize;
use thiserror::Error;

use crate::cost_model::{CostParams, DomainCoefficients, Model};
use crate::hierarchy::DomainId;
use crate::topology::{Link, NodeId};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("failed to read scenario: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed scenario at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario at `{path}`: {message}")]
    Validation { path: String, message: String },
}

impl ScenarioError {
    pub(crate) fn validation(path: impl Into<String>, message: impl ToString) -> Self {
        ScenarioError::Validation {
            path: path.into(),
            message: message.to_string(),
        }
    }
}

/// A node discovered by an event, with the links it brings along.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrival {
    pub node: NodeId,
    pub links: Vec<(NodeId, Decimal)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    /// One node joins `domain`; the domain is rebalanced right away.
    AddNode {
        node: NodeId,
        domain: DomainId,
        links: Vec<(NodeId, Decimal)>,
    },
    /// Several nodes discovered together join `domain`, which is rebalanced
    /// once after all of them are in.
    AddNodes { domain: DomainId, arrivals: Vec<Arrival> },
    Snapshot { label: String },
}

impl Event {
    pub fn arrivals(&self) -> Vec<Arrival> {
        match self {
            Event::AddNode { node, links, .. } => vec![Arrival {
                node: *node,
                links: links.clone(),
            }],
            Event::AddNodes { arrivals, .. } => arrivals.clone(),
            Event::Snapshot { .. } => Vec::new(),
        }
    }
}

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub nodes: Vec<NodeId>,
    pub links: Vec<Link>,
    pub k_override: Vec<(NodeId, NodeId, Decimal)>,
    pub central: NodeId,
    pub m_max: usize,
    pub params: CostParams,
    pub domain_k: DomainCoefficients,
    pub events: Vec<Event>,
    pub polling_counts: Vec<u64>,
    pub models: Vec<Model>,
    pub flatbed_itinerary: Option<Vec<NodeId>>,
    /// Evaluate costs at every snapshot, not only on the final state.
    pub snapshot_costs: bool,
}

impl Scenario {
    /// Every node the scenario ever contains, in ascending order.
    pub fn all_nodes(&self) -> BTreeSet<NodeId> {
        let mut all: BTreeSet<NodeId> = self.nodes.iter().copied().collect();
        for e in &self.events {
            all.extend(e.arrivals().into_iter().map(|a| a.node));
        }
        all
    }

    /// The flat-bed route: the explicit itinerary, or the central node
    /// followed by every other node in ascending order.
    pub fn itinerary(&self) -> Vec<NodeId> {
        if let Some(explicit) = &self.flatbed_itinerary {
            return explicit.clone();
        }
        std::iter::once(self.central)
            .chain(self.all_nodes().into_iter().filter(|n| *n != self.central))
            .collect()
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: Option<String>,
    nodes: Vec<NodeId>,
    #[serde(default)]
    links: Vec<(NodeId, NodeId, Decimal)>,
    #[serde(default)]
    k_override: Vec<(NodeId, NodeId, Decimal)>,
    central: NodeId,
    m_max: usize,
    params: CostParams,
    #[serde(default)]
    domain_k: BTreeMap<String, Decimal>,
    #[serde(default)]
    events: Vec<RawEvent>,
    polling_counts: Vec<u64>,
    models: Vec<Model>,
    #[serde(default)]
    flatbed_itinerary: Option<Vec<NodeId>>,
    #[serde(default)]
    snapshot_costs: bool,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum RawEvent {
    AddNode(RawAddNode),
    AddNodes(RawAddNodes),
    Snapshot(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddNode {
    node: NodeId,
    domain: DomainId,
    #[serde(default)]
    links: Vec<(NodeId, Decimal)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddNodes {
    domain: DomainId,
    nodes: Vec<RawAddNodesEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddNodesEntry {
    node: NodeId,
    #[serde(default)]
    links: Vec<(NodeId, Decimal)>,
}

/// Reads, parses and validates a scenario document.
pub fn load_scenario<R: Read>(mut source: R) -> Result<Scenario, ScenarioError> {
    let mut text = Vec::new();
    source.read_to_end(&mut text)?;
    let raw = parse(&text)?;
    let scenario = validate(raw)?;
    super::dry_run(&scenario)?;
    Ok(scenario)
}

pub fn load_scenario_str(text: &str) -> Result<Scenario, ScenarioError> {
    load_scenario(text.as_bytes())
}

fn parse(text: &[u8]) -> Result<RawScenario, ScenarioError> {
    use serde_json::error::Category;

    let mut de = serde_json::Deserializer::from_slice(text);
    let raw: RawScenario = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            Category::Data => ScenarioError::validation(path, &inner),
            Category::Syntax | Category::Eof => ScenarioError::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
            Category::Io => ScenarioError::Io(inner.into()),
        }
    })?;
    de.end().map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(raw)
}

fn negative(v: Decimal) -> bool {
    v.is_sign_negative() && !v.is_zero()
}

fn validate(raw: RawScenario) -> Result<Scenario, ScenarioError> {
    use ScenarioError as E;

    if raw.name.trim().is_empty() {
        return Err(E::validation("name", "must not be empty"));
    }
    if raw.m_max == 0 {
        return Err(E::validation("m_max", "must be at least 1"));
    }
    if raw.nodes.is_empty() {
        return Err(E::validation("nodes", "must contain at least one node"));
    }
    let mut known = BTreeSet::new();
    for (i, n) in raw.nodes.iter().enumerate() {
        if !known.insert(*n) {
            return Err(E::validation(format!("nodes[{i}]"), format!("duplicate node {n}")));
        }
    }
    if !known.contains(&raw.central) {
        return Err(E::validation("central", format!("node {} is not in `nodes`", raw.central)));
    }

    let mut pairs = BTreeSet::new();
    let mut check_link = |path: String, known: &BTreeSet<NodeId>, a: NodeId, b: NodeId, coeff: Decimal| {
        if !known.contains(&a) {
            return Err(E::validation(path, format!("unknown node {a}")));
        }
        if !known.contains(&b) {
            return Err(E::validation(path, format!("unknown node {b}")));
        }
        if a == b {
            return Err(E::validation(path, format!("self link on node {a}")));
        }
        if negative(coeff) {
            return Err(E::validation(path, format!("negative coefficient {coeff}")));
        }
        if !pairs.insert((a.min(b), a.max(b))) {
            return Err(E::validation(path, format!("duplicate link between {a} and {b}")));
        }
        Ok(())
    };
    let mut links = Vec::with_capacity(raw.links.len());
    for (i, &(a, b, coeff)) in raw.links.iter().enumerate() {
        check_link(format!("links[{i}]"), &known, a, b, coeff)?;
        links.push(Link { a, b, coeff });
    }

    for (name, value) in raw.params.byte_fields() {
        if negative(value) {
            return Err(E::validation(format!("params.{name}"), "must be non-negative"));
        }
    }
    let mut models = Vec::new();
    for (i, m) in raw.models.iter().enumerate() {
        if models.contains(m) {
            return Err(E::validation(format!("models[{i}]"), format!("duplicate model {m}")));
        }
        models.push(*m);
    }
    if models.contains(&Model::Cs) && raw.params.num_vars == 0 {
        return Err(E::validation("params.num_vars", "must be at least 1 for centralized polling"));
    }

    let mut domain_k = DomainCoefficients::new();
    for (pattern, value) in &raw.domain_k {
        let path = format!("domain_k.{pattern}");
        if negative(*value) {
            return Err(E::validation(path, "must be non-negative"));
        }
        domain_k.insert(pattern, *value).map_err(|e| E::validation(path, e))?;
    }

    let mut labels = BTreeSet::new();
    let mut events = Vec::with_capacity(raw.events.len());
    for (i, ev) in raw.events.into_iter().enumerate() {
        let event = match ev {
            RawEvent::Snapshot(label) => {
                if !labels.insert(label.clone()) {
                    return Err(E::validation(
                        format!("events[{i}].snapshot"),
                        format!("duplicate snapshot label `{label}`"),
                    ));
                }
                Event::Snapshot { label }
            }
            RawEvent::AddNode(a) => {
                let base = format!("events[{i}].add_node");
                if !known.insert(a.node) {
                    return Err(E::validation(format!("{base}.node"), format!("node {} already exists", a.node)));
                }
                for (j, &(peer, coeff)) in a.links.iter().enumerate() {
                    check_link(format!("{base}.links[{j}]"), &known, a.node, peer, coeff)?;
                }
                Event::AddNode {
                    node: a.node,
                    domain: a.domain,
                    links: a.links,
                }
            }
            RawEvent::AddNodes(a) => {
                let base = format!("events[{i}].add_nodes");
                if a.nodes.is_empty() {
                    return Err(E::validation(format!("{base}.nodes"), "must not be empty"));
                }
                for (j, entry) in a.nodes.iter().enumerate() {
                    if !known.insert(entry.node) {
                        return Err(E::validation(
                            format!("{base}.nodes[{j}].node"),
                            format!("node {} already exists", entry.node),
                        ));
                    }
                }
                for (j, entry) in a.nodes.iter().enumerate() {
                    for (k, &(peer, coeff)) in entry.links.iter().enumerate() {
                        check_link(format!("{base}.nodes[{j}].links[{k}]"), &known, entry.node, peer, coeff)?;
                    }
                }
                Event::AddNodes {
                    domain: a.domain,
                    arrivals: a
                        .nodes
                        .into_iter()
                        .map(|e| Arrival {
                            node: e.node,
                            links: e.links,
                        })
                        .collect(),
                }
            }
        };
        events.push(event);
    }

    let mut overrides: BTreeMap<(NodeId, NodeId), Decimal> = BTreeMap::new();
    for (i, &(a, b, cost)) in raw.k_override.iter().enumerate() {
        let path = format!("k_override[{i}]");
        for n in [a, b] {
            if !known.contains(&n) {
                return Err(E::validation(path, format!("unknown node {n}")));
            }
        }
        if negative(cost) {
            return Err(E::validation(path, format!("negative cost {cost}")));
        }
        if a == b && !cost.is_zero() {
            return Err(E::validation(path, "diagonal entries must be zero"));
        }
        let key = (a.min(b), a.max(b));
        if overrides.get(&key).is_some_and(|prev| *prev != cost) {
            return Err(E::validation(path, format!("conflicts with an earlier entry for ({a}, {b})")));
        }
        overrides.insert(key, cost);
    }

    if let Some(route) = &raw.flatbed_itinerary {
        if route.first() != Some(&raw.central) {
            return Err(E::validation("flatbed_itinerary", "must start at the central node"));
        }
        let mut seen = BTreeSet::new();
        for (i, n) in route.iter().enumerate() {
            let path = format!("flatbed_itinerary[{i}]");
            if !known.contains(n) {
                return Err(E::validation(path, format!("unknown node {n}")));
            }
            if !seen.insert(*n) {
                return Err(E::validation(path, format!("node {n} visited twice")));
            }
        }
    }

    let mut counts = BTreeSet::new();
    for (i, p) in raw.polling_counts.iter().enumerate() {
        if !counts.insert(*p) {
            return Err(E::validation(format!("polling_counts[{i}]"), format!("duplicate polling count {p}")));
        }
    }

    Ok(Scenario {
        name: raw.name,
        description: raw.description,
        nodes: raw.nodes,
        links,
        k_override: raw.k_override,
        central: raw.central,
        m_max: raw.m_max,
        params: raw.params,
        domain_k,
        events,
        polling_counts: raw.polling_counts,
        models,
        flatbed_itinerary: raw.flatbed_itinerary,
        snapshot_costs: raw.snapshot_costs,
    })
}
