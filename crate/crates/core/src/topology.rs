//! Managed network graph and the link cost coefficients derived from it.
//!
//! Every cost formula prices bytes moved between two nodes by a
//! dimensionless coefficient. A single link carries its own coefficient
//! (1 inside a domain, 5 across domains in the reference network); the
//! coefficient between arbitrary nodes is the cheapest path sum. A network
//! may also carry explicit pair overrides when only the pairwise
//! coefficients, not the link layout, are known.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use petgraph::algo::dijkstra;
use petgraph::graphmap::UnGraphMap;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a managed node. Always positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct NodeId(u32);

impl NodeId {
    pub fn new(id: u32) -> Result<Self, TopologyError> {
        if id == 0 {
            Err(TopologyError::ZeroNodeId)
        } else {
            Ok(NodeId(id))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl TryFrom<u32> for NodeId {
    type Error = TopologyError;

    fn try_from(value: u32) -> Result<Self, Self::Error> {
        NodeId::new(value)
    }
}

impl From<NodeId> for u32 {
    fn from(id: NodeId) -> u32 {
        id.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for NodeId {
    type Err = TopologyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let raw: u32 = s
            .trim()
            .parse()
            .map_err(|_| TopologyError::BadNodeId(s.to_string()))?;
        NodeId::new(raw)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("node ids must be positive")]
    ZeroNodeId,
    #[error("invalid node id `{0}`")]
    BadNodeId(String),
    #[error("node {0} already present")]
    DuplicateNode(NodeId),
    #[error("node {0} is not part of the network")]
    UnknownNode(NodeId),
    #[error("link from node {0} to itself")]
    SelfLink(NodeId),
    #[error("nodes {0} and {1} are already linked")]
    DuplicateLink(NodeId, NodeId),
    #[error("negative cost coefficient {0}")]
    NegativeCoeff(Decimal),
    #[error("override for ({0}, {0}) must be zero")]
    NonZeroDiagonal(NodeId),
    #[error("override for ({0}, {1}) conflicts with an existing value")]
    AsymmetricOverride(NodeId, NodeId),
    #[error("node {1} is unreachable from node {0}")]
    Unreachable(NodeId, NodeId),
}

/// Undirected link with its cost coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub coeff: Decimal,
}

/// Weighted undirected graph of managed nodes.
#[derive(Debug, Clone, Default)]
pub struct Network {
    graph: UnGraphMap<NodeId, Decimal>,
    k_override: BTreeMap<(NodeId, NodeId), Decimal>,
}

fn ordered(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, id: NodeId) -> Result<(), TopologyError> {
        if self.graph.contains_node(id) {
            return Err(TopologyError::DuplicateNode(id));
        }
        self.graph.add_node(id);
        Ok(())
    }

    pub fn add_link(&mut self, a: NodeId, b: NodeId, coeff: Decimal) -> Result<(), TopologyError> {
        for n in [a, b] {
            if !self.graph.contains_node(n) {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if a == b {
            return Err(TopologyError::SelfLink(a));
        }
        if coeff.is_sign_negative() && !coeff.is_zero() {
            return Err(TopologyError::NegativeCoeff(coeff));
        }
        if self.graph.contains_edge(a, b) {
            return Err(TopologyError::DuplicateLink(a, b));
        }
        self.graph.add_edge(a, b, coeff);
        Ok(())
    }

    /// Pins the coefficient between `i` and `j`, bypassing the link graph.
    ///
    /// The pair need not be present yet; scenario files declare overrides
    /// up front for nodes that are discovered later.
    pub fn set_override(&mut self, i: NodeId, j: NodeId, cost: Decimal) -> Result<(), TopologyError> {
        if cost.is_sign_negative() && !cost.is_zero() {
            return Err(TopologyError::NegativeCoeff(cost));
        }
        if i == j && !cost.is_zero() {
            return Err(TopologyError::NonZeroDiagonal(i));
        }
        let key = ordered(i, j);
        match self.k_override.get(&key) {
            Some(existing) if *existing != cost => Err(TopologyError::AsymmetricOverride(i, j)),
            _ => {
                self.k_override.insert(key, cost);
                Ok(())
            }
        }
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.graph.contains_node(id)
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.graph.nodes().collect()
    }

    pub fn links(&self) -> Vec<Link> {
        let mut links: Vec<Link> = self
            .graph
            .all_edges()
            .map(|(a, b, coeff)| {
                let (a, b) = ordered(a, b);
                Link { a, b, coeff: *coeff }
            })
            .collect();
        links.sort_by_key(|l| (l.a, l.b));
        links
    }

    pub fn link_coeff(&self, a: NodeId, b: NodeId) -> Option<Decimal> {
        self.graph.edge_weight(a, b).copied()
    }

    pub fn k_override(&self, i: NodeId, j: NodeId) -> Option<Decimal> {
        self.k_override.get(&ordered(i, j)).copied()
    }

    /// Coefficient between two nodes: the pinned override if any, otherwise
    /// the cheapest sum of link coefficients over all connecting paths.
    pub fn path_cost(&self, i: NodeId, j: NodeId) -> Result<Decimal, TopologyError> {
        for n in [i, j] {
            if !self.contains(n) {
                return Err(TopologyError::UnknownNode(n));
            }
        }
        if let Some(cost) = self.k_override(i, j) {
            return Ok(cost);
        }
        if i == j {
            return Ok(Decimal::ZERO);
        }
        dijkstra(&self.graph, i, Some(j), |(_, _, w)| *w)
            .get(&j)
            .copied()
            .ok_or(TopologyError::Unreachable(i, j))
    }

    /// Coefficient between a mother manager's host and a child manager's host.
    pub fn inter_domain_cost(&self, mother: NodeId, child: NodeId) -> Result<Decimal, TopologyError> {
        self.path_cost(mother, child)
    }
}
