//! Manager tree: the global manager at the root and the sub-network
//! managers it (and they, recursively) spawn as domains outgrow `m_max`.
//!
//! Splitting rule: an oversized domain keeps its first `m_max` members in
//! join order and hands the rest to one freshly spawned child, which is
//! then checked in turn. The manager host never leaves its own domain
//! during a split.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HierarchyError {
    #[error("cannot partition an empty network")]
    EmptyNetwork,
    #[error("m_max must be at least 1")]
    InvalidMaxDomainSize,
    #[error("central node {0} is not among the nodes")]
    CentralNotInNodes(NodeId),
    #[error("unknown domain D{0}")]
    UnknownDomain(DomainId),
    #[error("node {0} is already assigned to a domain")]
    DuplicateNode(NodeId),
    #[error("node {0} is not assigned to any domain")]
    UnassignedNode(NodeId),
    #[error("invalid domain id `{0}`")]
    BadDomainId(String),
}

/// Dotted hierarchical domain name, e.g. `1.3.1`. The root is `1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DomainId(Vec<u32>);

impl DomainId {
    pub fn root() -> Self {
        DomainId(vec![1])
    }

    pub fn child(&self, index: u32) -> Self {
        let mut path = self.0.clone();
        path.push(index);
        DomainId(path)
    }

    pub fn parent(&self) -> Option<Self> {
        (self.0.len() > 1).then(|| DomainId(self.0[..self.0.len() - 1].to_vec()))
    }

    pub fn path(&self) -> &[u32] {
        &self.0
    }

    /// Root has depth 0.
    pub fn depth(&self) -> usize {
        self.0.len() - 1
    }

    pub fn is_root(&self) -> bool {
        self.0.len() == 1
    }

    /// True if `self` lies strictly below `ancestor`.
    pub fn is_descendant_of(&self, ancestor: &DomainId) -> bool {
        self.0.len() > ancestor.0.len() && self.0.starts_with(&ancestor.0)
    }
}

impl fmt::Display for DomainId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for part in &self.0 {
            if !first {
                f.write_str(".")?;
            }
            write!(f, "{part}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for DomainId {
    type Err = HierarchyError;

    /// Accepts `1.3.1` as well as the `D1.3.1` spelling.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HierarchyError::BadDomainId(s.to_string());
        let body = s.trim();
        let body = body.strip_prefix('D').unwrap_or(body);
        let path = body
            .split('.')
            .map(|part| match part.parse::<u32>() {
                Ok(v) if v > 0 && !part.starts_with('+') => Ok(v),
                _ => Err(bad()),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if path.first() != Some(&1) {
            return Err(bad());
        }
        Ok(DomainId(path))
    }
}

impl Serialize for DomainId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DomainId {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A manager's domain: its members in join order and the node hosting it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Domain {
    pub id: DomainId,
    pub members: Vec<NodeId>,
    pub manager_host: NodeId,
}

impl Domain {
    /// Nodes managed besides the host itself.
    pub fn managed_count(&self) -> usize {
        self.members.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManagerRecord {
    pub domain: Domain,
    pub parent: Option<DomainId>,
    pub children: Vec<DomainId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DegletKind {
    Provisioning,
    EventReporting,
}

/// One hop of inter-manager traffic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Deglet {
    pub kind: DegletKind,
    pub from: DomainId,
    pub to: DomainId,
    pub size: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ManagerTree {
    m_max: usize,
    managers: BTreeMap<DomainId, ManagerRecord>,
    #[serde(skip)]
    owner: BTreeMap<NodeId, DomainId>,
}

impl ManagerTree {
    /// Builds the first-generation tree after discovery.
    ///
    /// Non-central nodes are chunked in ascending id order; every full chunk
    /// of `m_max` becomes a child domain `1.k` hosted by its lowest id. The
    /// central node keeps the leftover nodes in the root domain.
    pub fn initial_partition(
        nodes: &[NodeId],
        m_max: usize,
        central: NodeId,
    ) -> Result<Self, HierarchyError> {
        if nodes.is_empty() {
            return Err(HierarchyError::EmptyNetwork);
        }
        if m_max == 0 {
            return Err(HierarchyError::InvalidMaxDomainSize);
        }
        if !nodes.contains(&central) {
            return Err(HierarchyError::CentralNotInNodes(central));
        }
        let mut sorted = nodes.to_vec();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(HierarchyError::DuplicateNode(w[0]));
        }
        sorted.retain(|n| *n != central);

        let mut tree = ManagerTree {
            m_max,
            managers: BTreeMap::new(),
            owner: BTreeMap::new(),
        };
        let root = DomainId::root();
        let full = sorted.len() / m_max * m_max;
        let mut root_members = vec![central];
        root_members.extend_from_slice(&sorted[full..]);
        tree.insert(root.clone(), None, root_members, central);

        for chunk in sorted[..full].chunks(m_max) {
            let id = root.child(tree.managers[&root].children.len() as u32 + 1);
            tree.insert(id.clone(), Some(root.clone()), chunk.to_vec(), chunk[0]);
            tree.record_mut(&root).children.push(id);
        }
        Ok(tree)
    }

    fn insert(&mut self, id: DomainId, parent: Option<DomainId>, members: Vec<NodeId>, host: NodeId) {
        for n in &members {
            self.owner.insert(*n, id.clone());
        }
        self.managers.insert(
            id.clone(),
            ManagerRecord {
                domain: Domain {
                    id,
                    members,
                    manager_host: host,
                },
                parent,
                children: Vec::new(),
            },
        );
    }

    fn record_mut(&mut self, id: &DomainId) -> &mut ManagerRecord {
        self.managers.get_mut(id).expect("domain present")
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn record(&self, id: &DomainId) -> Result<&ManagerRecord, HierarchyError> {
        self.managers
            .get(id)
            .ok_or_else(|| HierarchyError::UnknownDomain(id.clone()))
    }

    pub fn domain(&self, id: &DomainId) -> Result<&Domain, HierarchyError> {
        self.record(id).map(|r| &r.domain)
    }

    /// All manager records ordered by domain id (depth-first, spawn order).
    pub fn records(&self) -> impl Iterator<Item = &ManagerRecord> {
        self.managers.values()
    }

    pub fn domain_ids(&self) -> impl Iterator<Item = &DomainId> {
        self.managers.keys()
    }

    pub fn manager_count(&self) -> usize {
        self.managers.len()
    }

    pub fn node_count(&self) -> usize {
        self.owner.len()
    }

    /// Every (mother, child) manager pair.
    pub fn edges(&self) -> impl Iterator<Item = (&Domain, &Domain)> {
        self.managers.values().flat_map(move |rec| {
            rec.children
                .iter()
                .map(move |c| (&rec.domain, &self.managers[c].domain))
        })
    }

    pub fn add_node_to_domain(&mut self, node: NodeId, domain: &DomainId) -> Result<(), HierarchyError> {
        self.add_nodes_to_domain(&[node], domain)
    }

    /// Appends a batch of simultaneously discovered nodes, then rebalances
    /// the domain once.
    pub fn add_nodes_to_domain(&mut self, nodes: &[NodeId], domain: &DomainId) -> Result<(), HierarchyError> {
        self.record(domain)?;
        for (i, n) in nodes.iter().enumerate() {
            if self.owner.contains_key(n) || nodes[..i].contains(n) {
                return Err(HierarchyError::DuplicateNode(*n));
            }
        }
        for n in nodes {
            self.owner.insert(*n, domain.clone());
        }
        self.record_mut(domain).domain.members.extend_from_slice(nodes);
        self.handle_growth(domain)
    }

    /// Splits `domain` (and any spawned descendants) until every size is
    /// within `m_max`.
    pub fn handle_growth(&mut self, domain: &DomainId) -> Result<(), HierarchyError> {
        self.record(domain)?;
        let mut current = domain.clone();
        loop {
            let m_max = self.m_max;
            let rec = self.record_mut(&current);
            if rec.domain.members.len() <= m_max {
                return Ok(());
            }
            let host = rec.domain.manager_host;
            let members = &mut rec.domain.members;
            if let Some(pos) = members.iter().position(|n| *n == host) {
                if pos >= m_max {
                    members.swap(pos, m_max - 1);
                }
            }
            let moved = members.split_off(m_max);
            let child = current.child(rec.children.len() as u32 + 1);
            rec.children.push(child.clone());
            let child_host = *moved.iter().min().expect("non-empty remainder");
            self.insert(child.clone(), Some(current), moved, child_host);
            current = child;
        }
    }

    pub fn domain_of(&self, node: NodeId) -> Result<&DomainId, HierarchyError> {
        self.owner.get(&node).ok_or(HierarchyError::UnassignedNode(node))
    }

    /// Upward reporting chain from `leaf` to the root, one deglet per hop.
    pub fn report_path(&self, leaf: &DomainId, size: Decimal) -> Result<Vec<Deglet>, HierarchyError> {
        let mut out = Vec::new();
        let mut at = self.record(leaf)?;
        while let Some(parent) = &at.parent {
            out.push(Deglet {
                kind: DegletKind::EventReporting,
                from: at.domain.id.clone(),
                to: parent.clone(),
                size,
            });
            at = &self.managers[parent];
        }
        Ok(out)
    }

    /// Downward provisioning chain from the root to `target`.
    pub fn provision_path(&self, target: &DomainId, size: Decimal) -> Result<Vec<Deglet>, HierarchyError> {
        let mut path = self.report_path(target, size)?;
        path.reverse();
        for d in &mut path {
            d.kind = DegletKind::Provisioning;
            std::mem::swap(&mut d.from, &mut d.to);
        }
        Ok(path)
    }
}
