//! Management-traffic cost in bytes for the three management models:
//! centralized SNMP polling, a single flat-bed mobile agent, and the
//! hierarchical manager tree.
//!
//! Every cost is bytes moved times the coefficient of the path they move
//! over. Arithmetic is exact decimal; nothing is rounded here.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hierarchy::{DomainId, ManagerTree};
use crate::topology::{Network, NodeId, TopologyError};

pub type Bytes = Decimal;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CostError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error("flat-bed itinerary needs the manager plus at least one node, got {0} entries")]
    ItineraryTooShort(usize),
}

/// Message and agent sizes, in bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostParams {
    /// SNMP request size for one MIB variable.
    pub s_req: Bytes,
    /// SNMP response size for one MIB variable.
    pub s_res: Bytes,
    /// MIB variables fetched per node per centralized poll.
    pub num_vars: u32,
    /// Flat-bed agent code size.
    pub s_ma: Bytes,
    /// Data a flat-bed agent accretes at each visited node.
    pub d: Bytes,
    /// Sub-network manager agent, shipped once per spawned manager.
    pub ma_size: Bytes,
    /// Mobile data agent a manager circulates inside its own domain.
    pub mda_size: Bytes,
    /// Health report a child sends its mother manager each poll.
    pub ma_res: Bytes,
}

impl CostParams {
    /// Named fields that must be non-negative.
    pub fn byte_fields(&self) -> [(&'static str, Bytes); 7] {
        [
            ("s_req", self.s_req),
            ("s_res", self.s_res),
            ("s_ma", self.s_ma),
            ("d", self.d),
            ("ma_size", self.ma_size),
            ("mda_size", self.mda_size),
            ("ma_res", self.ma_res),
        ]
    }
}

/// Per-domain intra-domain coefficient `K_Q`.
///
/// Lookup order: exact domain id, then the longest `X.*` pattern whose `X`
/// is a proper ancestor, then `*`, then 1.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DomainCoefficients {
    exact: BTreeMap<DomainId, Decimal>,
    subtree: BTreeMap<DomainId, Decimal>,
    fallback: Option<Decimal>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid domain pattern `{0}`")]
pub struct BadDomainPattern(pub String);

impl DomainCoefficients {
    pub fn new() -> Self {
        Self::default()
    }

    /// Accepts `1.3`, `1.3.*` or `*`.
    pub fn insert(&mut self, pattern: &str, coeff: Decimal) -> Result<(), BadDomainPattern> {
        let bad = || BadDomainPattern(pattern.to_string());
        let pattern = pattern.trim();
        if pattern == "*" {
            self.fallback = Some(coeff);
        } else if let Some(prefix) = pattern.strip_suffix(".*") {
            self.subtree.insert(DomainId::from_str(prefix).map_err(|_| bad())?, coeff);
        } else {
            self.exact.insert(DomainId::from_str(pattern).map_err(|_| bad())?, coeff);
        }
        Ok(())
    }

    pub fn get(&self, id: &DomainId) -> Decimal {
        if let Some(k) = self.exact.get(id) {
            return *k;
        }
        let mut ancestor = id.parent();
        while let Some(a) = ancestor {
            if let Some(k) = self.subtree.get(&a) {
                return *k;
            }
            ancestor = a.parent();
        }
        self.fallback.unwrap_or(Decimal::ONE)
    }
}

/// Deployment and per-poll cost of one model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostBreakdown {
    pub deploy: Bytes,
    pub per_poll: Bytes,
    pub polls: u64,
    pub include_deploy: bool,
}

impl CostBreakdown {
    pub fn total(&self) -> Bytes {
        self.at(self.polls)
    }

    /// Total for a different polling count, deployment counted at most once.
    pub fn at(&self, polls: u64) -> Bytes {
        let polled = self.per_poll * Decimal::from(polls);
        if self.include_deploy {
            self.deploy + polled
        } else {
            polled
        }
    }
}

/// Cost of one centralized polling round from `mgr` to every target.
pub fn cost_centralized(
    net: &Network,
    mgr: NodeId,
    targets: &[NodeId],
    params: &CostParams,
) -> Result<Bytes, CostError> {
    let exchange = (params.s_req + params.s_res) * Decimal::from(params.num_vars);
    let mut coeff_sum = Decimal::ZERO;
    for &t in targets {
        coeff_sum += net.path_cost(mgr, t)?;
    }
    Ok(coeff_sum * exchange)
}

pub fn cost_centralized_polled(
    net: &Network,
    mgr: NodeId,
    targets: &[NodeId],
    params: &CostParams,
    polls: u64,
) -> Result<Bytes, CostError> {
    Ok(cost_centralized(net, mgr, targets, params)? * Decimal::from(polls))
}

/// Cost of one flat-bed round trip: the agent starts at `itinerary[0]`,
/// grows by `d` bytes at each visited node and returns home.
pub fn cost_flatbed(net: &Network, itinerary: &[NodeId], params: &CostParams) -> Result<Bytes, CostError> {
    let (&home, rest) = itinerary
        .split_first()
        .filter(|(_, rest)| !rest.is_empty())
        .ok_or(CostError::ItineraryTooShort(itinerary.len()))?;
    let last = *rest.last().expect("non-empty");
    let visits = Decimal::from(rest.len());

    let mut total = Decimal::ZERO;
    for (i, hop) in itinerary.windows(2).enumerate() {
        total += net.path_cost(hop[0], hop[1])? * (params.s_ma + Decimal::from(i) * params.d);
    }
    total += net.path_cost(last, home)? * (params.s_ma + visits * params.d);
    Ok(total)
}

pub fn cost_flatbed_polled(
    net: &Network,
    itinerary: &[NodeId],
    params: &CostParams,
    polls: u64,
) -> Result<Bytes, CostError> {
    Ok(cost_flatbed(net, itinerary, params)? * Decimal::from(polls))
}

/// Flat-bed cost of one domain's data agent: `mda_size * (r_q + 1) * k_q`.
pub fn cost_domain_flatbed(r_q: usize, k_q: Decimal, params: &CostParams) -> Bytes {
    params.mda_size * Decimal::from(r_q + 1) * k_q
}

/// One-time cost of shipping a manager agent down every mother-child edge.
pub fn cost_imasnm_deploy(net: &Network, tree: &ManagerTree, params: &CostParams) -> Result<Bytes, CostError> {
    let mut total = Decimal::ZERO;
    for (mother, child) in tree.edges() {
        total += net.inter_domain_cost(mother.manager_host, child.manager_host)? * params.ma_size;
    }
    Ok(total)
}

/// Per-poll cost: every child reports to its mother, and every domain runs
/// its own flat-bed data agent.
pub fn cost_imasnm_poll(
    net: &Network,
    tree: &ManagerTree,
    params: &CostParams,
    domain_k: &DomainCoefficients,
) -> Result<Bytes, CostError> {
    let mut reports = Decimal::ZERO;
    for (mother, child) in tree.edges() {
        reports += net.inter_domain_cost(mother.manager_host, child.manager_host)? * params.ma_res;
    }
    let domains: Bytes = tree
        .records()
        .map(|r| cost_domain_flatbed(r.domain.managed_count(), domain_k.get(&r.domain.id), params))
        .sum();
    Ok(reports + domains)
}

pub fn cost_imasnm_total(
    net: &Network,
    tree: &ManagerTree,
    params: &CostParams,
    domain_k: &DomainCoefficients,
    polls: u64,
    include_deploy: bool,
) -> Result<CostBreakdown, CostError> {
    Ok(CostBreakdown {
        deploy: cost_imasnm_deploy(net, tree, params)?,
        per_poll: cost_imasnm_poll(net, tree, params, domain_k)?,
        polls,
        include_deploy,
    })
}

/// Management model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Cs,
    Flatbed,
    Imasnm,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Cs, Model::Flatbed, Model::Imasnm];

    pub fn as_str(self) -> &'static str {
        match self {
            Model::Cs => "cs",
            Model::Flatbed => "flatbed",
            Model::Imasnm => "imasnm",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown model `{0}` (expected cs, flatbed or imasnm)")]
pub struct UnknownModel(pub String);

impl FromStr for Model {
    type Err = UnknownModel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "cs" => Ok(Model::Cs),
            "flatbed" => Ok(Model::Flatbed),
            "imasnm" => Ok(Model::Imasnm),
            other => Err(UnknownModel(other.to_string())),
        }
    }
}
