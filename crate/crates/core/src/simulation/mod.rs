//! Deterministic scenario engine.
//!
//! A run builds the initial network, partitions it, replays discovery
//! events in order (each one may split domains and spawn managers) and
//! prices the requested management models on the final state.

mod scenario;

pub use scenario::{load_scenario, load_scenario_str, Arrival, Event, Scenario, ScenarioError};

use rust_decimal::Decimal;
use serde::Serialize;
use thiserror::Error;

use crate::cost_model::{self, Bytes, CostError, Model};
use crate::hierarchy::{DomainId, HierarchyError, ManagerTree};
use crate::topology::{Network, NodeId, TopologyError};

/// Scenario files shipped with the crate.
pub mod bundled {
    /// The ten-node growth walk-through: initial split, then three rounds
    /// of discovery.
    pub const SECTION3: &str = include_str!("../../scenarios/section3.scenario.json");
    /// The 18-node reference network used for the cost comparison.
    pub const FIGURE9: &str = include_str!("../../scenarios/figure9.scenario.json");
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimulationError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Hierarchy(#[from] HierarchyError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// One row of a domain table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DomainRow {
    pub id: DomainId,
    pub parent: Option<DomainId>,
    pub host: NodeId,
    pub members: Vec<NodeId>,
}

pub fn domain_table(tree: &ManagerTree) -> Vec<DomainRow> {
    tree.records()
        .map(|r| DomainRow {
            id: r.domain.id.clone(),
            parent: r.parent.clone(),
            host: r.domain.manager_host,
            members: r.domain.members.clone(),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PolledCost {
    pub polls: u64,
    /// Bytes for `polls` rounds, deployment excluded.
    pub bytes: Bytes,
}

/// Costs of one model on one network state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModelCosts {
    pub model: Model,
    pub deploy: Bytes,
    pub per_poll: Bytes,
    pub polled: Vec<PolledCost>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub label: String,
    pub tree: ManagerTree,
    pub domains: Vec<DomainRow>,
    /// Present only when the scenario asks for per-snapshot costs.
    pub costs: Option<Vec<ModelCosts>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimulationResult {
    pub scenario: String,
    pub models: Vec<Model>,
    pub polling_counts: Vec<u64>,
    pub snapshots: Vec<Snapshot>,
    pub final_tree: ManagerTree,
    pub costs: Vec<ModelCosts>,
}

impl SimulationResult {
    pub fn model(&self, model: Model) -> Option<&ModelCosts> {
        self.costs.iter().find(|c| c.model == model)
    }
}

/// Live network and manager tree while a scenario is replayed.
#[derive(Debug, Clone)]
pub struct SimState {
    pub network: Network,
    pub tree: ManagerTree,
    pub snapshots: Vec<Snapshot>,
}

impl SimState {
    /// Builds the initial network and runs the first partition.
    pub fn initial(scenario: &Scenario) -> Result<Self, SimulationError> {
        let mut network = Network::new();
        for &n in &scenario.nodes {
            network.add_node(n)?;
        }
        for link in &scenario.links {
            network.add_link(link.a, link.b, link.coeff)?;
        }
        for &(a, b, cost) in &scenario.k_override {
            network.set_override(a, b, cost)?;
        }
        let tree = ManagerTree::initial_partition(&scenario.nodes, scenario.m_max, scenario.central)?;
        Ok(SimState {
            network,
            tree,
            snapshots: Vec::new(),
        })
    }

    pub fn apply_event(&mut self, event: &Event) -> Result<(), SimulationError> {
        match event {
            Event::Snapshot { label } => {
                self.snapshots.push(Snapshot {
                    label: label.clone(),
                    tree: self.tree.clone(),
                    domains: domain_table(&self.tree),
                    costs: None,
                });
                Ok(())
            }
            Event::AddNode { domain, .. } | Event::AddNodes { domain, .. } => {
                self.tree.record(domain)?;
                let arrivals = event.arrivals();
                for a in &arrivals {
                    self.network.add_node(a.node)?;
                }
                for a in &arrivals {
                    for &(peer, coeff) in &a.links {
                        self.network.add_link(a.node, peer, coeff)?;
                    }
                }
                let nodes: Vec<NodeId> = arrivals.iter().map(|a| a.node).collect();
                self.tree.add_nodes_to_domain(&nodes, domain)?;
                Ok(())
            }
        }
    }

    /// Prices `models` on the current state.
    pub fn evaluate(&self, scenario: &Scenario, models: &[Model], polling_counts: &[u64]) -> Result<Vec<ModelCosts>, SimulationError> {
        let params = &scenario.params;
        let mut out = Vec::with_capacity(models.len());
        for &model in models {
            let (deploy, per_poll) = match model {
                Model::Cs => {
                    let targets: Vec<NodeId> = self.network.nodes().into_iter().collect();
                    (
                        Decimal::ZERO,
                        cost_model::cost_centralized(&self.network, scenario.central, &targets, params)?,
                    )
                }
                Model::Flatbed => {
                    let route: Vec<NodeId> = scenario
                        .itinerary()
                        .into_iter()
                        .filter(|n| self.network.contains(*n))
                        .collect();
                    let cost = if route.len() < 2 {
                        Decimal::ZERO
                    } else {
                        cost_model::cost_flatbed(&self.network, &route, params)?
                    };
                    (Decimal::ZERO, cost)
                }
                Model::Imasnm => (
                    cost_model::cost_imasnm_deploy(&self.network, &self.tree, params)?,
                    cost_model::cost_imasnm_poll(&self.network, &self.tree, params, &scenario.domain_k)?,
                ),
            };
            let polled = polling_counts
                .iter()
                .map(|&polls| PolledCost {
                    polls,
                    bytes: per_poll * Decimal::from(polls),
                })
                .collect();
            out.push(ModelCosts {
                model,
                deploy,
                per_poll,
                polled,
            });
        }
        Ok(out)
    }
}

/// Replays the events without pricing anything, so structural problems
/// (unknown domains, bad links) surface at load time with a field path.
pub(crate) fn dry_run(scenario: &Scenario) -> Result<(), ScenarioError> {
    let mut state = SimState::initial(scenario).map_err(|e| ScenarioError::validation("nodes", e))?;
    for (i, event) in scenario.events.iter().enumerate() {
        state.apply_event(event).map_err(|e| {
            let path = match (event, &e) {
                (Event::AddNode { .. }, SimulationError::Hierarchy(HierarchyError::UnknownDomain(_))) => {
                    format!("events[{i}].add_node.domain")
                }
                (Event::AddNodes { .. }, SimulationError::Hierarchy(HierarchyError::UnknownDomain(_))) => {
                    format!("events[{i}].add_nodes.domain")
                }
                _ => format!("events[{i}]"),
            };
            ScenarioError::validation(path, e)
        })?;
    }
    Ok(())
}

pub fn run(scenario: &Scenario) -> Result<SimulationResult, SimulationError> {
    let mut state = SimState::initial(scenario)?;
    for event in &scenario.events {
        state.apply_event(event)?;
        if scenario.snapshot_costs && matches!(event, Event::Snapshot { .. }) {
            let costs = state.evaluate(scenario, &scenario.models, &scenario.polling_counts)?;
            if let Some(last) = state.snapshots.last_mut() {
                last.costs = Some(costs);
            }
        }
    }
    let costs = state.evaluate(scenario, &scenario.models, &scenario.polling_counts)?;
    Ok(SimulationResult {
        scenario: scenario.name.clone(),
        models: scenario.models.clone(),
        polling_counts: scenario.polling_counts.clone(),
        snapshots: state.snapshots,
        final_tree: state.tree,
        costs,
    })
}
