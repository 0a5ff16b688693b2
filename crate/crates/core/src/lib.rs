//! Simulator and cost model for hierarchical mobile-agent network
//! management.
//!
//! A network is partitioned into domains of at most `m_max` nodes, each
//! run by a mobile sub-network manager. Managers clone themselves into
//! child domains as their domain grows. The crate replays such growth
//! deterministically and compares the management traffic it costs against
//! centralized SNMP polling and a single flat-bed mobile agent.
//!
//! - [`topology`]: the weighted network and its path cost coefficients.
//! - [`hierarchy`]: the manager tree, splitting and domain naming.
//! - [`cost_model`]: byte-cost formulas for each management model.
//! - [`simulation`]: scenario files and the event replay engine.
//! - [`report`]: comparison tables and CSV output.

pub mod cost_model;
pub mod hierarchy;
pub mod report;
pub mod simulation;
pub mod topology;

pub use cost_model::{Bytes, CostBreakdown, CostParams, DomainCoefficients, Model};
pub use hierarchy::{Deglet, DegletKind, Domain, DomainId, ManagerTree};
pub use report::{compare, compare_with, emit_csv, CostReport};
pub use rust_decimal::Decimal;
pub use simulation::{load_scenario, run, Event, Scenario, SimulationResult};
pub use topology::{Link, Network, NodeId};
