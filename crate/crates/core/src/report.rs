//! Cost comparison tables and CSV output.
//!
//! Byte totals are rendered in kilobytes as `bytes / 1000`, rounded half
//! away from zero to two decimals.

use std::fmt::Write as _;
use std::io::Write;

use rust_decimal::{Decimal, RoundingStrategy};
use serde::Serialize;
use thiserror::Error;

use crate::cost_model::{Bytes, Model};
use crate::hierarchy::ManagerTree;
use crate::simulation::SimulationResult;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("simulation result contains no models")]
    EmptyResult,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub fn kilobytes(bytes: Bytes) -> Decimal {
    (bytes / Decimal::ONE_THOUSAND).round_dp_with_strategy(2, RoundingStrategy::MidpointAwayFromZero)
}

pub fn render_kb(bytes: Bytes) -> String {
    format!("{:.2}", kilobytes(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportCell {
    pub model: Model,
    pub bytes: Bytes,
    pub kb: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportRow {
    pub polls: u64,
    pub cells: Vec<ReportCell>,
}

impl ReportRow {
    pub fn cell(&self, model: Model) -> Option<&ReportCell> {
        self.cells.iter().find(|c| c.model == model)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub scenario: String,
    /// Column order: cs, flatbed, imasnm (whichever were run).
    pub models: Vec<Model>,
    /// One-time deployment bytes per model.
    pub deploy: Vec<(Model, Bytes)>,
    pub include_deploy: bool,
    pub rows: Vec<ReportRow>,
}

/// Comparison with deployment left out of every row.
pub fn compare(result: &SimulationResult) -> Result<CostReport, ReportError> {
    compare_with(result, false)
}

/// Comparison table; with `include_deploy` each row also carries the
/// model's one-time deployment bytes.
pub fn compare_with(result: &SimulationResult, include_deploy: bool) -> Result<CostReport, ReportError> {
    if result.costs.is_empty() {
        return Err(ReportError::EmptyResult);
    }
    let mut costs: Vec<_> = result.costs.iter().collect();
    costs.sort_by_key(|c| c.model);

    let mut polls: Vec<u64> = result.polling_counts.clone();
    polls.sort_unstable();
    polls.dedup();

    let rows = polls
        .into_iter()
        .map(|p| ReportRow {
            polls: p,
            cells: costs
                .iter()
                .map(|c| {
                    let mut bytes = c.per_poll * Decimal::from(p);
                    if include_deploy {
                        bytes += c.deploy;
                    }
                    ReportCell {
                        model: c.model,
                        bytes,
                        kb: kilobytes(bytes),
                    }
                })
                .collect(),
        })
        .collect();

    Ok(CostReport {
        scenario: result.scenario.clone(),
        models: costs.iter().map(|c| c.model).collect(),
        deploy: costs.iter().map(|c| (c.model, c.deploy)).collect(),
        include_deploy,
        rows,
    })
}

/// Writes `polling,cost_<model>_kb,...` with one line per polling count.
pub fn emit_csv<W: Write>(report: &CostReport, sink: W) -> Result<(), ReportError> {
    if report.models.is_empty() {
        return Err(ReportError::EmptyResult);
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(sink);
    let mut header = vec!["polling".to_string()];
    header.extend(report.models.iter().map(|m| format!("cost_{m}_kb")));
    w.write_record(&header)?;
    for row in &report.rows {
        let mut record = vec![row.polls.to_string()];
        record.extend(row.cells.iter().map(|c| format!("{:.2}", c.kb)));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Fixed-width comparison table for terminals.
pub fn render_table(report: &CostReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", report.scenario);
    let mut header = format!("{:>8}", "polling");
    for m in &report.models {
        let _ = write!(header, "  {:>16}", format!("{} (Kb)", m));
    }
    let _ = writeln!(out, "{header}");
    for row in &report.rows {
        let _ = write!(out, "{:>8}", row.polls);
        for c in &row.cells {
            let _ = write!(out, "  {:>16}", format!("{:.2}", c.kb));
        }
        out.push('\n');
    }
    for (m, bytes) in &report.deploy {
        if !bytes.is_zero() {
            let state = if report.include_deploy { "included" } else { "excluded" };
            let _ = writeln!(out, "{m} deployment: {} bytes ({state})", bytes.normalize());
        }
    }
    out
}

/// Indented listing of a manager tree, one manager per line.
pub fn render_tree(tree: &ManagerTree) -> String {
    let mut out = String::new();
    for rec in tree.records() {
        let d = &rec.domain;
        let members: Vec<String> = d.members.iter().map(|n| n.to_string()).collect();
        let _ = writeln!(
            out,
            "{}MA{} D{} host={} members=[{}]",
            "  ".repeat(d.id.depth()),
            d.id,
            d.id,
            d.manager_host,
            members.join(", ")
        );
    }
    out
}
