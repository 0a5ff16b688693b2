//! Oracles and generators shared by the property and acceptance suites.
//!
//! Nothing here calls into the shortest-path or cost code under test; the
//! oracles recompute their answers from first principles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use imasnm::simulation::{Arrival, Event, SimState};
use imasnm::{CostParams, Decimal, DomainCoefficients, DomainId, ManagerTree, Network, NodeId, Scenario};
use proptest::prelude::*;

pub fn n(id: u32) -> NodeId {
    NodeId::new(id).unwrap()
}

/// Random undirected graph on nodes `1..=nodes`.
#[derive(Debug, Clone)]
pub struct Graph {
    pub nodes: u32,
    pub edges: Vec<(u32, u32, Decimal)>,
}

impl Graph {
    pub fn network(&self) -> Network {
        let mut net = Network::new();
        for i in 1..=self.nodes {
            net.add_node(n(i)).unwrap();
        }
        for &(a, b, c) in &self.edges {
            net.add_link(n(a), n(b), c).unwrap();
        }
        net
    }

    fn adjacency(&self) -> BTreeMap<u32, Vec<(u32, Decimal)>> {
        let mut adj: BTreeMap<u32, Vec<(u32, Decimal)>> = BTreeMap::new();
        for &(a, b, c) in &self.edges {
            adj.entry(a).or_default().push((b, c));
            adj.entry(b).or_default().push((a, c));
        }
        adj
    }

    /// Minimum over every simple path from `from` to `to` of the summed
    /// coefficients, found by enumerating all of them.
    pub fn exhaustive_path_cost(&self, from: u32, to: u32) -> Option<Decimal> {
        fn walk(
            adj: &BTreeMap<u32, Vec<(u32, Decimal)>>,
            at: u32,
            to: u32,
            cost: Decimal,
            visited: &mut BTreeSet<u32>,
            best: &mut Option<Decimal>,
        ) {
            if at == to {
                if best.is_none_or(|b| cost < b) {
                    *best = Some(cost);
                }
                return;
            }
            for &(next, c) in adj.get(&at).map(Vec::as_slice).unwrap_or(&[]) {
                if visited.insert(next) {
                    walk(adj, next, to, cost + c, visited, best);
                    visited.remove(&next);
                }
            }
        }
        let adj = self.adjacency();
        let mut best = None;
        let mut visited = BTreeSet::from([from]);
        walk(&adj, from, to, Decimal::ZERO, &mut visited, &mut best);
        best
    }
}

/// Coefficients in 0.0..=10.0 with one decimal place.
pub fn coeff() -> impl Strategy<Value = Decimal> {
    (0i64..=100).prop_map(|v| Decimal::new(v, 1))
}

/// Graphs of 1..=max nodes where each pair is linked with probability 0.4.
pub fn sparse_graph(max: u32) -> impl Strategy<Value = Graph> {
    (1..=max).prop_flat_map(|nodes| {
        let pairs: Vec<(u32, u32)> = (1..=nodes)
            .flat_map(|a| (a + 1..=nodes).map(move |b| (a, b)))
            .collect();
        let count = pairs.len();
        (
            Just(nodes),
            Just(pairs),
            prop::collection::vec(prop::bool::weighted(0.4), count),
            prop::collection::vec(coeff(), count),
        )
            .prop_map(|(nodes, pairs, keep, coeffs)| Graph {
                nodes,
                edges: pairs
                    .into_iter()
                    .zip(keep)
                    .zip(coeffs)
                    .filter(|((_, k), _)| *k)
                    .map(|(((a, b), _), c)| (a, b, c))
                    .collect(),
            })
    })
}

/// Connected graph: a random spanning tree plus random extra links.
pub fn connected_graph(min: u32, max: u32) -> impl Strategy<Value = Graph> {
    (min..=max).prop_flat_map(|nodes| {
        let extra_pairs: Vec<(u32, u32)> = (1..=nodes)
            .flat_map(|a| (a + 1..=nodes).map(move |b| (a, b)))
            .collect();
        let count = extra_pairs.len();
        (
            Just(nodes),
            prop::collection::vec(any::<prop::sample::Index>(), nodes.saturating_sub(1) as usize),
            prop::collection::vec(coeff(), nodes.saturating_sub(1) as usize),
            Just(extra_pairs),
            prop::collection::vec(prop::bool::weighted(0.2), count),
            prop::collection::vec(coeff(), count),
        )
            .prop_map(|(nodes, parents, tree_coeffs, pairs, keep, coeffs)| {
                let mut edges = Vec::new();
                let mut linked = BTreeSet::new();
                for (k, (p, c)) in parents.iter().zip(tree_coeffs).enumerate() {
                    let child = k as u32 + 2;
                    let parent = p.index(child as usize - 1) as u32 + 1;
                    linked.insert((parent.min(child), parent.max(child)));
                    edges.push((parent, child, c));
                }
                for (((a, b), k), c) in pairs.into_iter().zip(keep).zip(coeffs) {
                    if k && linked.insert((a, b)) {
                        edges.push((a, b, c));
                    }
                }
                Graph { nodes, edges }
            })
    })
}

/// Byte sizes with up to two decimals, below 10 000.
pub fn bytes() -> impl Strategy<Value = Decimal> {
    (0i64..1_000_000).prop_map(|v| Decimal::new(v, 2))
}

pub fn params() -> impl Strategy<Value = CostParams> {
    (bytes(), bytes(), 1u32..=10, bytes(), bytes(), bytes(), bytes(), bytes()).prop_map(
        |(s_req, s_res, num_vars, s_ma, d, ma_size, mda_size, ma_res)| CostParams {
            s_req,
            s_res,
            num_vars,
            s_ma,
            d,
            ma_size,
            mda_size,
            ma_res,
        },
    )
}

/// Walks the itinerary hop by hop, carrying the agent plus everything it
/// has collected so far, and charges each hop at `k(from, to)`.
pub fn brute_force_flatbed(
    k: impl Fn(u32, u32) -> Decimal,
    itinerary: &[u32],
    s_ma: Decimal,
    d: Decimal,
) -> Decimal {
    let mut carried = s_ma;
    let mut total = Decimal::ZERO;
    let mut route: Vec<u32> = itinerary.to_vec();
    route.push(itinerary[0]);
    for hop in route.windows(2) {
        total += k(hop[0], hop[1]) * carried;
        carried += d;
    }
    total
}

/// A discovery batch, with its target domain picked among the domains
/// alive when the batch is applied.
#[derive(Debug, Clone)]
pub struct Batch {
    pub size: usize,
    pub domain_pick: prop::sample::Index,
}

#[derive(Debug, Clone)]
pub struct GrowthPlan {
    pub initial: usize,
    pub central_pick: prop::sample::Index,
    pub m_max: usize,
    pub batches: Vec<Batch>,
}

impl GrowthPlan {
    pub fn total_nodes(&self) -> usize {
        self.initial + self.batches.iter().map(|b| b.size).sum::<usize>()
    }
}

/// Growth plans with at most 60 nodes in total and `m_max` in 1..=6.
pub fn growth_plan() -> impl Strategy<Value = GrowthPlan> {
    (
        1usize..=20,
        any::<prop::sample::Index>(),
        1usize..=6,
        prop::collection::vec((1usize..=8, any::<prop::sample::Index>()), 0..=15),
    )
        .prop_map(|(initial, central_pick, m_max, raw)| {
            let mut budget = 60 - initial;
            let mut batches = Vec::new();
            for (size, domain_pick) in raw {
                let size = size.min(budget);
                if size == 0 {
                    break;
                }
                budget -= size;
                batches.push(Batch { size, domain_pick });
            }
            GrowthPlan {
                initial,
                central_pick,
                m_max,
                batches,
            }
        })
}

fn bare_scenario(plan: &GrowthPlan) -> Scenario {
    let nodes: Vec<NodeId> = (1..=plan.initial as u32).map(n).collect();
    Scenario {
        name: "generated".into(),
        description: None,
        central: nodes[plan.central_pick.index(nodes.len())],
        nodes,
        links: vec![],
        k_override: vec![],
        m_max: plan.m_max,
        params: CostParams {
            s_req: Decimal::ONE,
            s_res: Decimal::ONE,
            num_vars: 1,
            s_ma: Decimal::ONE,
            d: Decimal::ONE,
            ma_size: Decimal::ONE,
            mda_size: Decimal::ONE,
            ma_res: Decimal::ONE,
        },
        domain_k: DomainCoefficients::new(),
        events: vec![],
        polling_counts: vec![1],
        models: vec![],
        flatbed_itinerary: None,
        snapshot_costs: false,
    }
}

/// Replays a plan step by step, checking every hierarchy invariant after
/// each event. Returns the scenario with resolved events and the final tree.
pub fn replay_checked(plan: &GrowthPlan) -> Result<(Scenario, ManagerTree), String> {
    let mut scenario = bare_scenario(plan);
    let mut state = SimState::initial(&scenario).map_err(|e| e.to_string())?;
    let mut added: BTreeSet<NodeId> = scenario.nodes.iter().copied().collect();
    check_tree(&state.tree, &added, plan.m_max)?;

    let mut next = plan.initial as u32 + 1;
    for (i, batch) in plan.batches.iter().enumerate() {
        let ids: Vec<DomainId> = state.tree.domain_ids().cloned().collect();
        let domain = ids[batch.domain_pick.index(ids.len())].clone();
        let arrivals: Vec<Arrival> = (0..batch.size)
            .map(|k| Arrival {
                node: n(next + k as u32),
                links: vec![],
            })
            .collect();
        next += batch.size as u32;

        let before = state.tree.manager_count();
        let event = if arrivals.len() == 1 {
            Event::AddNode {
                node: arrivals[0].node,
                domain: domain.clone(),
                links: vec![],
            }
        } else {
            Event::AddNodes {
                domain: domain.clone(),
                arrivals: arrivals.clone(),
            }
        };
        let grown = state.tree.domain(&domain).unwrap().members.len() + batch.size;
        state.apply_event(&event).map_err(|e| e.to_string())?;
        added.extend(arrivals.iter().map(|a| a.node));
        check_tree(&state.tree, &added, plan.m_max).map_err(|e| format!("after batch {i}: {e}"))?;

        let spawned = state.tree.manager_count() - before;
        let expected = grown.div_ceil(plan.m_max) - 1;
        if spawned != expected {
            return Err(format!(
                "batch {i}: domain of {grown} with m_max {} spawned {spawned}, expected {expected}",
                plan.m_max
            ));
        }
        scenario.events.push(event);
    }
    Ok((scenario, state.tree))
}

/// Node conservation, size bound, host membership, id structure and
/// parent/child consistency.
pub fn check_tree(tree: &ManagerTree, expected: &BTreeSet<NodeId>, m_max: usize) -> Result<(), String> {
    let mut seen = BTreeSet::new();
    let mut roots = 0;
    for rec in tree.records() {
        let d = &rec.domain;
        if d.members.is_empty() {
            return Err(format!("D{} is empty", d.id));
        }
        if d.members.len() > m_max {
            return Err(format!("D{} has {} members > {m_max}", d.id, d.members.len()));
        }
        if !d.members.contains(&d.manager_host) {
            return Err(format!("D{} host {} outside its domain", d.id, d.manager_host));
        }
        for m in &d.members {
            if !seen.insert(*m) {
                return Err(format!("node {m} appears twice"));
            }
            if tree.domain_of(*m).ok() != Some(&d.id) {
                return Err(format!("domain_of({m}) disagrees with D{}", d.id));
            }
        }
        match &rec.parent {
            None => {
                roots += 1;
                if d.id.path() != [1] {
                    return Err(format!("root named D{}", d.id));
                }
            }
            Some(p) => {
                let parent = tree.record(p).map_err(|e| e.to_string())?;
                let idx = parent
                    .children
                    .iter()
                    .position(|c| c == &d.id)
                    .ok_or_else(|| format!("D{} missing from parent's children", d.id))?;
                if d.id != p.child(idx as u32 + 1) {
                    return Err(format!("D{} is child #{} of D{p}", d.id, idx + 1));
                }
            }
        }
        for (k, c) in rec.children.iter().enumerate() {
            if c != &d.id.child(k as u32 + 1) {
                return Err(format!("child {k} of D{} is D{c}", d.id));
            }
            let child = tree.record(c).map_err(|e| e.to_string())?;
            if child.parent.as_ref() != Some(&d.id) {
                return Err(format!("D{c} does not point back to D{}", d.id));
            }
        }
    }
    if roots != 1 {
        return Err(format!("{roots} roots"));
    }
    if &seen != expected {
        return Err(format!("members {seen:?} != added {expected:?}"));
    }
    Ok(())
}
