//! Exact placement when the round's requests are known in advance.
//!
//! Every content takes exactly one tier and a content's delay cost on a
//! node does not depend on what else sits there, so the placement is a
//! transportation problem. It is solved as min-cost flow: source to each
//! requested content (capacity 1), plus a zero-cost filler carrying the
//! unrequested contents; content to node at the summed requester delay;
//! node to sink at its slot count, with the cloud taking the remainder.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::catalog::{ContentCatalog, ContentId};
use crate::decision::{check_feasible, decision_to_list, CachingDecision, DecisionError, SlotLayout, Tier};
use crate::delay::{round_delay, DelayError, DelayTables};
use crate::scenario::RequestMatrix;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Delay(#[from] DelayError),
    #[error("requested content {0} is not in the catalog")]
    UnknownContent(ContentId),
    #[error("brute force limited to {max_contents} contents and {max_slots} slots, got {contents} and {slots}")]
    TooLarge {
        contents: usize,
        slots: usize,
        max_contents: usize,
        max_slots: usize,
    },
    #[error("flow network could not route every content")]
    Unrouted,
}

struct Edge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowGraph {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add_edge(&mut self, u: usize, v: usize, cap: i64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to: v, cap, cost });
        self.edges.push(Edge { to: u, cap: 0, cost: -cost });
        self.adj[u].push(id);
        self.adj[v].push(id + 1);
        id
    }

    fn flow_on(&self, edge: usize) -> i64 {
        self.edges[edge ^ 1].cap
    }

    /// Successive shortest paths with queue-based Bellman-Ford. Relaxations
    /// must beat the current label by `eps` so float noise cannot cycle.
    fn min_cost_flow(&mut self, s: usize, t: usize, want: i64, eps: f64) -> i64 {
        let n = self.adj.len();
        let mut flow = 0;
        while flow < want {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            let mut queued = vec![false; n];
            let mut queue = VecDeque::new();
            dist[s] = 0.0;
            queue.push_back(s);
            queued[s] = true;
            while let Some(u) = queue.pop_front() {
                queued[u] = false;
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > 0 && dist[u] + edge.cost < dist[edge.to] - eps {
                        dist[edge.to] = dist[u] + edge.cost;
                        prev[edge.to] = e;
                        if !queued[edge.to] {
                            queued[edge.to] = true;
                            queue.push_back(edge.to);
                        }
                    }
                }
            }
            if dist[t].is_infinite() {
                break;
            }
            let mut push = want - flow;
            let mut v = t;
            while v != s {
                let e = prev[v];
                push = push.min(self.edges[e].cap);
                v = self.edges[e ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let e = prev[v];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                v = self.edges[e ^ 1].to;
            }
            flow += push;
        }
        flow
    }
}

/// Summed delay of serving every requester of `f` from `tier`.
fn placement_cost(requesters: &[usize], tier: Tier, tables: &DelayTables) -> Result<f64, DelayError> {
    requesters.iter().map(|&i| tables.tier_delay(i, tier)).sum()
}

/// Minimum-delay feasible placement for a known request matrix. Unrequested
/// contents fill leftover slots in ascending id order, nodes in fill order.
pub fn clairvoyant_place(
    requests: &RequestMatrix,
    layout: &SlotLayout,
    tables: &DelayTables,
    catalog: &ContentCatalog,
) -> Result<CachingDecision, SolverError> {
    check_feasible(layout, catalog)?;
    let by_content = requests.by_content();
    if let Some(f) = by_content.keys().find(|f| !catalog.contains(**f)) {
        return Err(SolverError::UnknownContent(*f));
    }
    let tiers: Vec<(Tier, usize)> = layout
        .nodes()
        .chain(core::iter::once((Tier::Cloud, catalog.len() - layout.total())))
        .collect();
    let requested: Vec<(ContentId, &Vec<usize>)> = by_content.iter().map(|(f, r)| (*f, r)).collect();
    let unrequested = catalog.len() - requested.len();

    let (source, sink, filler) = (0, 1, 2);
    let node_base = 3;
    let content_base = node_base + tiers.len();
    let mut g = FlowGraph::new(content_base + requested.len());
    let mut scale: f64 = 0.0;
    let mut costs = Vec::with_capacity(requested.len());
    for (_, requesters) in &requested {
        let row = tiers
            .iter()
            .map(|(tier, _)| placement_cost(requesters, *tier, tables))
            .collect::<Result<Vec<_>, _>>()?;
        scale = row.iter().fold(scale, |m, c| m.max(c.abs()));
        costs.push(row);
    }
    let filler_edges: Vec<usize> = tiers
        .iter()
        .enumerate()
        .map(|(n, _)| g.add_edge(filler, node_base + n, unrequested as i64, 0.0))
        .collect();
    g.add_edge(source, filler, unrequested as i64, 0.0);
    let mut content_edges = Vec::with_capacity(requested.len());
    for (c, row) in costs.iter().enumerate() {
        g.add_edge(source, content_base + c, 1, 0.0);
        let edges: Vec<usize> = row
            .iter()
            .enumerate()
            .map(|(n, &cost)| g.add_edge(content_base + c, node_base + n, 1, cost))
            .collect();
        content_edges.push(edges);
    }
    for (n, (_, slots)) in tiers.iter().enumerate() {
        g.add_edge(node_base + n, sink, *slots as i64, 0.0);
    }
    let want = catalog.len() as i64;
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if g.min_cost_flow(source, sink, want, eps) != want {
        return Err(SolverError::Unrouted);
    }

    let mut assigned: Vec<Vec<ContentId>> = vec![Vec::new(); tiers.len()];
    for (c, edges) in content_edges.iter().enumerate() {
        let n = edges.iter().position(|&e| g.flow_on(e) > 0).ok_or(SolverError::Unrouted)?;
        assigned[n].push(requested[c].0);
    }
    let mut spare = catalog.ids().filter(|f| !by_content.contains_key(f));
    for (n, &e) in filler_edges.iter().enumerate() {
        let k = g.flow_on(e) as usize;
        assigned[n].extend(spare.by_ref().take(k));
    }
    for node in &mut assigned {
        node.sort_unstable();
    }
    let cloud = assigned.pop().unwrap_or_default();
    let vfc = assigned.split_off(layout.platoon.len());
    Ok(CachingDecision { platoon: assigned, vfc, cloud })
}

pub const BRUTE_MAX_CONTENTS: usize = 8;
pub const BRUTE_MAX_SLOTS: usize = 6;

/// Exhaustive search over all placements, for cross-checking on tiny
/// instances. Ties go to the lexicographically smallest fill-order list.
pub fn brute_force_place(
    requests: &RequestMatrix,
    layout: &SlotLayout,
    tables: &DelayTables,
    catalog: &ContentCatalog,
) -> Result<CachingDecision, SolverError> {
    check_feasible(layout, catalog)?;
    if catalog.len() > BRUTE_MAX_CONTENTS || layout.total() > BRUTE_MAX_SLOTS {
        return Err(SolverError::TooLarge {
            contents: catalog.len(),
            slots: layout.total(),
            max_contents: BRUTE_MAX_CONTENTS,
            max_slots: BRUTE_MAX_SLOTS,
        });
    }
    if let Some((_, f)) = requests.pairs().find(|(_, f)| !catalog.contains(*f)) {
        return Err(SolverError::UnknownContent(f));
    }
    let ids: Vec<ContentId> = catalog.ids().collect();
    let mut caps: Vec<usize> = layout.nodes().map(|(_, n)| n).collect();
    caps.push(ids.len() - layout.total());
    let mut nodes: Vec<Vec<ContentId>> = vec![Vec::new(); caps.len()];
    let mut best: Option<(f64, Vec<ContentId>, CachingDecision)> = None;
    search(0, &ids, &mut caps, &mut nodes, layout, requests, tables, &mut best)?;
    best.map(|(_, _, d)| d).ok_or(SolverError::Unrouted)
}

#[allow(clippy::too_many_arguments)]
fn search(
    at: usize,
    ids: &[ContentId],
    caps: &mut [usize],
    nodes: &mut [Vec<ContentId>],
    layout: &SlotLayout,
    requests: &RequestMatrix,
    tables: &DelayTables,
    best: &mut Option<(f64, Vec<ContentId>, CachingDecision)>,
) -> Result<(), SolverError> {
    if at == ids.len() {
        let n_p = layout.platoon.len();
        let decision = CachingDecision {
            platoon: nodes[..n_p].to_vec(),
            vfc: nodes[n_p..nodes.len() - 1].to_vec(),
            cloud: nodes[nodes.len() - 1].clone(),
        };
        let objective = round_delay(requests, &decision, tables)?.objective;
        let list = decision_to_list(&decision).0;
        let better = match best {
            None => true,
            Some((b, l, _)) => objective < *b || (objective == *b && list < *l),
        };
        if better {
            *best = Some((objective, list, decision));
        }
        return Ok(());
    }
    for n in 0..caps.len() {
        if caps[n] == 0 {
            continue;
        }
        caps[n] -= 1;
        nodes[n].push(ids[at]);
        search(at + 1, ids, caps, nodes, layout, requests, tables, best)?;
        nodes[n].pop();
        caps[n] += 1;
    }
    Ok(())
}
