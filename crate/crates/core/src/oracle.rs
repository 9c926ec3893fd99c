//! Brute-force references for checking the routing machinery.
//!
//! Nothing here calls into the BFS in [`crate::topology`]; adjacency is rebuilt
//! from the raw edge list and paths are enumerated exhaustively.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::splitting::MulticastSession;
use crate::topology::{NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("graph has {nodes} nodes, budget allows {max}")]
    TooManyNodes { nodes: usize, max: usize },
    #[error("enumeration exceeded {0} paths")]
    TooManyPaths(usize),
    #[error("max_nodes {0} exceeds the hard cap of 10")]
    InvalidBudget(usize),
}

/// Caps for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBudget {
    max_nodes: usize,
    max_paths: usize,
}

impl OracleBudget {
    pub const HARD_NODE_CAP: usize = 10;

    pub fn new(max_nodes: usize, max_paths: usize) -> Result<Self, OracleError> {
        if max_nodes > Self::HARD_NODE_CAP {
            return Err(OracleError::InvalidBudget(max_nodes));
        }
        Ok(OracleBudget { max_nodes, max_paths })
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    pub fn max_paths(&self) -> usize {
        self.max_paths
    }
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_nodes: 8,
            max_paths: 1_000_000,
        }
    }
}

fn raw_adjacency(topo: &Topology) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &(u, v) in topo.edges() {
        adj.entry(u).or_default().push(v);
        adj.entry(v).or_default().push(u);
    }
    adj
}

/// Calls `visit(endpoint, hops)` for every simple path starting at `start`
/// that avoids `blocked` (including `start` itself).
fn enumerate_paths(
    topo: &Topology,
    start: NodeId,
    blocked: &BTreeSet<NodeId>,
    budget: &OracleBudget,
    mut visit: impl FnMut(NodeId, u32),
) -> Result<(), OracleError> {
    if topo.node_count() > budget.max_nodes {
        return Err(OracleError::TooManyNodes {
            nodes: topo.node_count(),
            max: budget.max_nodes,
        });
    }
    if blocked.contains(&start) {
        return Ok(());
    }
    let adj = raw_adjacency(topo);
    let mut on_path = BTreeSet::from([start]);
    let mut count = 0usize;

    #[allow(clippy::too_many_arguments)]
    fn walk(
        u: NodeId,
        hops: u32,
        adj: &BTreeMap<NodeId, Vec<NodeId>>,
        blocked: &BTreeSet<NodeId>,
        on_path: &mut BTreeSet<NodeId>,
        count: &mut usize,
        limit: usize,
        visit: &mut dyn FnMut(NodeId, u32),
    ) -> Result<(), OracleError> {
        *count += 1;
        if *count > limit {
            return Err(OracleError::TooManyPaths(limit));
        }
        visit(u, hops);
        for &v in adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
            if blocked.contains(&v) || on_path.contains(&v) {
                continue;
            }
            on_path.insert(v);
            walk(v, hops + 1, adj, blocked, on_path, count, limit, visit)?;
            on_path.remove(&v);
        }
        Ok(())
    }

    walk(
        start,
        0,
        &adj,
        blocked,
        &mut on_path,
        &mut count,
        budget.max_paths,
        &mut visit,
    )
}

/// Minimum length over all simple paths from `u` to `mc_set` that touch no
/// `mi_set` node, with every endpoint achieving it.
pub fn brute_scp(
    topo: &Topology,
    mc_set: &BTreeSet<NodeId>,
    mi_set: &BTreeSet<NodeId>,
    u: NodeId,
    budget: &OracleBudget,
) -> Result<Option<(u32, BTreeSet<NodeId>)>, OracleError> {
    let mut best: Option<(u32, BTreeSet<NodeId>)> = None;
    enumerate_paths(topo, u, mi_set, budget, |v, hops| {
        if !mc_set.contains(&v) {
            return;
        }
        match &mut best {
            Some((d, set)) if *d == hops => {
                set.insert(v);
            }
            Some((d, _)) if *d < hops => {}
            _ => best = Some((hops, BTreeSet::from([v]))),
        }
    })?;
    Ok(best)
}

/// Per-node minimum simple-path length from `origin` avoiding `forbidden`,
/// indexed by `NodeId::index`.
pub fn brute_distances(
    topo: &Topology,
    origin: NodeId,
    forbidden: &BTreeSet<NodeId>,
    budget: &OracleBudget,
) -> Result<Vec<Option<u32>>, OracleError> {
    let mut dist = vec![None; topo.node_count()];
    enumerate_paths(topo, origin, forbidden, budget, |v, hops| {
        let slot: &mut Option<u32> = &mut dist[v.index()];
        if slot.is_none_or(|d| hops < d) {
            *slot = Some(hops);
        }
    })?;
    Ok(dist)
}

/// Unconstrained hop distance from the source to each destination, a floor
/// for any light-tree delay. Computed by repeated edge relaxation.
pub fn spt_delay_lower_bound(topo: &Topology, session: &MulticastSession) -> BTreeMap<NodeId, u32> {
    let mut dist: Vec<Option<u32>> = vec![None; topo.node_count()];
    dist[session.source().index()] = Some(0);
    loop {
        let mut changed = false;
        for &(u, v) in topo.edges() {
            for (a, b) in [(u, v), (v, u)] {
                if let Some(da) = dist[a.index()] {
                    if dist[b.index()].is_none_or(|db| da + 1 < db) {
                        dist[b.index()] = Some(da + 1);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    session
        .destinations()
        .iter()
        .filter_map(|&d| dist[d.index()].map(|x| (d, x)))
        .collect()
}
