//! Shortest constraint paths and the two light-tree heuristics built on them.
//!
//! Both heuristics follow the minimum path rule: every step grafts the
//! globally shortest constraint path onto the tree. They differ only in how
//! ties are broken.
//!
//! * Member-Only takes the smallest-id candidate destination and the
//!   smallest-id connector.
//! * Distance-Priority takes the candidate nearest to the source in the
//!   unconstrained shortest-path tree, then the connector nearest to the
//!   source inside the tree being built.
//!
//! When no unserved destination can reach the current tree a new tree rooted
//! at the source is started, yielding a light-forest.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::splitting::{
    CapabilityMap, LightForest, LightTree, MulticastSession, RoutingState, SplitError,
};
use crate::topology::{constrained_distances, shortest_distances, GraphError, NodeId, Path, Topology};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("destination {0} is unreachable from the source")]
    Unreachable(NodeId),
    #[error("destination {0} is not unserved")]
    NotUnserved(NodeId),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("internal contract violated: {0}")]
    Contract(String),
}

impl From<SplitError> for RouteError {
    fn from(e: SplitError) -> Self {
        RouteError::Contract(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "dp")]
    DistancePriority,
    #[serde(rename = "mo")]
    MemberOnly,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::DistancePriority, Algorithm::MemberOnly];

    /// Short name used on the command line and in CSV output.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::DistancePriority => "dp",
            Algorithm::MemberOnly => "mo",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dp" => Ok(Algorithm::DistancePriority),
            "mo" => Ok(Algorithm::MemberOnly),
            other => Err(format!("unknown algorithm `{other}` (expected dp or mo)")),
        }
    }
}

/// Destination priorities: nearer to the source in the SPT ranks higher.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityMap {
    distance: BTreeMap<NodeId, u32>,
}

impl PriorityMap {
    pub fn from_distances(distances: impl IntoIterator<Item = (NodeId, u32)>) -> Self {
        PriorityMap {
            distance: distances.into_iter().collect(),
        }
    }

    pub fn distance(&self, d: NodeId) -> Option<u32> {
        self.distance.get(&d).copied()
    }

    /// Sort key; smaller is higher priority.
    pub fn key(&self, d: NodeId) -> (u32, NodeId) {
        (self.distance(d).unwrap_or(u32::MAX), d)
    }

    /// Destinations from highest to lowest priority.
    pub fn order(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self.distance.keys().copied().collect();
        out.sort_by_key(|&d| self.key(d));
        out
    }
}

/// Ranks destinations by SPT hop distance from the source.
pub fn assign_priorities(
    topo: &Topology,
    session: &MulticastSession,
) -> Result<PriorityMap, RouteError> {
    let spt = shortest_distances(topo, session.source())?;
    let mut distance = BTreeMap::new();
    for &d in session.destinations() {
        let dist = spt.distance(d).ok_or(RouteError::Unreachable(d))?;
        distance.insert(d, dist);
    }
    Ok(PriorityMap { distance })
}

/// Shortest constraint paths from one unserved destination to the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScpResult {
    destination: NodeId,
    distance: u32,
    connectors: Vec<NodeId>,
    paths: BTreeMap<NodeId, Path>,
}

impl ScpResult {
    pub fn destination(&self) -> NodeId {
        self.destination
    }

    pub fn distance(&self) -> u32 {
        self.distance
    }

    /// MC_SET nodes at the minimum constrained distance, ascending by id.
    pub fn connectors(&self) -> &[NodeId] {
        &self.connectors
    }

    /// The deterministic path destination→`connector`.
    pub fn path_to(&self, connector: NodeId) -> Option<&Path> {
        self.paths.get(&connector)
    }
}

/// Shortest constraint path from `d` to the current tree, avoiding MI_SET.
pub fn scp(
    state: &RoutingState,
    topo: &Topology,
    d: NodeId,
) -> Result<Option<ScpResult>, RouteError> {
    if !topo.contains(d) {
        return Err(GraphError::InvalidNode(d).into());
    }
    if !state.unserved().contains(&d) {
        return Err(RouteError::NotUnserved(d));
    }
    let dm = constrained_distances(topo, d, state.mi_set())?;
    let best = state
        .mc_set()
        .iter()
        .filter_map(|&c| dm.distance(c))
        .min();
    let Some(distance) = best else {
        return Ok(None);
    };
    let mut connectors = Vec::new();
    let mut paths = BTreeMap::new();
    for &c in state.mc_set() {
        if dm.distance(c) != Some(distance) {
            continue;
        }
        let path = dm
            .path_to(c)
            .ok_or_else(|| RouteError::Contract(format!("no path to reachable {c}")))?;
        if path.interior().iter().any(|&v| state.tree().contains(v)) {
            return Err(RouteError::Contract(format!(
                "constraint path {path} re-enters the tree"
            )));
        }
        connectors.push(c);
        paths.insert(c, path);
    }
    Ok(Some(ScpResult {
        destination: d,
        distance,
        connectors,
        paths,
    }))
}

fn all_scps(state: &RoutingState, topo: &Topology) -> Result<Vec<ScpResult>, RouteError> {
    let mut out = Vec::with_capacity(state.unserved().len());
    for &d in state.unserved() {
        if let Some(r) = scp(state, topo, d)? {
            out.push(r);
        }
    }
    Ok(out)
}

fn minimum_candidates(results: Vec<ScpResult>) -> Vec<ScpResult> {
    let Some(min) = results.iter().map(ScpResult::distance).min() else {
        return Vec::new();
    };
    results.into_iter().filter(|r| r.distance == min).collect()
}

/// Unserved destinations whose SCP length ties the global minimum.
pub fn candidate_destinations(
    state: &RoutingState,
    topo: &Topology,
) -> Result<Vec<NodeId>, RouteError> {
    Ok(minimum_candidates(all_scps(state, topo)?)
        .iter()
        .map(ScpResult::destination)
        .collect())
}

/// The highest-priority candidate: smallest (SPT distance, id).
pub fn select_destination(cands: &[NodeId], prio: &PriorityMap) -> Result<NodeId, RouteError> {
    cands
        .iter()
        .copied()
        .min_by_key(|&d| prio.key(d))
        .ok_or_else(|| RouteError::Contract("no candidate destinations".to_string()))
}

/// MC_SET nodes reachable from `d` at its SCP length.
pub fn candidate_connectors(
    state: &RoutingState,
    topo: &Topology,
    d: NodeId,
) -> Result<Vec<NodeId>, RouteError> {
    Ok(scp(state, topo, d)?
        .map(|r| r.connectors)
        .unwrap_or_default())
}

/// The connector nearest to the root inside the tree: smallest (depth, id).
pub fn select_connector(state: &RoutingState, cands: &[NodeId]) -> Result<NodeId, RouteError> {
    let tree = state.tree();
    cands
        .iter()
        .copied()
        .min_by_key(|&c| (tree.depth(c).unwrap_or(u32::MAX), c))
        .ok_or_else(|| RouteError::Contract("no candidate connectors".to_string()))
}

/// One attachment made while building a forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    /// Index of the tree being grown.
    pub tree: usize,
    /// Unserved destinations before this step.
    pub unserved: Vec<NodeId>,
    pub candidates: Vec<NodeId>,
    pub destination: NodeId,
    /// Candidate connectors for the chosen destination.
    pub connectors: Vec<NodeId>,
    pub connector: NodeId,
    /// Minimum SCP length over all unserved destinations.
    pub min_distance: u32,
    /// Attached path, connector first.
    pub path: Path,
}

/// Routes with the chosen heuristic.
pub fn route(
    algo: Algorithm,
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
) -> Result<LightForest, RouteError> {
    build(algo, topo, caps, session, None)
}

/// Like [`route`] but also returns every attachment step.
pub fn route_traced(
    algo: Algorithm,
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
) -> Result<(LightForest, Vec<Step>), RouteError> {
    let mut steps = Vec::new();
    let forest = build(algo, topo, caps, session, Some(&mut steps))?;
    Ok((forest, steps))
}

pub fn route_distance_priority(
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
) -> Result<LightForest, RouteError> {
    route(Algorithm::DistancePriority, topo, caps, session)
}

pub fn route_member_only(
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
) -> Result<LightForest, RouteError> {
    route(Algorithm::MemberOnly, topo, caps, session)
}

fn build(
    algo: Algorithm,
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
    mut trace: Option<&mut Vec<Step>>,
) -> Result<LightForest, RouteError> {
    if caps.node_count() != topo.node_count() {
        return Err(RouteError::Contract(
            "capability map does not match the topology".to_string(),
        ));
    }
    // Also rejects destinations cut off from the source up front.
    let prio = assign_priorities(topo, session)?;
    let source = session.source();
    let mut remaining: Vec<NodeId> = session.destinations().to_vec();
    let mut trees: Vec<LightTree> = Vec::new();

    while !remaining.is_empty() {
        let mut state = RoutingState::with_unserved(topo, source, remaining.iter().copied());
        loop {
            let cands = minimum_candidates(all_scps(&state, topo)?);
            if cands.is_empty() {
                break;
            }
            let min_distance = cands[0].distance;
            let ids: Vec<NodeId> = cands.iter().map(ScpResult::destination).collect();
            let dest = match algo {
                Algorithm::DistancePriority => select_destination(&ids, &prio)?,
                Algorithm::MemberOnly => ids[0],
            };
            let chosen = cands
                .iter()
                .find(|r| r.destination == dest)
                .expect("destination drawn from candidates");
            let connector = match algo {
                Algorithm::DistancePriority => select_connector(&state, &chosen.connectors)?,
                Algorithm::MemberOnly => chosen.connectors[0],
            };
            let path = chosen
                .path_to(connector)
                .expect("connector has a stored path")
                .reversed();
            if path.hops() != min_distance as usize {
                return Err(RouteError::Contract(format!(
                    "attached {} hops but the minimum constraint path is {min_distance}",
                    path.hops()
                )));
            }
            if let Some(steps) = trace.as_deref_mut() {
                steps.push(Step {
                    tree: trees.len(),
                    unserved: state.unserved().iter().copied().collect(),
                    candidates: ids.clone(),
                    destination: dest,
                    connectors: chosen.connectors.clone(),
                    connector,
                    min_distance,
                    path: path.clone(),
                });
            }
            state.attach_path(caps, &path)?;
        }
        if state.unserved().len() == remaining.len() {
            return Err(RouteError::Contract(format!(
                "a fresh tree could not serve any of {remaining:?}"
            )));
        }
        remaining = state.unserved().iter().copied().collect();
        trees.push(state.into_tree());
    }
    Ok(LightForest::new(source, trees))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitting::validate_forest;
    use crate::topology::parse_topology;

    const F1: &str = "nodes 6\nedge 1 2\nedge 2 3\nedge 3 4\nedge 2 5\nedge 5 6\nedge 4 6";
    const F2: &str = "nodes 6\nedge 1 2\nedge 2 3\nedge 3 4\nedge 2 5\nedge 5 6";

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    fn ns(ids: &[u32]) -> Vec<NodeId> {
        ids.iter().map(|&i| n(i)).collect()
    }

    fn path(p: &[u32]) -> Path {
        Path::new(ns(p))
    }

    fn edges(tree: &LightTree) -> Vec<(u32, u32)> {
        let mut e: Vec<_> = tree
            .edges()
            .map(|(a, b)| (a.get().min(b.get()), a.get().max(b.get())))
            .collect();
        e.sort();
        e
    }

    fn f1_state(caps: &CapabilityMap) -> (Topology, RoutingState) {
        let topo = parse_topology(F1).unwrap();
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5, 6])).unwrap();
        let mut st = RoutingState::new(&topo, &session);
        st.attach_path(caps, &path(&[1, 2, 5])).unwrap();
        (topo, st)
    }

    #[test]
    fn scp_on_partial_tree() {
        let topo = parse_topology(F1).unwrap();
        let caps = CapabilityMap::with_capable(&topo, [n(1)]).unwrap();
        let (topo, st) = f1_state(&caps);
        let r = scp(&st, &topo, n(4)).unwrap().unwrap();
        assert_eq!(r.distance(), 2);
        assert_eq!(r.connectors(), &[n(5)]);
        assert_eq!(r.path_to(n(5)).unwrap().nodes(), ns(&[4, 6, 5]).as_slice());
        assert_eq!(candidate_connectors(&st, &topo, n(4)).unwrap(), ns(&[5]));
        assert_eq!(scp(&st, &topo, n(5)), Err(RouteError::NotUnserved(n(5))));
    }

    #[test]
    fn scp_from_bare_source_is_plain_shortest_path() {
        let topo = parse_topology(F1).unwrap();
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5, 6])).unwrap();
        let st = RoutingState::new(&topo, &session);
        let spt = shortest_distances(&topo, n(1)).unwrap();
        for d in ns(&[4, 5, 6]) {
            let r = scp(&st, &topo, d).unwrap().unwrap();
            assert_eq!(Some(r.distance()), spt.distance(d));
            assert_eq!(r.connectors(), &[n(1)]);
        }
    }

    #[test]
    fn scp_blocked_when_mi_nodes_cut_every_route() {
        let topo = parse_topology(F2).unwrap();
        let caps = CapabilityMap::all_incapable(&topo);
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5])).unwrap();
        let mut st = RoutingState::new(&topo, &session);
        st.attach_path(&caps, &path(&[1, 2, 5])).unwrap();
        assert_eq!(scp(&st, &topo, n(4)).unwrap(), None);
        assert!(candidate_destinations(&st, &topo).unwrap().is_empty());
    }

    #[test]
    fn priorities_order_by_distance_then_id() {
        let topo = parse_topology(F1).unwrap();
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5, 6])).unwrap();
        let prio = assign_priorities(&topo, &session).unwrap();
        assert_eq!(prio.order(), ns(&[5, 4, 6]));
        let star = Topology::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let s = MulticastSession::new(&star, n(1), ns(&[4, 2, 3])).unwrap();
        assert_eq!(assign_priorities(&star, &s).unwrap().order(), ns(&[2, 3, 4]));
    }

    #[test]
    fn candidate_destinations_on_fresh_tree() {
        let topo = parse_topology(F1).unwrap();
        let st = RoutingState::with_unserved(&topo, n(1), ns(&[4, 5, 6]));
        assert_eq!(candidate_destinations(&st, &topo).unwrap(), ns(&[5]));
        let st = RoutingState::with_unserved(&topo, n(1), ns(&[4, 6]));
        assert_eq!(candidate_destinations(&st, &topo).unwrap(), ns(&[4, 6]));
    }

    #[test]
    fn destination_selection() {
        let topo = parse_topology(F1).unwrap();
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5, 6])).unwrap();
        let prio = assign_priorities(&topo, &session).unwrap();
        assert_eq!(select_destination(&ns(&[6, 4]), &prio), Ok(n(4)));
        assert_eq!(select_destination(&ns(&[5]), &prio), Ok(n(5)));
        assert!(select_destination(&[], &prio).is_err());

        let prio = PriorityMap::from_distances([(n(9), 4), (n(12), 3)]);
        assert_eq!(select_destination(&ns(&[9, 12]), &prio), Ok(n(12)));
    }

    #[test]
    fn connector_selection_prefers_shallow() {
        // F1 plus 1-6
        let topo = Topology::new(6, [(1, 2), (2, 3), (3, 4), (2, 5), (5, 6), (4, 6), (1, 6)]).unwrap();
        let caps = CapabilityMap::with_capable(&topo, [n(1)]).unwrap();
        let mut st = RoutingState::with_unserved(&topo, n(1), ns(&[4, 6]));
        st.attach_path(&caps, &path(&[1, 2, 3, 4])).unwrap();
        let cands = candidate_connectors(&st, &topo, n(6)).unwrap();
        assert_eq!(cands, ns(&[1, 4]));
        assert_eq!(select_connector(&st, &cands), Ok(n(1)));
        assert_eq!(select_connector(&st, &ns(&[4])), Ok(n(4)));
        assert!(select_connector(&st, &[]).is_err());

        let star = Topology::new(3, [(1, 2), (1, 3)]).unwrap();
        let caps = CapabilityMap::all_capable(&star);
        let mut st = RoutingState::with_unserved(&star, n(1), ns(&[2, 3]));
        st.attach_path(&caps, &path(&[1, 3])).unwrap();
        st.attach_path(&caps, &path(&[1, 2])).unwrap();
        assert_eq!(select_connector(&st, &ns(&[3, 2])), Ok(n(2)));
    }

    #[test]
    fn distance_priority_on_f1() {
        let topo = parse_topology(F1).unwrap();
        let caps = CapabilityMap::with_capable(&topo, [n(1)]).unwrap();
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5, 6])).unwrap();
        let forest = route_distance_priority(&topo, &caps, &session).unwrap();
        assert_eq!(forest.len(), 1);
        assert_eq!(edges(&forest.trees()[0]), vec![(1, 2), (2, 5), (4, 6), (5, 6)]);
        assert_eq!(forest.delay(n(5)), Some(2));
        assert_eq!(forest.delay(n(6)), Some(3));
        assert_eq!(forest.delay(n(4)), Some(4));
        assert!(validate_forest(&forest, &topo, &caps, &session).is_ok());

        let mo = route_member_only(&topo, &caps, &session).unwrap();
        assert_eq!(mo, forest);
    }

    #[test]
    fn forest_fallback_on_f2() {
        let topo = parse_topology(F2).unwrap();
        let caps = CapabilityMap::all_incapable(&topo);
        let session = MulticastSession::new(&topo, n(1), ns(&[4, 5])).unwrap();
        let (forest, steps) = route_traced(Algorithm::DistancePriority, &topo, &caps, &session).unwrap();
        assert_eq!(forest.len(), 2);
        assert_eq!(edges(&forest.trees()[0]), vec![(1, 2), (2, 5)]);
        assert_eq!(edges(&forest.trees()[1]), vec![(1, 2), (2, 3), (3, 4)]);
        assert_eq!(steps.len(), 2);
        assert_eq!(steps[1].tree, 1);
        let report = validate_forest(&forest, &topo, &caps, &session);
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn single_destination_is_shortest_path() {
        let topo = parse_topology(F1).unwrap();
        let caps = CapabilityMap::all_incapable(&topo);
        let session = MulticastSession::new(&topo, n(1), ns(&[4])).unwrap();
        let dp = route_distance_priority(&topo, &caps, &session).unwrap();
        let mo = route_member_only(&topo, &caps, &session).unwrap();
        assert_eq!(dp, mo);
        assert_eq!(edges(&dp.trees()[0]), vec![(1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn unreachable_destination_fails() {
        let topo = Topology::new(4, [(1, 2), (3, 4)]).unwrap();
        let caps = CapabilityMap::all_capable(&topo);
        let session = MulticastSession::new(&topo, n(1), ns(&[2, 4])).unwrap();
        assert_eq!(
            route_distance_priority(&topo, &caps, &session),
            Err(RouteError::Unreachable(n(4)))
        );
        assert_eq!(
            route_member_only(&topo, &caps, &session),
            Err(RouteError::Unreachable(n(4)))
        );
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>(), Ok(a));
        }
        assert!("xx".parse::<Algorithm>().is_err());
    }
}
