//! Node splitting capabilities, multicast sessions, light-trees and the
//! MC_SET / MI_SET / unserved bookkeeping shared by every heuristic.
//!
//! An MI (multicast-incapable) node drives at most one output link per
//! wavelength, so once it has a child it cannot accept another branch.
//! MC (multicast-capable) nodes split without limit.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::topology::{constrained_distances, shortest_distances, NodeId, Path, Topology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Capability {
    /// MI: drop-and-continue only, one outgoing branch.
    Incapable,
    /// MC: unlimited splitting.
    Capable,
}

/// Per-node MI/MC flags.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CapabilityMap {
    capable: Vec<bool>,
}

impl CapabilityMap {
    pub fn all_incapable(topo: &Topology) -> Self {
        CapabilityMap {
            capable: vec![false; topo.node_count()],
        }
    }

    pub fn all_capable(topo: &Topology) -> Self {
        CapabilityMap {
            capable: vec![true; topo.node_count()],
        }
    }

    /// Flags exactly `nodes` as MC.
    pub fn with_capable(
        topo: &Topology,
        nodes: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, SessionError> {
        let mut map = Self::all_incapable(topo);
        for v in nodes {
            if !topo.contains(v) {
                return Err(SessionError::InvalidNode(v));
            }
            map.capable[v.index()] = true;
        }
        Ok(map)
    }

    pub fn node_count(&self) -> usize {
        self.capable.len()
    }

    pub fn is_capable(&self, v: NodeId) -> bool {
        self.capable[v.index()]
    }

    pub fn capability(&self, v: NodeId) -> Capability {
        if self.is_capable(v) {
            Capability::Capable
        } else {
            Capability::Incapable
        }
    }

    pub fn capable_nodes(&self) -> Vec<NodeId> {
        (0..self.capable.len())
            .filter(|&i| self.capable[i])
            .map(NodeId::from_index)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("node {0} is not in the topology")]
    InvalidNode(NodeId),
    #[error("source {0} cannot also be a destination")]
    SourceIsDestination(NodeId),
    #[error("a session needs at least one destination")]
    NoDestinations,
    #[error("destination {0} listed twice")]
    DuplicateDestination(NodeId),
}

/// A source and its destination set, kept sorted by id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MulticastSession {
    source: NodeId,
    destinations: Vec<NodeId>,
}

impl MulticastSession {
    pub fn new(
        topo: &Topology,
        source: NodeId,
        destinations: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, SessionError> {
        if !topo.contains(source) {
            return Err(SessionError::InvalidNode(source));
        }
        let mut seen = BTreeSet::new();
        for d in destinations {
            if !topo.contains(d) {
                return Err(SessionError::InvalidNode(d));
            }
            if d == source {
                return Err(SessionError::SourceIsDestination(d));
            }
            if !seen.insert(d) {
                return Err(SessionError::DuplicateDestination(d));
            }
        }
        if seen.is_empty() {
            return Err(SessionError::NoDestinations);
        }
        Ok(MulticastSession {
            source,
            destinations: seen.into_iter().collect(),
        })
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn destinations(&self) -> &[NodeId] {
        &self.destinations
    }

    pub fn len(&self) -> usize {
        self.destinations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.destinations.is_empty()
    }

    pub fn is_destination(&self, v: NodeId) -> bool {
        self.destinations.binary_search(&v).is_ok()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SplitError {
    #[error("node {0} is not in the tree")]
    NotInTree(NodeId),
    #[error("malformed tree: {0}")]
    MalformedTree(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

/// One wavelength's rooted tree over topology nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightTree {
    root: NodeId,
    parent: Vec<Option<NodeId>>,
    depth: Vec<Option<u32>>,
    children: Vec<Vec<NodeId>>,
    nodes: Vec<NodeId>,
    served: Vec<NodeId>,
}

impl LightTree {
    /// A tree holding only `root`.
    pub fn new(node_count: usize, root: NodeId) -> Self {
        let mut depth = vec![None; node_count];
        depth[root.index()] = Some(0);
        LightTree {
            root,
            parent: vec![None; node_count],
            depth,
            children: vec![Vec::new(); node_count],
            nodes: vec![root],
            served: Vec::new(),
        }
    }

    /// Builds a tree from undirected edges, orienting them away from `root`.
    /// No capability rules are checked here; see [`validate_forest`].
    pub fn from_edges(
        node_count: usize,
        root: NodeId,
        edges: &[(NodeId, NodeId)],
        served: &[NodeId],
    ) -> Result<Self, SplitError> {
        let in_range = |v: NodeId| v.index() < node_count;
        if !in_range(root) {
            return Err(SplitError::MalformedTree(format!("root {root} out of range")));
        }
        let mut adjacency: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
        for &(u, v) in edges {
            if !in_range(u) || !in_range(v) || u == v {
                return Err(SplitError::MalformedTree(format!("bad edge {u}-{v}")));
            }
            adjacency.entry(u).or_default().push(v);
            adjacency.entry(v).or_default().push(u);
        }
        let mut tree = LightTree::new(node_count, root);
        let mut frontier = vec![root];
        let mut used = 0;
        while let Some(u) = frontier.pop() {
            let mut next = adjacency.get(&u).cloned().unwrap_or_default();
            next.sort_unstable();
            for v in next {
                if tree.parent(u) == Some(v) {
                    continue;
                }
                if tree.contains(v) {
                    return Err(SplitError::MalformedTree(format!("cycle through {u}-{v}")));
                }
                tree.add_child(u, v);
                used += 1;
                frontier.push(v);
            }
        }
        if used != edges.len() {
            return Err(SplitError::MalformedTree(
                "edges not connected to the root".to_string(),
            ));
        }
        for &d in served {
            if !tree.contains(d) {
                return Err(SplitError::NotInTree(d));
            }
            tree.served.push(d);
        }
        Ok(tree)
    }

    pub(crate) fn add_child(&mut self, parent: NodeId, child: NodeId) {
        let d = self.depth[parent.index()].expect("parent in tree") + 1;
        self.parent[child.index()] = Some(parent);
        self.depth[child.index()] = Some(d);
        self.children[parent.index()].push(child);
        self.nodes.push(child);
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node_count_capacity(&self) -> usize {
        self.parent.len()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.depth.get(v.index()).is_some_and(Option::is_some)
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent.get(v.index()).copied().flatten()
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        self.children.get(v.index()).map_or(&[], Vec::as_slice)
    }

    /// Hop count from the root, `None` if `v` is not in the tree.
    pub fn depth(&self, v: NodeId) -> Option<u32> {
        self.depth.get(v.index()).copied().flatten()
    }

    /// Tree nodes in insertion order, root first.
    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    /// Destinations this tree delivers to, in the order they were served.
    pub fn served(&self) -> &[NodeId] {
        &self.served
    }

    /// `(parent, child)` pairs in insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes[1..]
            .iter()
            .map(|&v| (self.parent(v).expect("non-root has parent"), v))
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.contains(v) && self.children(v).is_empty()
    }
}

/// Depth of `v` in `tree`.
pub fn tree_distance(tree: &LightTree, v: NodeId) -> Result<u32, SplitError> {
    tree.depth(v).ok_or(SplitError::NotInTree(v))
}

/// Light-trees sharing one source, one wavelength each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LightForest {
    source: NodeId,
    trees: Vec<LightTree>,
}

impl LightForest {
    pub fn new(source: NodeId, trees: Vec<LightTree>) -> Self {
        LightForest { source, trees }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn trees(&self) -> &[LightTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Index of the first tree serving `d`.
    pub fn serving_tree(&self, d: NodeId) -> Option<usize> {
        self.trees.iter().position(|t| t.served.contains(&d))
    }

    /// Hop delay of `d` in the tree serving it.
    pub fn delay(&self, d: NodeId) -> Option<u32> {
        self.serving_tree(d).and_then(|k| self.trees[k].depth(d))
    }

    /// Map from destination to serving tree index.
    pub fn served(&self) -> BTreeMap<NodeId, usize> {
        let mut out = BTreeMap::new();
        for (k, t) in self.trees.iter().enumerate() {
            for &d in &t.served {
                out.entry(d).or_insert(k);
            }
        }
        out
    }
}

/// Recomputes MC_SET and MI_SET of `tree` from its shape alone.
///
/// A node belongs to MC_SET if it is MC or has no children; every other tree
/// node (an MI node with a child) belongs to MI_SET.
pub fn classify(tree: &LightTree, caps: &CapabilityMap) -> (BTreeSet<NodeId>, BTreeSet<NodeId>) {
    let mut mc = BTreeSet::new();
    let mut mi = BTreeSet::new();
    for &v in tree.nodes() {
        if caps.is_capable(v) || tree.children(v).is_empty() {
            mc.insert(v);
        } else {
            mi.insert(v);
        }
    }
    (mc, mi)
}

/// The in-progress tree and its attachment bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoutingState {
    tree: LightTree,
    mc_set: BTreeSet<NodeId>,
    mi_set: BTreeSet<NodeId>,
    unserved: BTreeSet<NodeId>,
}

impl RoutingState {
    /// Fresh tree `{s}` with every session destination unserved.
    pub fn new(topo: &Topology, session: &MulticastSession) -> Self {
        Self::with_unserved(
            topo,
            session.source(),
            session.destinations().iter().copied(),
        )
    }

    /// Fresh tree `{source}` with only the given destinations left to serve.
    pub fn with_unserved(
        topo: &Topology,
        source: NodeId,
        unserved: impl IntoIterator<Item = NodeId>,
    ) -> Self {
        RoutingState {
            tree: LightTree::new(topo.node_count(), source),
            mc_set: BTreeSet::from([source]),
            mi_set: BTreeSet::new(),
            unserved: unserved.into_iter().collect(),
        }
    }

    pub fn tree(&self) -> &LightTree {
        &self.tree
    }

    pub fn into_tree(self) -> LightTree {
        self.tree
    }

    pub fn mc_set(&self) -> &BTreeSet<NodeId> {
        &self.mc_set
    }

    pub fn mi_set(&self) -> &BTreeSet<NodeId> {
        &self.mi_set
    }

    pub fn unserved(&self) -> &BTreeSet<NodeId> {
        &self.unserved
    }

    /// Grafts `path` (connector first, destination last) onto the tree.
    ///
    /// The connector leaves MC_SET if it is MI, interior nodes join MC_SET or
    /// MI_SET by capability, and the destination joins MC_SET. Destinations on
    /// the interior are served on the way.
    pub fn attach_path(&mut self, caps: &CapabilityMap, path: &Path) -> Result<(), SplitError> {
        let contract = |msg: String| Err(SplitError::Contract(msg));
        let connector = path.first();
        let dest = path.last();
        if path.hops() == 0 {
            return contract(format!("empty path at {connector}"));
        }
        if !self.mc_set.contains(&connector) {
            return contract(format!("connector {connector} not in MC_SET"));
        }
        if !self.unserved.contains(&dest) {
            return contract(format!("destination {dest} is not unserved"));
        }
        let mut fresh = BTreeSet::new();
        for &v in &path.nodes()[1..] {
            if v.index() >= self.tree.node_count_capacity() {
                return contract(format!("node {v} out of range"));
            }
            if self.tree.contains(v) || self.mi_set.contains(&v) {
                return contract(format!("path node {v} already in the tree"));
            }
            if !fresh.insert(v) {
                return contract(format!("path repeats node {v}"));
            }
        }

        if !caps.is_capable(connector) {
            self.mc_set.remove(&connector);
            self.mi_set.insert(connector);
        }
        for pair in path.nodes().windows(2) {
            self.tree.add_child(pair[0], pair[1]);
        }
        for &v in path.interior() {
            if caps.is_capable(v) {
                self.mc_set.insert(v);
            } else {
                self.mi_set.insert(v);
            }
            if self.unserved.remove(&v) {
                self.tree.served.push(v);
            }
        }
        self.mc_set.insert(dest);
        self.unserved.remove(&dest);
        self.tree.served.push(dest);
        Ok(())
    }
}

/// A broken light-tree or light-forest invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    WrongRoot { tree: usize, root: NodeId },
    EmptyTree { tree: usize },
    NonTopologyEdge { tree: usize, from: NodeId, to: NodeId },
    DepthMismatch { tree: usize, node: NodeId },
    MiOutDegree { tree: usize, node: NodeId, children: usize },
    ForeignServed { tree: usize, node: NodeId },
    UnservedDestination { destination: NodeId },
    DuplicateService { destination: NodeId, trees: Vec<usize> },
    UnclaimedDestination { tree: usize, destination: NodeId },
    NonDestinationLeaf { tree: usize, node: NodeId },
    DelayBelowShortestPath { destination: NodeId, delay: u32, bound: u32 },
    PrematureTree { tree: usize, destination: NodeId },
}

impl Violation {
    /// Short category label.
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::WrongRoot { .. } => "wrong root",
            Violation::EmptyTree { .. } => "empty tree",
            Violation::NonTopologyEdge { .. } => "non-topology edge",
            Violation::DepthMismatch { .. } => "depth mismatch",
            Violation::MiOutDegree { .. } => "MI out-degree",
            Violation::ForeignServed { .. } => "foreign destination",
            Violation::UnservedDestination { .. } => "unserved destination",
            Violation::DuplicateService { .. } => "duplicate service",
            Violation::UnclaimedDestination { .. } => "unclaimed destination",
            Violation::NonDestinationLeaf { .. } => "non-destination leaf",
            Violation::DelayBelowShortestPath { .. } => "delay below shortest path",
            Violation::PrematureTree { .. } => "premature new tree",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.kind())?;
        match self {
            Violation::WrongRoot { tree, root } => write!(f, "tree {tree} rooted at {root}"),
            Violation::EmptyTree { tree } => write!(f, "tree {tree} serves nothing"),
            Violation::NonTopologyEdge { tree, from, to } => {
                write!(f, "tree {tree} uses {from}-{to}")
            }
            Violation::DepthMismatch { tree, node } => write!(f, "tree {tree} node {node}"),
            Violation::MiOutDegree { tree, node, children } => {
                write!(f, "tree {tree} MI node {node} has {children} children")
            }
            Violation::ForeignServed { tree, node } => {
                write!(f, "tree {tree} serves non-destination {node}")
            }
            Violation::UnservedDestination { destination } => write!(f, "{destination}"),
            Violation::DuplicateService { destination, trees } => {
                write!(f, "{destination} served by trees {trees:?}")
            }
            Violation::UnclaimedDestination { tree, destination } => {
                write!(f, "tree {tree} reaches {destination} without serving it")
            }
            Violation::NonDestinationLeaf { tree, node } => write!(f, "tree {tree} leaf {node}"),
            Violation::DelayBelowShortestPath { destination, delay, bound } => {
                write!(f, "{destination} delay {delay} < {bound}")
            }
            Violation::PrematureTree { tree, destination } => {
                write!(f, "{destination} could still join tree {tree}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind() == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "pass");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks every structural light-tree and light-forest invariant.
pub fn validate_forest(
    forest: &LightForest,
    topo: &Topology,
    caps: &CapabilityMap,
    session: &MulticastSession,
) -> ValidationReport {
    let mut violations = Vec::new();
    let mut served_by: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();

    for (k, tree) in forest.trees().iter().enumerate() {
        if tree.root() != session.source() || forest.source() != session.source() {
            violations.push(Violation::WrongRoot { tree: k, root: tree.root() });
        }
        if tree.served().is_empty() {
            violations.push(Violation::EmptyTree { tree: k });
        }
        for (u, v) in tree.edges() {
            if !topo.has_edge(u, v) {
                violations.push(Violation::NonTopologyEdge { tree: k, from: u, to: v });
            }
            if tree.depth(v) != tree.depth(u).map(|d| d + 1) {
                violations.push(Violation::DepthMismatch { tree: k, node: v });
            }
        }
        for &v in tree.nodes() {
            let out = tree.children(v).len();
            if topo.contains(v) && !caps.is_capable(v) && out > 1 {
                violations.push(Violation::MiOutDegree { tree: k, node: v, children: out });
            }
            if v != tree.root() && out == 0 && !tree.served().contains(&v) {
                violations.push(Violation::NonDestinationLeaf { tree: k, node: v });
            }
        }
        for &d in tree.served() {
            if !session.is_destination(d) {
                violations.push(Violation::ForeignServed { tree: k, node: d });
            }
            served_by.entry(d).or_default().push(k);
        }
    }

    for &d in session.destinations() {
        match served_by.get(&d).map(Vec::as_slice) {
            None | Some([]) => violations.push(Violation::UnservedDestination { destination: d }),
            Some([_]) => {}
            Some(trees) => violations.push(Violation::DuplicateService {
                destination: d,
                trees: trees.to_vec(),
            }),
        }
    }

    // A destination touched by a tree must be served no later than that tree.
    for (k, tree) in forest.trees().iter().enumerate() {
        for &v in tree.nodes() {
            if !session.is_destination(v) {
                continue;
            }
            if let Some(first) = served_by.get(&v).and_then(|t| t.first()) {
                if *first > k {
                    violations.push(Violation::UnclaimedDestination { tree: k, destination: v });
                }
            }
        }
    }

    if let Ok(spt) = shortest_distances(topo, session.source()) {
        for &d in session.destinations() {
            if let (Some(delay), Some(bound)) = (forest.delay(d), spt.distance(d)) {
                if delay < bound {
                    violations.push(Violation::DelayBelowShortestPath { destination: d, delay, bound });
                }
            }
        }
    }

    // A later tree is allowed only once no remaining destination can join.
    for (k, tree) in forest.trees().iter().enumerate() {
        let (mc, mi) = classify(tree, caps);
        for later in forest.trees().iter().skip(k + 1) {
            for &d in later.served() {
                if tree.contains(d) || mi.contains(&d) {
                    continue;
                }
                let Ok(dm) = constrained_distances(topo, d, &mi) else { continue };
                if mc.iter().any(|&c| dm.is_reachable(c)) {
                    violations.push(Violation::PrematureTree { tree: k, destination: d });
                }
            }
        }
    }

    ValidationReport { violations }
}
