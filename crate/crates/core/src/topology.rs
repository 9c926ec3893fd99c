//! Fiber plant representation and deterministic hop-count shortest paths.
//!
//! Every edge weighs one hop. Shortest-path parents are chosen as the
//! smallest-id neighbour on the previous BFS level, so identical inputs always
//! produce identical paths and, downstream, identical light-trees.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A 1-based node identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(u32);

impl NodeId {
    /// Panics on 0; ids are 1-based.
    pub fn new(id: u32) -> Self {
        assert!(id >= 1, "node ids are 1-based");
        NodeId(id)
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// Zero-based slot for dense per-node tables.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub(crate) fn from_index(index: usize) -> Self {
        NodeId(index as u32 + 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(id: u32) -> Self {
        NodeId::new(id)
    }
}

/// Reasons a topology description can be rejected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyErrorKind {
    #[error("expected `nodes N` before any edge")]
    MissingHeader,
    #[error("duplicate `nodes` declaration")]
    DuplicateHeader,
    #[error("node count must be at least 1")]
    NoNodes,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("weighted edges are not supported; every link is one hop")]
    WeightedEdge,
    #[error("node {node} out of range 1..={count}")]
    NodeOutOfRange { node: u64, count: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(u32, u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: TopologyErrorKind },
    #[error("{0}")]
    Invalid(TopologyErrorKind),
    #[error("reading {path}: {message}")]
    Io { path: String, message: String },
}

/// Argument errors from the shortest-path routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("node {0} is not in the topology")]
    InvalidNode(NodeId),
    #[error("origin {0} is itself forbidden")]
    ForbiddenOrigin(NodeId),
}

/// Undirected simple graph with unit-weight edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    adjacency: Vec<Vec<NodeId>>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Topology {
    /// Builds a topology from 1-based edge pairs.
    pub fn new(
        node_count: usize,
        edges: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self, TopologyError> {
        let mut builder = Builder::new(node_count).map_err(TopologyError::Invalid)?;
        for (u, v) in edges {
            builder
                .add_edge(u as u64, v as u64)
                .map_err(TopologyError::Invalid)?;
        }
        Ok(builder.finish(String::new()))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from_index)
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v.index() < self.node_count()
    }

    /// Edges as `(low, high)` pairs in ascending order.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `v`, ascending by id.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v.index()]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.contains(v) && self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for start in self.nodes() {
            if seen[start.index()] {
                continue;
            }
            seen[start.index()] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if !seen[v.index()] {
                        seen[v.index()] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Reads and parses a topology file; the file stem becomes the name.
    pub fn load(path: impl AsRef<FsPath>) -> Result<Self, TopologyError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| TopologyError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(parse_topology(&text)?.with_name(name))
    }
}

struct Builder {
    adjacency: Vec<Vec<NodeId>>,
    edges: BTreeSet<(NodeId, NodeId)>,
}

impl Builder {
    fn new(node_count: usize) -> Result<Self, TopologyErrorKind> {
        if node_count == 0 {
            return Err(TopologyErrorKind::NoNodes);
        }
        Ok(Builder {
            adjacency: vec![Vec::new(); node_count],
            edges: BTreeSet::new(),
        })
    }

    fn add_edge(&mut self, u: u64, v: u64) -> Result<(), TopologyErrorKind> {
        let count = self.adjacency.len();
        for node in [u, v] {
            if node == 0 || node > count as u64 {
                return Err(TopologyErrorKind::NodeOutOfRange { node, count });
            }
        }
        let (u, v) = (NodeId::new(u as u32), NodeId::new(v as u32));
        if u == v {
            return Err(TopologyErrorKind::SelfLoop(u.get()));
        }
        let key = (u.min(v), u.max(v));
        if !self.edges.insert(key) {
            return Err(TopologyErrorKind::DuplicateEdge(key.0.get(), key.1.get()));
        }
        self.adjacency[u.index()].push(v);
        self.adjacency[v.index()].push(u);
        Ok(())
    }

    fn finish(mut self, name: String) -> Topology {
        for list in &mut self.adjacency {
            list.sort_unstable();
        }
        Topology {
            name,
            adjacency: self.adjacency,
            edges: self.edges.into_iter().collect(),
        }
    }
}

/// Parses the line-oriented `nodes N` / `edge U V` format.
pub fn parse_topology(text: &str) -> Result<Topology, TopologyError> {
    let mut builder: Option<Builder> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |kind| TopologyError::Parse { line: line_no, kind };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "nodes" => {
                if builder.is_some() {
                    return Err(err(TopologyErrorKind::DuplicateHeader));
                }
                if tokens.len() != 2 {
                    return Err(err(TopologyErrorKind::Malformed(line.to_string())));
                }
                let n: usize = tokens[1]
                    .parse()
                    .map_err(|_| err(TopologyErrorKind::Malformed(line.to_string())))?;
                builder = Some(Builder::new(n).map_err(err)?);
            }
            "edge" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| err(TopologyErrorKind::MissingHeader))?;
                match tokens.len() {
                    3 => {}
                    4 => return Err(err(TopologyErrorKind::WeightedEdge)),
                    _ => return Err(err(TopologyErrorKind::Malformed(line.to_string()))),
                }
                let parse = |t: &str| {
                    t.parse::<u64>()
                        .map_err(|_| err(TopologyErrorKind::Malformed(line.to_string())))
                };
                let (u, v) = (parse(tokens[1])?, parse(tokens[2])?);
                b.add_edge(u, v).map_err(err)?;
            }
            _ => return Err(err(TopologyErrorKind::Malformed(line.to_string()))),
        }
    }
    builder
        .map(|b| b.finish(String::new()))
        .ok_or(TopologyError::Invalid(TopologyErrorKind::MissingHeader))
}

/// An ordered simple path of topology nodes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Path(Vec<NodeId>);

impl Path {
    /// Panics on an empty node list.
    pub fn new(nodes: Vec<NodeId>) -> Self {
        assert!(!nodes.is_empty(), "a path has at least one node");
        Path(nodes)
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn first(&self) -> NodeId {
        self.0[0]
    }

    pub fn last(&self) -> NodeId {
        *self.0.last().expect("non-empty")
    }

    /// Number of edges.
    pub fn hops(&self) -> usize {
        self.0.len() - 1
    }

    pub fn reversed(&self) -> Path {
        let mut nodes = self.0.clone();
        nodes.reverse();
        Path(nodes)
    }

    /// Nodes strictly between the endpoints.
    pub fn interior(&self) -> &[NodeId] {
        if self.0.len() <= 2 {
            &[]
        } else {
            &self.0[1..self.0.len() - 1]
        }
    }

    /// True if consecutive nodes are adjacent and no node repeats.
    pub fn is_simple_in(&self, topo: &Topology) -> bool {
        let distinct: BTreeSet<_> = self.0.iter().collect();
        distinct.len() == self.0.len()
            && self.0.iter().all(|&v| topo.contains(v))
            && self.0.windows(2).all(|w| topo.has_edge(w[0], w[1]))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// Hop distances and deterministic shortest-path parents from one origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMap {
    origin: NodeId,
    dist: Vec<Option<u32>>,
    parent: Vec<Option<NodeId>>,
}

impl DistanceMap {
    pub fn origin(&self) -> NodeId {
        self.origin
    }

    /// `None` when unreachable or out of range.
    pub fn distance(&self, v: NodeId) -> Option<u32> {
        self.dist.get(v.index()).copied().flatten()
    }

    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parent.get(v.index()).copied().flatten()
    }

    pub fn is_reachable(&self, v: NodeId) -> bool {
        self.distance(v).is_some()
    }

    /// Per-node distances indexed by `NodeId::index`.
    pub fn distances(&self) -> &[Option<u32>] {
        &self.dist
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    /// Path from the origin to `target`, or `None` if unreachable.
    pub fn path_to(&self, target: NodeId) -> Option<Path> {
        extract_path(self, target)
    }
}

/// BFS over the subgraph with `blocked` nodes deleted.
fn search(topo: &Topology, origin: NodeId, blocked: &[bool]) -> DistanceMap {
    let n = topo.node_count();
    let mut dist = vec![None; n];
    dist[origin.index()] = Some(0u32);
    let mut queue = VecDeque::from([origin]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u.index()].expect("queued nodes are labelled");
        for &v in topo.neighbors(u) {
            if blocked[v.index()] || dist[v.index()].is_some() {
                continue;
            }
            dist[v.index()] = Some(du + 1);
            queue.push_back(v);
        }
    }
    let mut parent = vec![None; n];
    for v in topo.nodes() {
        let Some(dv) = dist[v.index()] else { continue };
        if v == origin {
            continue;
        }
        // Neighbours are sorted, so the first hit is the smallest id.
        parent[v.index()] = topo
            .neighbors(v)
            .iter()
            .copied()
            .find(|u| dist[u.index()] == Some(dv - 1));
    }
    DistanceMap { origin, dist, parent }
}

/// Unconstrained hop distances from `origin`.
pub fn shortest_distances(topo: &Topology, origin: NodeId) -> Result<DistanceMap, GraphError> {
    if !topo.contains(origin) {
        return Err(GraphError::InvalidNode(origin));
    }
    Ok(search(topo, origin, &vec![false; topo.node_count()]))
}

/// Hop distances from `origin` in the graph with `forbidden` nodes deleted.
pub fn constrained_distances(
    topo: &Topology,
    origin: NodeId,
    forbidden: &BTreeSet<NodeId>,
) -> Result<DistanceMap, GraphError> {
    if !topo.contains(origin) {
        return Err(GraphError::InvalidNode(origin));
    }
    if forbidden.contains(&origin) {
        return Err(GraphError::ForbiddenOrigin(origin));
    }
    let mut blocked = vec![false; topo.node_count()];
    for &v in forbidden {
        if let Some(slot) = blocked.get_mut(v.index()) {
            *slot = true;
        }
    }
    Ok(search(topo, origin, &blocked))
}

/// Walks parents back from `target`; the result runs origin→target.
pub fn extract_path(dm: &DistanceMap, target: NodeId) -> Option<Path> {
    dm.distance(target)?;
    let mut nodes = vec![target];
    let mut cur = target;
    while cur != dm.origin {
        cur = dm.parent(cur)?;
        nodes.push(cur);
    }
    nodes.reverse();
    Some(Path(nodes))
}
