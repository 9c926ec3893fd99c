//! Graphviz rendering of a light-forest, and a reader for that same output.
//!
//! Each tree becomes a `cluster_k` subgraph labelled `wavelength k` (1-based).
//! Node ids are namespaced per tree as `"k:v"` because one fiber node can sit
//! in several trees. Served destinations get `peripheries=2`; MC nodes are
//! boxes. Edges are written parent first.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::splitting::{CapabilityMap, LightForest, LightTree};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("tree {tree}: {message}")]
    Tree { tree: usize, message: String },
}

pub fn to_dot(forest: &LightForest, caps: &CapabilityMap) -> String {
    let mut out = String::new();
    out.push_str("graph lightforest {\n");
    let _ = writeln!(out, "  // source {}", forest.source());
    for (i, tree) in forest.trees().iter().enumerate() {
        let k = i + 1;
        let _ = writeln!(out, "  subgraph cluster_{k} {{");
        let _ = writeln!(out, "    label=\"wavelength {k}\";");
        for &v in tree.nodes() {
            let shape = if caps.is_capable(v) { "box" } else { "circle" };
            let served = tree.served().contains(&v);
            let mut attrs = format!("label=\"{v}\", shape={shape}");
            if served {
                attrs.push_str(", peripheries=2");
            }
            let _ = writeln!(out, "    \"{k}:{v}\" [{attrs}];");
        }
        for (u, v) in tree.edges() {
            let _ = writeln!(out, "    \"{k}:{u}\" -- \"{k}:{v}\";");
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

#[derive(Default)]
struct PendingTree {
    nodes: Vec<NodeId>,
    served: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

fn parse_ref(token: &str) -> Option<(usize, NodeId)> {
    let inner = token.trim().strip_prefix('"')?.strip_suffix('"')?;
    let (k, v) = inner.split_once(':')?;
    let v: u32 = v.parse().ok().filter(|&v| v >= 1)?;
    Some((k.parse().ok()?, NodeId::new(v)))
}

/// Reads a forest previously written by [`to_dot`].
pub fn from_dot(text: &str, node_count: usize) -> Result<LightForest, DotError> {
    let mut source = None;
    let mut trees: BTreeMap<usize, PendingTree> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let syntax = |message: &str| DotError::Syntax {
            line: line_no,
            message: message.to_string(),
        };
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("// source ") {
            let id: u32 = rest.trim().parse().map_err(|_| syntax("bad source id"))?;
            if id == 0 {
                return Err(syntax("bad source id"));
            }
            source = Some(NodeId::new(id));
            continue;
        }
        if !line.starts_with('"') {
            continue;
        }
        let body = line.trim_end_matches(';');
        if let Some((a, b)) = body.split_once("--") {
            let (ka, u) = parse_ref(a).ok_or_else(|| syntax("bad edge endpoint"))?;
            let (kb, v) = parse_ref(b).ok_or_else(|| syntax("bad edge endpoint"))?;
            if ka != kb {
                return Err(syntax("edge crosses trees"));
            }
            trees.entry(ka).or_default().edges.push((u, v));
        } else {
            let (id, attrs) = body.split_once('[').ok_or_else(|| syntax("expected attributes"))?;
            let (k, v) = parse_ref(id).ok_or_else(|| syntax("bad node id"))?;
            let entry = trees.entry(k).or_default();
            entry.nodes.push(v);
            if attrs.contains("peripheries=2") {
                entry.served.push(v);
            }
        }
    }
    let source = source.ok_or(DotError::Syntax {
        line: 0,
        message: "missing `// source` line".to_string(),
    })?;
    let mut out = Vec::with_capacity(trees.len());
    for (k, pending) in trees {
        let tree_err = |message: String| DotError::Tree { tree: k, message };
        let tree = LightTree::from_edges(node_count, source, &pending.edges, &pending.served)
            .map_err(|e| tree_err(e.to_string()))?;
        for &(u, v) in &pending.edges {
            if tree.parent(v) != Some(u) {
                return Err(tree_err(format!("edge {u}-{v} not oriented from the root")));
            }
        }
        if tree.nodes().len() != pending.nodes.len() {
            return Err(tree_err("node list disagrees with edges".to_string()));
        }
        out.push(tree);
    }
    Ok(LightForest::new(source, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::route_distance_priority;
    use crate::splitting::MulticastSession;
    use crate::topology::parse_topology;

    #[test]
    fn round_trip_forest() {
        let topo = parse_topology("nodes 6\nedge 1 2\nedge 2 3\nedge 3 4\nedge 2 5\nedge 5 6").unwrap();
        let caps = CapabilityMap::all_incapable(&topo);
        let session = MulticastSession::new(&topo, NodeId::new(1), [4, 5].map(NodeId::new)).unwrap();
        let forest = route_distance_priority(&topo, &caps, &session).unwrap();
        let dot = to_dot(&forest, &caps);
        assert!(dot.contains("label=\"wavelength 2\""));
        assert!(dot.contains("\"1:5\" [label=\"5\", shape=circle, peripheries=2];"));
        assert!(dot.contains("\"2:3\" -- \"2:4\";"));
        let back = from_dot(&dot, topo.node_count()).unwrap();
        assert_eq!(back.len(), forest.len());
        for (a, b) in back.trees().iter().zip(forest.trees()) {
            let mut ea: Vec<_> = a.edges().collect();
            let mut eb: Vec<_> = b.edges().collect();
            ea.sort();
            eb.sort();
            assert_eq!(ea, eb);
        }
        assert_eq!(back.served(), forest.served());
    }

    #[test]
    fn rejects_garbage() {
        assert!(from_dot("graph x {\n  \"1:1\" -- \"2:2\";\n}", 3).is_err());
        assert!(from_dot("graph x {}", 3).is_err());
    }
}
