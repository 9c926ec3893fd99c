//! Research topologies shipped with the crate.

use crate::topology::{parse_topology, Topology};

pub const NSF: &str = include_str!("../data/nsf.topo");
pub const COST239: &str = include_str!("../data/cost239.topo");
pub const LONGHAUL: &str = include_str!("../data/longhaul.topo");

fn load(text: &str, name: &str) -> Topology {
    parse_topology(text)
        .expect("bundled topology parses")
        .with_name(name)
}

/// 14-node NSFNET.
pub fn nsf() -> Topology {
    load(NSF, "nsf")
}

/// 11-node COST 239.
pub fn cost239() -> Topology {
    load(COST239, "cost239")
}

/// 28-node USA long-haul.
pub fn longhaul() -> Topology {
    load(LONGHAUL, "longhaul")
}

/// All bundled topologies in a fixed order.
pub fn all() -> Vec<Topology> {
    vec![nsf(), cost239(), longhaul()]
}
