//! Multicast light-tree routing in WDM networks with sparse light splitting.
//!
//! Only multicast-capable (MC) nodes may split a signal; multicast-incapable
//! (MI) nodes forward to at most one child. Destinations that cannot be
//! attached under that constraint spill into extra trees on new wavelengths.
//!
//! Two heuristics are provided: [`routing::Algorithm::MemberOnly`], which
//! grows the tree by nearest reachable destination, and
//! [`routing::Algorithm::DistancePriority`], which serves destinations close to
//! the source first and attaches each at the shallowest connector.

pub mod bundled;
pub mod dot;
pub mod harness;
pub mod metrics;
pub mod oracle;
pub mod routing;
pub mod splitting;
pub mod topology;

pub use metrics::MetricsReport;
pub use routing::{route, Algorithm, RouteError};
pub use splitting::{CapabilityMap, LightForest, LightTree, MulticastSession};
pub use topology::{NodeId, Topology};
