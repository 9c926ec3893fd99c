//! Diameter, average delay, link stress and total cost of a light-forest.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;
use thiserror::Error;

use crate::splitting::{LightForest, MulticastSession};
use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("destination {0} is not served by the forest")]
    Unserved(NodeId),
}

/// Maximum served-destination depth over all trees.
pub fn diameter(forest: &LightForest) -> u32 {
    forest
        .trees()
        .iter()
        .flat_map(|t| t.served().iter().filter_map(|&d| t.depth(d)))
        .max()
        .unwrap_or(0)
}

/// Σ delay / n over the session's destinations, exactly.
pub fn average_delay(
    forest: &LightForest,
    session: &MulticastSession,
) -> Result<Ratio<u64>, MetricsError> {
    let (sum, n) = delay_sum(forest, session)?;
    Ok(Ratio::new(sum, n))
}

fn delay_sum(forest: &LightForest, session: &MulticastSession) -> Result<(u64, u64), MetricsError> {
    let mut sum = 0u64;
    for &d in session.destinations() {
        sum += forest.delay(d).ok_or(MetricsError::Unserved(d))? as u64;
    }
    Ok((sum, session.len() as u64))
}

/// Most trees (wavelengths) sharing one fiber.
pub fn link_stress(forest: &LightForest) -> u32 {
    let mut load: BTreeMap<(NodeId, NodeId), u32> = BTreeMap::new();
    for tree in forest.trees() {
        for (u, v) in tree.edges() {
            *load.entry((u.min(v), u.max(v))).or_default() += 1;
        }
    }
    load.values().copied().max().unwrap_or(0)
}

/// Wavelength channels used: edges summed over every tree.
pub fn total_cost(forest: &LightForest) -> u32 {
    forest.trees().iter().map(|t| t.edge_count() as u32).sum()
}

/// The four evaluation metrics for one routed session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MetricsReport {
    pub diameter: u32,
    /// Sum of per-destination hop delays.
    pub delay_sum: u64,
    pub destinations: u64,
    pub link_stress: u32,
    pub total_cost: u32,
    pub num_trees: u32,
}

impl MetricsReport {
    pub fn compute(forest: &LightForest, session: &MulticastSession) -> Result<Self, MetricsError> {
        let (delay_sum, destinations) = delay_sum(forest, session)?;
        Ok(MetricsReport {
            diameter: diameter(forest),
            delay_sum,
            destinations,
            link_stress: link_stress(forest),
            total_cost: total_cost(forest),
            num_trees: forest.len() as u32,
        })
    }

    pub fn average_delay(&self) -> Ratio<u64> {
        Ratio::new(self.delay_sum, self.destinations.max(1))
    }

    pub fn average_delay_f64(&self) -> f64 {
        self.delay_sum as f64 / self.destinations.max(1) as f64
    }

    /// Checks avg delay ≤ diameter ≤ cost and stress ≤ trees.
    pub fn is_consistent(&self) -> bool {
        self.average_delay() <= Ratio::from_integer(self.diameter as u64)
            && self.diameter <= self.total_cost
            && self.link_stress <= self.num_trees
    }
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let avg = self.average_delay();
        writeln!(f, "diameter       {}", self.diameter)?;
        writeln!(
            f,
            "average delay  {}/{} ({})",
            avg.numer(),
            avg.denom(),
            format_sig6(self.average_delay_f64())
        )?;
        writeln!(f, "link stress    {}", self.link_stress)?;
        writeln!(f, "total cost     {}", self.total_cost)?;
        write!(f, "trees          {}", self.num_trees)
    }
}

/// JSON shape of a [`MetricsReport`].
#[derive(Debug, Clone, Serialize)]
pub struct MetricsJson {
    pub diameter: u32,
    pub average_delay: String,
    pub average_delay_num: u64,
    pub average_delay_den: u64,
    pub average_delay_decimal: f64,
    pub link_stress: u32,
    pub total_cost: u32,
    pub num_trees: u32,
}

impl From<&MetricsReport> for MetricsJson {
    fn from(r: &MetricsReport) -> Self {
        let avg = r.average_delay();
        MetricsJson {
            diameter: r.diameter,
            average_delay: format!("{}/{}", avg.numer(), avg.denom()),
            average_delay_num: *avg.numer(),
            average_delay_den: *avg.denom(),
            average_delay_decimal: r.average_delay_f64(),
            link_stress: r.link_stress,
            total_cost: r.total_cost,
            num_trees: r.num_trees,
        }
    }
}

/// Member-Only minus Distance-Priority, absolute and relative to Member-Only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reductions {
    pub diameter: i64,
    pub average_delay: Ratio<i64>,
    pub relative_diameter: f64,
    pub relative_average_delay: f64,
}

pub fn reductions(mo: &MetricsReport, dp: &MetricsReport) -> Reductions {
    let to_signed = |r: Ratio<u64>| Ratio::new(*r.numer() as i64, *r.denom() as i64);
    let mo_avg = to_signed(mo.average_delay());
    let dp_avg = to_signed(dp.average_delay());
    let diameter = mo.diameter as i64 - dp.diameter as i64;
    let average_delay = mo_avg - dp_avg;
    Reductions {
        diameter,
        average_delay,
        relative_diameter: relative(diameter as f64, mo.diameter as f64),
        relative_average_delay: relative(ratio_f64(average_delay), ratio_f64(mo_avg)),
    }
}

pub(crate) fn relative(reduction: f64, base: f64) -> f64 {
    if base == 0.0 {
        0.0
    } else {
        reduction / base
    }
}

fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Renders `x` with six significant digits, keeping trailing zeros.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".to_string() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{:.5e}", x);
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // Rounding can carry into a new digit (9.999995 -> 10.00000).
    let digits = s.chars().filter(char::is_ascii_digit).count();
    let leading_zeros = s
        .trim_start_matches('-')
        .chars()
        .take_while(|&c| c == '0' || c == '.')
        .filter(|&c| c == '0')
        .count();
    if digits - leading_zeros > 6 && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::route_distance_priority;
    use crate::splitting::{CapabilityMap, LightTree};
    use crate::topology::{parse_topology, Topology};

    const F1: &str = "nodes 6\nedge 1 2\nedge 2 3\nedge 3 4\nedge 2 5\nedge 5 6\nedge 4 6";
    const F2: &str = "nodes 6\nedge 1 2\nedge 2 3\nedge 3 4\nedge 2 5\nedge 5 6";

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    #[test]
    fn f1_distance_priority_metrics() {
        let topo = parse_topology(F1).unwrap();
        let caps = CapabilityMap::with_capable(&topo, [n(1)]).unwrap();
        let session = MulticastSession::new(&topo, n(1), [n(4), n(5), n(6)]).unwrap();
        let forest = route_distance_priority(&topo, &caps, &session).unwrap();
        assert_eq!(diameter(&forest), 4);
        assert_eq!(average_delay(&forest, &session), Ok(Ratio::new(9, 3)));
        assert_eq!(average_delay(&forest, &session), Ok(Ratio::from_integer(3)));
        assert_eq!(link_stress(&forest), 1);
        assert_eq!(total_cost(&forest), 4);
        let r = MetricsReport::compute(&forest, &session).unwrap();
        assert!(r.is_consistent());
        assert_eq!(r.delay_sum, 9);
    }

    #[test]
    fn f2_forest_metrics() {
        let topo = parse_topology(F2).unwrap();
        let caps = CapabilityMap::all_incapable(&topo);
        let session = MulticastSession::new(&topo, n(1), [n(4), n(5)]).unwrap();
        let forest = route_distance_priority(&topo, &caps, &session).unwrap();
        assert_eq!(link_stress(&forest), 2);
        assert_eq!(total_cost(&forest), 5);
        let r = MetricsReport::compute(&forest, &session).unwrap();
        assert_eq!(r.num_trees, 2);
        assert!(r.is_consistent());
    }

    #[test]
    fn star_and_single_destination() {
        let topo = Topology::new(4, [(1, 2), (1, 3), (1, 4)]).unwrap();
        let caps = CapabilityMap::all_capable(&topo);
        let session = MulticastSession::new(&topo, n(1), [n(2), n(3), n(4)]).unwrap();
        let forest = route_distance_priority(&topo, &caps, &session).unwrap();
        assert_eq!(average_delay(&forest, &session), Ok(Ratio::from_integer(1)));
        assert_eq!(diameter(&forest), 1);
        assert_eq!(link_stress(&forest), 1);
    }

    #[test]
    fn unserved_destination_is_an_error() {
        let topo = parse_topology(F1).unwrap();
        let session = MulticastSession::new(&topo, n(1), [n(2), n(3)]).unwrap();
        let tree = LightTree::from_edges(6, n(1), &[(n(1), n(2))], &[n(2)]).unwrap();
        let forest = LightForest::new(n(1), vec![tree]);
        assert_eq!(average_delay(&forest, &session), Err(MetricsError::Unserved(n(3))));
    }

    #[test]
    fn worked_example_reductions() {
        let mo = MetricsReport {
            diameter: 8,
            delay_sum: 38,
            destinations: 11,
            link_stress: 1,
            total_cost: 11,
            num_trees: 1,
        };
        let dp = MetricsReport { diameter: 5, delay_sum: 27, ..mo };
        let r = reductions(&mo, &dp);
        assert_eq!(r.diameter, 3);
        assert_eq!(r.average_delay, Ratio::from_integer(1));
        assert!((r.relative_diameter - 3.0 / 8.0).abs() < 1e-12);
        assert!((r.relative_average_delay - 11.0 / 38.0).abs() < 1e-12);

        let same = reductions(&mo, &mo);
        assert_eq!(same.diameter, 0);
        assert_eq!(same.average_delay, Ratio::from_integer(0));
        assert_eq!(same.relative_diameter, 0.0);
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_sig6(38.0 / 11.0), "3.45455");
        assert_eq!(format_sig6(27.0 / 11.0), "2.45455");
        assert_eq!(format_sig6(3.0), "3.00000");
        assert_eq!(format_sig6(13.1786), "13.1786");
        assert_eq!(format_sig6(0.25), "0.250000");
        assert_eq!(format_sig6(9.999999), "10.0000");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(-1.5), "-1.50000");
    }
}
