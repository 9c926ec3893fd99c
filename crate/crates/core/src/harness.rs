//! Seeded experiment driver: random sessions and capability draws, batch
//! routing with every configured heuristic, CSV rows and per-point summaries.
//!
//! Randomness comes from ChaCha8. Each instance, identified by
//! `(group_size, mc_count, source, session)`, gets its own ChaCha stream keyed
//! by the experiment seed, so instances can be evaluated in any order or in
//! parallel without perturbing each other's draws. Within an instance the
//! session is drawn first, the capability map second.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::metrics::{format_sig6, relative, MetricsReport};
use crate::routing::{route, Algorithm, RouteError};
use crate::splitting::{validate_forest, CapabilityMap, MulticastSession};
use crate::topology::{NodeId, Topology};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("topology is disconnected: components {0:?}")]
    Disconnected(Vec<Vec<NodeId>>),
    #[error("{algorithm} on {key}: {source}")]
    Route {
        key: InstanceKey,
        algorithm: Algorithm,
        source: RouteError,
    },
    #[error("{algorithm} on {key} produced an invalid forest: {report}")]
    InvalidForest {
        key: InstanceKey,
        algorithm: Algorithm,
        report: String,
    },
    #[error("unpaired rows at group_size {group_size}, mc_count {mc_count}: {detail}")]
    Unpaired {
        group_size: usize,
        mc_count: usize,
        detail: String,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Identity of one generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstanceKey {
    pub group_size: usize,
    pub mc_count: usize,
    pub source: NodeId,
    pub session: usize,
}

impl std::fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "group {} / mc {} / source {} / session {}",
            self.group_size, self.mc_count, self.source, self.session
        )
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// ChaCha stream number for an instance: a SplitMix64 fold of its key.
pub fn stream_id(key: &InstanceKey) -> u64 {
    [
        key.group_size as u64,
        key.mc_count as u64,
        key.source.get() as u64,
        key.session as u64,
    ]
    .into_iter()
    .fold(0, |acc, x| splitmix64(acc ^ x))
}

/// The independent generator for one instance.
pub fn instance_rng(seed: u64, key: &InstanceKey) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id(key));
    rng
}

/// Uniform random `(group_size - 1)`-subset of the non-source nodes.
pub fn generate_session<R: Rng + ?Sized>(
    rng: &mut R,
    topo: &Topology,
    source: NodeId,
    group_size: usize,
) -> Result<MulticastSession, HarnessError> {
    let n = topo.node_count();
    if group_size < 2 || group_size > n {
        return Err(HarnessError::Config(format!(
            "group size {group_size} outside 2..={n}"
        )));
    }
    if !topo.contains(source) {
        return Err(HarnessError::Config(format!("source {source} not in topology")));
    }
    let others: Vec<NodeId> = topo.nodes().filter(|&v| v != source).collect();
    let picks = sample(rng, others.len(), group_size - 1);
    MulticastSession::new(topo, source, picks.into_iter().map(|i| others[i]))
        .map_err(|e| HarnessError::Config(e.to_string()))
}

/// Uniform random `mc_count`-subset of nodes flagged MC.
pub fn generate_capabilities<R: Rng + ?Sized>(
    rng: &mut R,
    topo: &Topology,
    mc_count: usize,
) -> Result<CapabilityMap, HarnessError> {
    let n = topo.node_count();
    if mc_count > n {
        return Err(HarnessError::Config(format!("mc count {mc_count} outside 0..={n}")));
    }
    let picks = sample(rng, n, mc_count);
    CapabilityMap::with_capable(topo, picks.into_iter().map(NodeId::from_index))
        .map_err(|e| HarnessError::Config(e.to_string()))
}

/// One generated (session, capabilities) pair shared by every algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub key: InstanceKey,
    pub session: MulticastSession,
    pub caps: CapabilityMap,
}

pub fn draw_instance(topo: &Topology, seed: u64, key: InstanceKey) -> Result<Instance, HarnessError> {
    let mut rng = instance_rng(seed, &key);
    let session = generate_session(&mut rng, topo, key.source, key.group_size)?;
    let caps = generate_capabilities(&mut rng, topo, key.mc_count)?;
    Ok(Instance { key, session, caps })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    pub algorithms: Vec<Algorithm>,
    pub sessions_per_source: usize,
    /// Members per session, source included.
    pub group_sizes: Vec<usize>,
    pub mc_counts: Vec<usize>,
    pub seed: u64,
    /// Restrict sources; `None` uses every node in turn.
    pub sources: Option<Vec<NodeId>>,
    /// Worker threads; `None` lets rayon decide, `Some(1)` runs inline.
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algorithms: Algorithm::ALL.to_vec(),
            sessions_per_source: 100,
            group_sizes: Vec::new(),
            mc_counts: Vec::new(),
            seed: 0,
            sources: None,
            threads: None,
        }
    }
}

impl ExperimentConfig {
    fn normalized(&self, topo: &Topology) -> Result<ExperimentConfig, HarnessError> {
        let n = topo.node_count();
        let mut cfg = self.clone();
        let sort_dedup = |v: &mut Vec<usize>| {
            v.sort_unstable();
            v.dedup();
        };
        sort_dedup(&mut cfg.group_sizes);
        sort_dedup(&mut cfg.mc_counts);
        cfg.algorithms.sort_by_key(|a| a.name());
        cfg.algorithms.dedup();
        if cfg.algorithms.is_empty() || cfg.group_sizes.is_empty() || cfg.mc_counts.is_empty() {
            return Err(HarnessError::Config(
                "need at least one algorithm, group size and mc count".to_string(),
            ));
        }
        if let Some(&g) = cfg.group_sizes.iter().find(|&&g| g < 2 || g > n) {
            return Err(HarnessError::Config(format!("group size {g} outside 2..={n}")));
        }
        if let Some(&m) = cfg.mc_counts.iter().find(|&&m| m > n) {
            return Err(HarnessError::Config(format!("mc count {m} outside 0..={n}")));
        }
        if let Some(sources) = &mut cfg.sources {
            sources.sort_unstable();
            sources.dedup();
            if let Some(s) = sources.iter().find(|s| !topo.contains(**s)) {
                return Err(HarnessError::Config(format!("source {s} not in topology")));
            }
        }
        Ok(cfg)
    }

    /// Instance keys in output order.
    pub fn keys(&self, topo: &Topology) -> Result<Vec<InstanceKey>, HarnessError> {
        let cfg = self.normalized(topo)?;
        let sources: Vec<NodeId> = cfg.sources.clone().unwrap_or_else(|| topo.nodes().collect());
        let mut keys = Vec::new();
        for &group_size in &cfg.group_sizes {
            for &mc_count in &cfg.mc_counts {
                for &source in &sources {
                    for session in 0..cfg.sessions_per_source {
                        keys.push(InstanceKey {
                            group_size,
                            mc_count,
                            source,
                            session,
                        });
                    }
                }
            }
        }
        Ok(keys)
    }
}

fn serialize_sig6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_sig6(*x))
}

/// One CSV line: an algorithm's metrics on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub topology: String,
    pub algorithm: Algorithm,
    pub source: u32,
    pub session: usize,
    pub group_size: usize,
    pub mc_count: usize,
    pub seed: u64,
    pub diameter: u32,
    #[serde(serialize_with = "serialize_sig6")]
    pub avg_delay: f64,
    pub avg_delay_num: u64,
    pub avg_delay_den: u64,
    pub link_stress: u32,
    pub total_cost: u32,
    pub num_trees: u32,
}

impl ResultRow {
    fn new(topo: &Topology, algorithm: Algorithm, seed: u64, key: &InstanceKey, m: &MetricsReport) -> Self {
        let avg = m.average_delay();
        ResultRow {
            topology: topo.name().to_string(),
            algorithm,
            source: key.source.get(),
            session: key.session,
            group_size: key.group_size,
            mc_count: key.mc_count,
            seed,
            diameter: m.diameter,
            avg_delay: m.average_delay_f64(),
            avg_delay_num: *avg.numer(),
            avg_delay_den: *avg.denom(),
            link_stress: m.link_stress,
            total_cost: m.total_cost,
            num_trees: m.num_trees,
        }
    }

    fn exact_avg_delay(&self) -> f64 {
        self.avg_delay_num as f64 / self.avg_delay_den.max(1) as f64
    }
}

/// Routes one instance with each algorithm, validating every forest.
pub fn evaluate_instance(
    topo: &Topology,
    instance: &Instance,
    algorithms: &[Algorithm],
) -> Result<Vec<(Algorithm, MetricsReport)>, HarnessError> {
    let mut out = Vec::with_capacity(algorithms.len());
    for &algorithm in algorithms {
        let forest = route(algorithm, topo, &instance.caps, &instance.session).map_err(|source| {
            HarnessError::Route {
                key: instance.key,
                algorithm,
                source,
            }
        })?;
        let report = validate_forest(&forest, topo, &instance.caps, &instance.session);
        if !report.is_ok() {
            return Err(HarnessError::InvalidForest {
                key: instance.key,
                algorithm,
                report: report.to_string(),
            });
        }
        let metrics = MetricsReport::compute(&forest, &instance.session)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        out.push((algorithm, metrics));
    }
    Ok(out)
}

/// Runs the full sweep; rows come back in
/// (group_size, mc_count, source, session, algorithm) order.
pub fn run_experiment(topo: &Topology, config: &ExperimentConfig) -> Result<Vec<ResultRow>, HarnessError> {
    let cfg = config.normalized(topo)?;
    let components = topo.components();
    if components.len() > 1 {
        return Err(HarnessError::Disconnected(components));
    }
    let keys = cfg.keys(topo)?;
    let one = |key: &InstanceKey| -> Result<Vec<ResultRow>, HarnessError> {
        let instance = draw_instance(topo, cfg.seed, *key)?;
        Ok(evaluate_instance(topo, &instance, &cfg.algorithms)?
            .iter()
            .map(|(algo, m)| ResultRow::new(topo, *algo, cfg.seed, key, m))
            .collect())
    };
    let chunks: Vec<Vec<ResultRow>> = match cfg.threads {
        Some(1) => keys.iter().map(one).collect::<Result<_, _>>()?,
        threads => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
            pool.install(|| keys.par_iter().map(one).collect::<Result<_, _>>())?
        }
    };
    Ok(chunks.into_iter().flatten().collect())
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

pub fn write_rows<W: Write>(w: W, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let mut out = csv_writer(w);
    if rows.is_empty() {
        out.write_record(RESULT_HEADER)?;
    }
    for row in rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub const RESULT_HEADER: [&str; 14] = [
    "topology",
    "algorithm",
    "source",
    "session",
    "group_size",
    "mc_count",
    "seed",
    "diameter",
    "avg_delay",
    "avg_delay_num",
    "avg_delay_den",
    "link_stress",
    "total_cost",
    "num_trees",
];

pub fn read_rows<R: Read>(r: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(r);
    let rows = rdr.deserialize().collect::<Result<Vec<ResultRow>, _>>()?;
    Ok(rows)
}

/// Mean metrics of one algorithm at one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Means {
    pub diameter: f64,
    pub avg_delay: f64,
    pub link_stress: f64,
    pub total_cost: f64,
    pub num_trees: f64,
}

impl Means {
    fn of(rows: &[&ResultRow]) -> Means {
        let n = rows.len().max(1) as f64;
        let mean = |f: &dyn Fn(&ResultRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / n;
        Means {
            diameter: mean(&|r| r.diameter as f64),
            avg_delay: mean(&|r| r.exact_avg_delay()),
            link_stress: mean(&|r| r.link_stress as f64),
            total_cost: mean(&|r| r.total_cost as f64),
            num_trees: mean(&|r| r.num_trees as f64),
        }
    }
}

/// Member-Only minus Distance-Priority, averaged over paired instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointReductions {
    pub diameter: f64,
    pub avg_delay: f64,
    pub relative_diameter: f64,
    pub relative_avg_delay: f64,
}

/// One sweep point (topology, group size, MC count).
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub topology: String,
    pub group_size: usize,
    pub mc_count: usize,
    pub instances: usize,
    pub dp: Option<Means>,
    pub mo: Option<Means>,
    pub reductions: Option<PointReductions>,
}

type PointKey = (String, usize, usize);

/// Per-point means, plus reductions wherever both algorithms ran.
pub fn summarize(rows: &[ResultRow]) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut points: BTreeMap<PointKey, BTreeMap<Algorithm, Vec<&ResultRow>>> = BTreeMap::new();
    for row in rows {
        points
            .entry((row.topology.clone(), row.group_size, row.mc_count))
            .or_default()
            .entry(row.algorithm)
            .or_default()
            .push(row);
    }
    let mut out = Vec::with_capacity(points.len());
    for ((topology, group_size, mc_count), by_algo) in points {
        let dp_rows = by_algo.get(&Algorithm::DistancePriority);
        let mo_rows = by_algo.get(&Algorithm::MemberOnly);
        let instances = by_algo.values().map(Vec::len).max().unwrap_or(0);
        let reductions = match (dp_rows, mo_rows) {
            (Some(dp), Some(mo)) => Some(pair_reductions(dp, mo, group_size, mc_count)?),
            _ => None,
        };
        out.push(SummaryRow {
            topology,
            group_size,
            mc_count,
            instances,
            dp: dp_rows.map(|r| Means::of(r)),
            mo: mo_rows.map(|r| Means::of(r)),
            reductions,
        });
    }
    Ok(out)
}

fn pair_reductions(
    dp: &[&ResultRow],
    mo: &[&ResultRow],
    group_size: usize,
    mc_count: usize,
) -> Result<PointReductions, HarnessError> {
    let index = |rows: &[&ResultRow]| -> Result<BTreeMap<(u32, usize, u64), ResultRow>, HarnessError> {
        let mut map = BTreeMap::new();
        for r in rows {
            if map.insert((r.source, r.session, r.seed), (*r).clone()).is_some() {
                return Err(HarnessError::Unpaired {
                    group_size,
                    mc_count,
                    detail: format!("duplicate row for source {} session {}", r.source, r.session),
                });
            }
        }
        Ok(map)
    };
    let dp = index(dp)?;
    let mo = index(mo)?;
    if let Some(k) = dp.keys().find(|k| !mo.contains_key(*k)).or_else(|| mo.keys().find(|k| !dp.contains_key(*k))) {
        return Err(HarnessError::Unpaired {
            group_size,
            mc_count,
            detail: format!("source {} session {} has only one algorithm", k.0, k.1),
        });
    }
    let n = dp.len().max(1) as f64;
    let (mut dd, mut da, mut mo_d, mut mo_a) = (0.0, 0.0, 0.0, 0.0);
    for (k, d) in &dp {
        let m = &mo[k];
        dd += m.diameter as f64 - d.diameter as f64;
        da += m.exact_avg_delay() - d.exact_avg_delay();
        mo_d += m.diameter as f64;
        mo_a += m.exact_avg_delay();
    }
    Ok(PointReductions {
        diameter: dd / n,
        avg_delay: da / n,
        relative_diameter: relative(dd, mo_d),
        relative_avg_delay: relative(da, mo_a),
    })
}

pub const SUMMARY_HEADER: [&str; 18] = [
    "topology",
    "group_size",
    "mc_count",
    "instances",
    "dp_diameter",
    "dp_avg_delay",
    "dp_link_stress",
    "dp_total_cost",
    "dp_num_trees",
    "mo_diameter",
    "mo_avg_delay",
    "mo_link_stress",
    "mo_total_cost",
    "mo_num_trees",
    "diameter_reduction",
    "avg_delay_reduction",
    "rel_diameter_reduction",
    "rel_avg_delay_reduction",
];

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<(), HarnessError> {
    let mut out = csv_writer(w);
    out.write_record(SUMMARY_HEADER)?;
    for row in rows {
        let mut rec = vec![
            row.topology.clone(),
            row.group_size.to_string(),
            row.mc_count.to_string(),
            row.instances.to_string(),
        ];
        for means in [row.dp, row.mo] {
            match means {
                Some(m) => rec.extend(
                    [m.diameter, m.avg_delay, m.link_stress, m.total_cost, m.num_trees]
                        .map(format_sig6),
                ),
                None => rec.extend(std::iter::repeat_n(String::new(), 5)),
            }
        }
        match row.reductions {
            Some(r) => rec.extend(
                [r.diameter, r.avg_delay, r.relative_diameter, r.relative_avg_delay].map(format_sig6),
            ),
            None => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bundled;

    fn n(id: u32) -> NodeId {
        NodeId::new(id)
    }

    #[test]
    fn broadcast_and_pair_sessions() {
        let topo = bundled::cost239();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = generate_session(&mut rng, &topo, n(3), 11).unwrap();
        assert_eq!(s.len(), 10);
        assert!(!s.is_destination(n(3)));
        let s = generate_session(&mut rng, &topo, n(3), 2).unwrap();
        assert_eq!(s.len(), 1);
        assert!(generate_session(&mut rng, &topo, n(3), 1).is_err());
        assert!(generate_session(&mut rng, &topo, n(3), 12).is_err());
    }

    #[test]
    fn capability_extremes() {
        let topo = bundled::cost239();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(generate_capabilities(&mut rng, &topo, 0).unwrap().capable_nodes().is_empty());
        assert_eq!(generate_capabilities(&mut rng, &topo, 11).unwrap().capable_nodes().len(), 11);
        assert!(generate_capabilities(&mut rng, &topo, 12).is_err());
        let a = generate_capabilities(&mut ChaCha8Rng::seed_from_u64(5), &topo, 5).unwrap();
        let b = generate_capabilities(&mut ChaCha8Rng::seed_from_u64(5), &topo, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.capable_nodes().len(), 5);
    }

    #[test]
    fn instance_streams_are_independent_of_order() {
        let topo = bundled::cost239();
        let k1 = InstanceKey { group_size: 4, mc_count: 2, source: n(1), session: 0 };
        let k2 = InstanceKey { session: 1, ..k1 };
        let a = draw_instance(&topo, 42, k1).unwrap();
        let _ = draw_instance(&topo, 42, k2).unwrap();
        assert_eq!(draw_instance(&topo, 42, k1).unwrap(), a);
        assert_ne!(stream_id(&k1), stream_id(&k2));
    }

    #[test]
    fn row_count_and_order() {
        let topo = bundled::cost239();
        let cfg = ExperimentConfig {
            sessions_per_source: 2,
            group_sizes: vec![6, 4],
            mc_counts: vec![3],
            seed: 7,
            threads: Some(1),
            ..Default::default()
        };
        let rows = run_experiment(&topo, &cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 11 * 2);
        let keys: Vec<_> = rows
            .iter()
            .map(|r| (r.group_size, r.mc_count, r.source, r.session, r.algorithm.name()))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(rows[0].algorithm, Algorithm::DistancePriority);
        assert_eq!(rows[1].algorithm, Algorithm::MemberOnly);
    }

    #[test]
    fn disconnected_topology_is_rejected() {
        let topo = Topology::new(4, [(1, 2), (3, 4)]).unwrap();
        let cfg = ExperimentConfig {
            group_sizes: vec![2],
            mc_counts: vec![0],
            ..Default::default()
        };
        assert!(matches!(run_experiment(&topo, &cfg), Err(HarnessError::Disconnected(c)) if c.len() == 2));
    }

    #[test]
    fn config_validation() {
        let topo = bundled::cost239();
        let bad = [
            ExperimentConfig { group_sizes: vec![1], mc_counts: vec![0], ..Default::default() },
            ExperimentConfig { group_sizes: vec![12], mc_counts: vec![0], ..Default::default() },
            ExperimentConfig { group_sizes: vec![4], mc_counts: vec![12], ..Default::default() },
            ExperimentConfig { group_sizes: vec![4], mc_counts: vec![], ..Default::default() },
            ExperimentConfig {
                group_sizes: vec![4],
                mc_counts: vec![1],
                algorithms: vec![],
                ..Default::default()
            },
        ];
        for cfg in bad {
            assert!(matches!(run_experiment(&topo, &cfg), Err(HarnessError::Config(_))), "{cfg:?}");
        }
    }

    fn row(algorithm: Algorithm, source: u32, diameter: u32, num: u64) -> ResultRow {
        ResultRow {
            topology: "t".into(),
            algorithm,
            source,
            session: 0,
            group_size: 4,
            mc_count: 1,
            seed: 0,
            diameter,
            avg_delay: num as f64 / 3.0,
            avg_delay_num: num,
            avg_delay_den: 3,
            link_stress: 1,
            total_cost: 5,
            num_trees: 1,
        }
    }

    #[test]
    fn summary_means_and_reductions() {
        use Algorithm::*;
        let rows = vec![
            row(DistancePriority, 1, 3, 6),
            row(MemberOnly, 1, 4, 9),
            row(DistancePriority, 2, 3, 6),
            row(MemberOnly, 2, 4, 9),
        ];
        let s = summarize(&rows).unwrap();
        assert_eq!(s.len(), 1);
        let dp = s[0].dp.unwrap();
        assert_eq!(dp.diameter, 3.0);
        assert_eq!(dp.avg_delay, 2.0);
        let r = s[0].reductions.unwrap();
        assert_eq!(r.diameter, 1.0);
        assert_eq!(r.avg_delay, 1.0);
        assert_eq!(r.relative_diameter, 0.25);

        let same = vec![row(DistancePriority, 1, 4, 9), row(MemberOnly, 1, 4, 9)];
        let r = summarize(&same).unwrap()[0].reductions.unwrap();
        assert_eq!((r.diameter, r.avg_delay, r.relative_diameter), (0.0, 0.0, 0.0));

        let unpaired = vec![row(DistancePriority, 1, 3, 6), row(MemberOnly, 2, 4, 9)];
        assert!(matches!(summarize(&unpaired), Err(HarnessError::Unpaired { .. })));

        let only_dp = vec![row(DistancePriority, 1, 3, 6)];
        let s = summarize(&only_dp).unwrap();
        assert!(s[0].mo.is_none() && s[0].reductions.is_none());
    }

    #[test]
    fn csv_round_trip_and_format() {
        let rows = vec![row(Algorithm::MemberOnly, 1, 4, 38)];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULT_HEADER.join(","));
        assert_eq!(lines.next().unwrap(), "t,mo,1,0,4,1,0,4,12.6667,38,3,1,5,1");
        assert!(!text.contains('\r'));
        let back = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back[0].avg_delay_num, 38);
        assert_eq!(back[0].algorithm, Algorithm::MemberOnly);
    }
}
