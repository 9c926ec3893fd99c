//! `lightree` command line: route one session, run a seeded sweep, or
//! summarize a results file.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 topology parse error,
//! 3 unreachable destination or disconnected topology.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lightree::dot::to_dot;
use lightree::harness::{self, ExperimentConfig, HarnessError};
use lightree::metrics::MetricsJson;
use lightree::topology::TopologyError;
use lightree::{route, Algorithm, CapabilityMap, MetricsReport, MulticastSession, NodeId, RouteError, Topology};

#[derive(Parser)]
#[command(name = "lightree", version)]
#[command(about = "Multicast light-tree routing under sparse light splitting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route a single session and print its metrics
    Route {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long)]
        source: u32,
        /// Session members; the source may be listed and is ignored
        #[arg(long, value_delimiter = ',', required = true)]
        members: Vec<u32>,
        /// MC nodes: comma-separated ids, `all`, or `none`
        #[arg(long, default_value = "none")]
        mc: String,
        #[arg(long, default_value = "dp")]
        algo: Algorithm,
        /// Write the forest as Graphviz
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run a seeded sweep and write one CSV row per algorithm and instance
    Experiment {
        #[arg(long)]
        topology: PathBuf,
        #[arg(long, default_value_t = 100)]
        sessions_per_source: usize,
        /// Member counts, source included
        #[arg(long, value_delimiter = ',', required = true)]
        group_sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        mc_counts: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "dp,mo")]
        algos: Vec<Algorithm>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (1 runs single-threaded)
        #[arg(long)]
        threads: Option<usize>,
        /// Restrict sources instead of cycling through every node
        #[arg(long, value_delimiter = ',')]
        sources: Option<Vec<u32>>,
    },
    /// Per-point means and MO-DP reductions from an experiment CSV
    Summarize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// An error tagged with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: 1, message: message.to_string() }
    }

    fn unreachable(message: impl ToString) -> Self {
        Failure { code: 3, message: message.to_string() }
    }
}

impl From<TopologyError> for Failure {
    fn from(e: TopologyError) -> Self {
        let code = match e {
            TopologyError::Io { .. } => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<RouteError> for Failure {
    fn from(e: RouteError) -> Self {
        match e {
            RouteError::Unreachable(_) => Failure::unreachable(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match &e {
            HarnessError::Disconnected(_)
            | HarnessError::Route { source: RouteError::Unreachable(_), .. } => Failure::unreachable(e),
            _ => Failure::usage(e),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

fn node_ids(topo: &Topology, ids: &[u32]) -> Result<Vec<NodeId>, Failure> {
    ids.iter()
        .map(|&id| {
            if id >= 1 && (id as usize) <= topo.node_count() {
                Ok(NodeId::new(id))
            } else {
                Err(Failure::usage(format!("node {id} not in topology")))
            }
        })
        .collect()
}

fn parse_caps(topo: &Topology, spec: &str) -> Result<CapabilityMap, Failure> {
    match spec.trim() {
        "all" => Ok(CapabilityMap::all_capable(topo)),
        "none" | "" => Ok(CapabilityMap::all_incapable(topo)),
        list => {
            let ids = list
                .split(',')
                .map(|t| t.trim().parse::<u32>().map_err(|_| Failure::usage(format!("bad --mc entry `{t}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let nodes = node_ids(topo, &ids)?;
            CapabilityMap::with_capable(topo, nodes).map_err(Failure::usage)
        }
    }
}

fn run_route(
    topology: PathBuf,
    source: u32,
    members: Vec<u32>,
    mc: String,
    algo: Algorithm,
    dot: Option<PathBuf>,
    json: bool,
) -> Result<(), Failure> {
    let topo = Topology::load(&topology)?;
    let source = node_ids(&topo, &[source])?[0];
    let mut dests = node_ids(&topo, &members)?;
    dests.retain(|&d| d != source);
    let session = MulticastSession::new(&topo, source, dests).map_err(Failure::usage)?;
    let caps = parse_caps(&topo, &mc)?;
    let forest = route(algo, &topo, &caps, &session)?;
    let report = MetricsReport::compute(&forest, &session).map_err(Failure::usage)?;
    if let Some(path) = dot {
        std::fs::write(&path, to_dot(&forest, &caps))?;
    }
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if json {
        let body = serde_json::to_string_pretty(&MetricsJson::from(&report)).map_err(Failure::usage)?;
        writeln!(out, "{body}")?;
    } else {
        writeln!(out, "algorithm      {algo}")?;
        writeln!(out, "{report}")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Route { topology, source, members, mc, algo, dot, json } => {
            run_route(topology, source, members, mc, algo, dot, json)
        }
        Command::Experiment {
            topology,
            sessions_per_source,
            group_sizes,
            mc_counts,
            algos,
            seed,
            out,
            threads,
            sources,
        } => {
            let topo = Topology::load(&topology)?;
            let sources = sources.map(|s| node_ids(&topo, &s)).transpose()?;
            let config = ExperimentConfig {
                algorithms: algos,
                sessions_per_source,
                group_sizes,
                mc_counts,
                seed,
                sources,
                threads,
            };
            let rows = harness::run_experiment(&topo, &config)?;
            let file = File::create(&out)?;
            harness::write_rows(BufWriter::new(file), &rows)?;
            eprintln!("wrote {} rows to {}", rows.len(), out.display());
            Ok(())
        }
        Command::Summarize { input, out } => {
            let rows = harness::read_rows(BufReader::new(File::open(&input)?))?;
            let summary = harness::summarize(&rows)?;
            harness::write_summary(BufWriter::new(File::create(&out)?), &summary)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
