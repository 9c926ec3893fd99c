use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lightree::dot::from_dot;
use lightree::harness::{read_rows, RESULT_HEADER};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn lightree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lightree")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn route_prints_metrics() {
    let topo = data("nsf.topo");
    let out = lightree(&[
        "route", "--topology", topo.to_str().unwrap(), "--source", "2",
        "--members", "1,2,3,4,5,6,7,8,9,10,11,12", "--mc", "2", "--algo", "dp", "--json",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["diameter"], 5);
    assert_eq!(json["average_delay"], "27/11");
    assert_eq!(json["total_cost"], 11);
    assert_eq!(json["link_stress"], 1);
}

#[test]
fn route_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("forest.dot");
    let topo = data("cost239.topo");
    let out = lightree(&[
        "route", "--topology", topo.to_str().unwrap(), "--source", "1",
        "--members", "6,9,11", "--mc", "none", "--algo", "mo", "--dot", dot.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("diameter"));
    let forest = from_dot(&std::fs::read_to_string(&dot).unwrap(), 11).unwrap();
    assert_eq!(forest.served().len(), 3);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.topo");
    std::fs::write(&broken, "nodes 3\nedge 1 9\n").unwrap();
    let split = dir.path().join("split.topo");
    std::fs::write(&split, "nodes 4\nedge 1 2\nedge 3 4\n").unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let out = lightree(&["route", "--topology", &s(&broken), "--source", "1", "--members", "2"]);
    assert_eq!(code(&out), 2);

    let out = lightree(&["route", "--topology", &s(&split), "--source", "1", "--members", "2,4"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unreachable"));

    let csv = dir.path().join("x.csv");
    let out = lightree(&[
        "experiment", "--topology", &s(&split), "--group-sizes", "2", "--mc-counts", "0",
        "--seed", "1", "--out", &s(&csv),
    ]);
    assert_eq!(code(&out), 3);

    assert_eq!(code(&lightree(&["route", "--topology", &s(&split)])), 1);
    assert_eq!(code(&lightree(&["frobnicate"])), 1);
    let out = lightree(&[
        "route", "--topology", &s(&data("nsf.topo")), "--source", "1", "--members", "99",
    ]);
    assert_eq!(code(&out), 1);
    assert_eq!(code(&lightree(&["--help"])), 0);
}

#[test]
fn experiment_and_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let summary = dir.path().join("summary.csv");
    let topo = data("cost239.topo");
    let out = lightree(&[
        "experiment", "--topology", topo.to_str().unwrap(), "--sessions-per-source", "2",
        "--group-sizes", "4,11", "--mc-counts", "3", "--seed", "5", "--out", rows.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&rows).unwrap();
    assert_eq!(text.lines().next().unwrap(), RESULT_HEADER.join(","));
    let parsed = read_rows(text.as_bytes()).unwrap();
    assert_eq!(parsed.len(), 2 * 2 * 11 * 2);

    let out = lightree(&[
        "summarize", "--in", rows.to_str().unwrap(), "--out", summary.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let text = std::fs::read_to_string(&summary).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().nth(1).unwrap().starts_with("cost239,4,3,22,"));
}

#[test]
fn single_source_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let rows = dir.path().join("rows.csv");
    let out = lightree(&[
        "experiment", "--topology", data("longhaul.topo").to_str().unwrap(),
        "--sessions-per-source", "1", "--sources", "5", "--group-sizes", "28",
        "--mc-counts", "4", "--algos", "dp", "--seed", "0", "--out", rows.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = read_rows(std::fs::File::open(&rows).unwrap()).unwrap();
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].source, 5);
}
