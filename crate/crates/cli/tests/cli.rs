//! The `roadmarkov` binary end to end: exit codes, files and JSON output.

use roadmarkov::estimate::corpus::write_corpus;
use roadmarkov::road_graph::text::{graph_to_string, read_graph};
use roadmarkov::toy;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn roadmarkov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_roadmarkov")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../ingest/tests/fixtures").join(name)
}

/// Toy graph and corpus files in a fresh directory.
fn toy_files() -> (TempDir, String, String) {
    let dir = TempDir::new().unwrap();
    let g = toy::network();
    let graph = dir.path().join("toy.txt");
    fs::write(&graph, graph_to_string(&g)).unwrap();
    let corpus = dir.path().join("toy.corpus");
    write_corpus(&toy::corpus(), &g, fs::File::create(&corpus).unwrap()).unwrap();
    let s = |p: &Path| p.to_str().unwrap().to_string();
    (dir, s(&graph), s(&corpus))
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

#[test]
fn toy_checks_pass_and_can_fail() {
    let o = roadmarkov(&["toy"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("23 of 23 checks passed"));

    let o = roadmarkov(&["toy", "--perturb", "n-eff"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL n-eff"));

    let o = roadmarkov(&["--json", "toy"]);
    let v = stdout_json(&o);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 23);
}

#[test]
fn usage_errors_exit_two_with_json_on_stderr() {
    let o = roadmarkov(&["--json", "toy", "--perturb", "nope"]);
    assert_eq!(code(&o), 2);
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "usage");
    assert_eq!(err["exit_code"], 2);
    assert!(o.stdout.is_empty());

    assert_eq!(code(&roadmarkov(&["estimate", "--no-such-flag"])), 2);
    assert_eq!(code(&roadmarkov(&["--help"])), 0);
}

#[test]
fn build_graph_from_osm() {
    let out = TempDir::new().unwrap();
    let osm = fixture("two_ways.osm");
    let o = roadmarkov(&["--json", "build-graph", "--osm", osm.to_str().unwrap(), "--out", &path(&out, "")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g = read_graph(fs::read(out.path().join("graph.txt")).unwrap().as_slice()).unwrap();
    assert_eq!((g.external_ids().len(), g.edges().len()), (6, 10));
    for f in ["degree-vertex-in.csv", "degree-edge-out.csv", "way_names.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }

    // re-exporting the graph file reproduces it byte for byte
    let again = TempDir::new().unwrap();
    let graph = path(&out, "graph.txt");
    assert_eq!(code(&roadmarkov(&["build-graph", "--graph", &graph, "--out", &path(&again, "")])), 0);
    assert_eq!(fs::read(&graph).unwrap(), fs::read(again.path().join("graph.txt")).unwrap());

    let o = roadmarkov(&["build-graph", "--osm", osm.to_str().unwrap(), "--bbox=-9.0,40.0,-8.9,40.1", "--out", &path(&out, "x")]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn match_fixture_trips() {
    let dir = TempDir::new().unwrap();
    let osm = fixture("two_ways.osm");
    assert_eq!(code(&roadmarkov(&["build-graph", "--osm", osm.to_str().unwrap(), "--out", &path(&dir, "")])), 0);
    let corpus = path(&dir, "trips.corpus");
    let ttp = fixture("trips.csv");
    let o = roadmarkov(&[
        "match", "--ttp", ttp.to_str().unwrap(), "--graph", &path(&dir, "graph.txt"),
        "--window", "08:00-09:00", "--out", &corpus,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&corpus).unwrap();
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty()).count(), 2, "{text}");
}

#[test]
fn estimate_toy_corpus() {
    let (dir, graph, corpus) = toy_files();
    for method in ["wls", "ml", "naive"] {
        let out = path(&dir, method);
        let o = roadmarkov(&["estimate", "--graph", &graph, "--corpus", &corpus, "--method", method, "--out", &out]);
        assert_eq!(code(&o), 0, "{method}: {}", String::from_utf8_lossy(&o.stderr));
        let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join(method).join("report.json")).unwrap()).unwrap();
        assert_eq!(report["n_eff"].as_f64(), Some(2350.0), "{method}");
        assert_eq!(report["skipped_trajectories"], 0);
        assert_eq!(Path::new(&out).join("kernel.txt").exists(), method != "naive");
    }
}

#[test]
fn off_graph_transitions_are_skipped_not_fatal() {
    let (dir, graph, corpus) = toy_files();
    // 1 → 3 is not a road
    let mut text = fs::read_to_string(&corpus).unwrap();
    text.push_str("1 3 4 | 7\n");
    fs::write(&corpus, text).unwrap();
    let o = roadmarkov(&["--json", "estimate", "--graph", &graph, "--corpus", &corpus, "--out", &path(&dir, "e")]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("e/report.json")).unwrap()).unwrap();
    assert_eq!(report["skipped_trajectories"], 7);
    assert_eq!(report["n_eff"].as_f64(), Some(2350.0));
}

#[test]
fn simulate_is_reproducible() {
    let (dir, graph, _) = toy_files();
    assert_eq!(code(&roadmarkov(&["simulate", "--graph", &graph, "-k", "0", "--seed", "1", "--out", &path(&dir, "z")])), 2);

    let run = |name: &str| {
        let out = path(&dir, name);
        let o = roadmarkov(&["simulate", "--graph", &graph, "--init", "2:1000", "--steps", "60", "--seed", "9", "--out", &out]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        (fs::read(Path::new(&out).join("counts.csv")).unwrap(), fs::read(Path::new(&out).join("chi2.csv")).unwrap())
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let chi2 = String::from_utf8(a.1).unwrap();
    assert_eq!(chi2.lines().count(), 62, "header plus steps 0..=60");
    // every walker starts on vertex 2
    assert_eq!(String::from_utf8(a.0).unwrap().lines().nth(1), Some("0,2,1000"));
}

#[test]
fn benchmark_single_rep() {
    let dir = TempDir::new().unwrap();
    let out = path(&dir, "bench.csv");
    let o = roadmarkov(&["--json", "benchmark", "--toy", "-k", "100,200", "-n", "3", "--reps", "1", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["cells"].as_array().unwrap().len(), 2);
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("k,n,method,mean_bias,sd_bias"));
    assert_eq!(csv.lines().count(), 5);
    assert_eq!(code(&roadmarkov(&["benchmark", "--toy", "--reps", "0"])), 2);
}

#[test]
fn config_file_sits_between_defaults_and_flags() {
    let (dir, graph, _) = toy_files();
    let config = path(&dir, "run.conf");
    fs::write(&config, "# shared settings\nseed = 5\nsteps = 12\nmethod = ml\n").unwrap();
    let summary = |extra: &[&str]| {
        let mut args = vec!["--json", "--config", &config, "simulate", "--graph", &graph, "-k", "50", "--out"];
        let out = path(&dir, "cfg");
        args.push(&out);
        args.extend_from_slice(extra);
        let o = roadmarkov(&args);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        stdout_json(&o)
    };
    let v = summary(&[]);
    assert_eq!((v["seed"].as_u64(), v["steps"].as_u64()), (Some(5), Some(12)));
    let v = summary(&["--seed", "8"]);
    assert_eq!((v["seed"].as_u64(), v["steps"].as_u64()), (Some(8), Some(12)));

    fs::write(&config, "colour = blue\n").unwrap();
    assert_eq!(code(&roadmarkov(&["--config", &config, "toy"])), 2);
}

#[test]
fn stats_on_toy_corpus() {
    let (_dir, graph, corpus) = toy_files();
    let o = roadmarkov(&["--json", "stats", "--graph", &graph, "--corpus", &corpus]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["positions"], 3350);
    assert_eq!(v["transitions"], 2350);
    assert_eq!(v["s_minus_e_abs_sum"], 600);
}
