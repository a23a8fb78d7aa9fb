//! End-to-end runs of the `aca` binary on small fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn aca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aca"))
        .args(args)
        .env_remove("ACA_DATA_DIR")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

/// Data rows of one of the run's CSV tables, after the version line.
fn csv_rows(path: &Path) -> (String, Vec<csv::StringRecord>) {
    let text = fs::read_to_string(path).unwrap();
    let (version, body) = text.split_once('\n').unwrap();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let rows = r.records().map(Result::unwrap).collect();
    (version.to_string(), rows)
}

fn small_game(data: &str, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "game",
        "--data",
        data,
        "--targets",
        "2",
        "--budget",
        "4",
        "--seed",
        "9",
        "--out-dir",
        path_str(out),
    ];
    args.extend_from_slice(extra);
    aca(&args)
}

#[test]
fn generate_writes_a_complete_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("er");
    let run = aca(&[
        "generate",
        "--model",
        "er",
        "--n",
        "200",
        "--avg-degree",
        "10",
        "--seed",
        "7",
        "--out-dir",
        path_str(&out),
        "--target-delta",
        "0",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let printed = stdout(&run);
    assert!(
        printed.contains("heterophilicity") && printed.contains("GLRT accuracy"),
        "{printed}"
    );

    let meta = read_json(&out.join("meta.json"));
    assert_eq!(meta["manifest"], "manifest.json");
    let n = meta["node_count"].as_u64().unwrap() as usize;
    let m = meta["edge_count"].as_u64().unwrap() as usize;
    let degree = meta["mean_degree"].as_f64().unwrap();
    assert!((degree - 10.0).abs() < 1.0, "mean degree {degree}");
    assert!(meta["labels"]["achieved_delta"].as_i64().unwrap() <= 0);
    let accuracy = meta["attributes"]["glrt_accuracy"].as_f64().unwrap();
    assert!((accuracy - 0.7).abs() <= 0.05);

    let edges = fs::read_to_string(out.join("graph.edges")).unwrap();
    assert_eq!(edges.lines().filter(|l| !l.starts_with('#')).count(), m);
    let (_, labels) = {
        let mut r = csv::Reader::from_path(out.join("labels.csv")).unwrap();
        let h = r.headers().unwrap().clone();
        (h, r.records().map(Result::unwrap).collect::<Vec<_>>())
    };
    assert_eq!(labels.len(), n);
    let attrs = fs::read(out.join("attrs.bin")).unwrap();
    assert_eq!(&attrs[..4], b"ATTR");
    let rows = u32::from_le_bytes(attrs[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(attrs[8..12].try_into().unwrap()) as usize;
    assert_eq!((rows, cols), (n, 100 + n));
    assert_eq!(attrs.len(), 12 + (rows * cols).div_ceil(8));

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "generate");
    let outputs: Vec<&str> = manifest["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    for f in ["graph.edges", "labels.csv", "attrs.bin", "meta.json"] {
        assert!(outputs.contains(&f));
    }
}

#[test]
fn ring_lattice_split_is_homophilous() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ws");
    let run = aca(&[
        "generate",
        "--model",
        "ws",
        "--beta",
        "0",
        "--n",
        "200",
        "--avg-degree",
        "10",
        "--seed",
        "1",
        "--out-dir",
        path_str(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let h = read_json(&out.join("meta.json"))["labels"]["heterophilicity"]
        .as_f64()
        .unwrap();
    assert!(h < 1.0, "heterophilicity {h}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path());
    let missing_n = aca(&["generate", "--model", "er", "--out-dir", out]);
    assert_eq!(code(&missing_n), 2);

    let league = fixture("league.gml");
    let unknown = aca(&[
        "game",
        "--data",
        path_str(&league),
        "--detectors",
        "louvain,kmeans",
        "--out-dir",
        out,
    ]);
    assert_eq!(code(&unknown), 2);
    let msg = stderr(&unknown);
    for name in ["louvain", "leiden", "cp", "hlc", "umst", "bp-overlap"] {
        assert!(msg.contains(name), "{msg}");
    }
    let unknown_attack = aca(&[
        "game",
        "--data",
        path_str(&league),
        "--attacks",
        "teleport",
        "--out-dir",
        out,
    ]);
    assert_eq!(code(&unknown_attack), 2);
    assert!(stderr(&unknown_attack).contains("ss-nbr"));

    let gated = aca(&[
        "game",
        "--data",
        path_str(&league),
        "--attacks",
        "ss,ss-nbr",
        "--out-dir",
        out,
    ]);
    assert_eq!(code(&gated), 2);
    assert!(stderr(&gated).contains("--capability ss-nbr"));

    let misplaced = aca(&[
        "generate",
        "--model",
        "er",
        "--n",
        "50",
        "--mu",
        "0.2",
        "--out-dir",
        out,
    ]);
    assert_eq!(code(&misplaced), 2);
    let no_source = aca(&["game", "--out-dir", out]);
    assert_eq!(code(&no_source), 2);
}

#[test]
fn missing_data_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let run = Command::new(env!("CARGO_BIN_EXE_aca"))
        .args([
            "game",
            "--data",
            "football",
            "--out-dir",
            path_str(dir.path()),
        ])
        .env("ACA_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("football.gml"));

    let replay = aca(&["replay", path_str(&dir.path().join("manifest.json"))]);
    assert_eq!(code(&replay), 3);
}

#[test]
fn registry_names_resolve_under_the_data_dir() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(fixture("league.gml"), dir.path().join("football.gml")).unwrap();
    let out = dir.path().join("run");
    let run = Command::new(env!("CARGO_BIN_EXE_aca"))
        .args([
            "game",
            "--data",
            "football",
            "--targets",
            "1",
            "--budget",
            "2",
            "--detectors",
            "louvain",
            "--attacks",
            "cl",
            "--out-dir",
            path_str(&out),
        ])
        .env("ACA_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["source"]["kind"], "registry");
    assert_eq!(manifest["config"]["dataset"], "football");
}

#[test]
fn game_curves_cover_the_whole_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = small_game(
        path_str(&fixture("league.gml")),
        &out,
        &["--attack-prob-grid", "0,1/2,1"],
    );
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let (version, rows) = csv_rows(&out.join("curves.csv"));
    assert_eq!(version, "#aca-curves v1 manifest=manifest.json");
    let record = read_json(&out.join("game_record.json"));
    assert_eq!(record["manifest"], "manifest.json");
    let record = &record["record"];
    assert_eq!(record["config"]["budget"], 4);
    let detectors = record["detectors"].as_array().unwrap();
    assert_eq!(detectors.len(), 6);

    // one row per prefix 0..=len of every plan
    let mut expected = 0;
    for d in detectors {
        let targets = d["targets"].as_array().unwrap();
        assert_eq!(targets.len(), 2);
        for t in targets {
            let outcomes = t["outcomes"].as_array().unwrap();
            assert_eq!(outcomes.len(), 5);
            for o in outcomes {
                let len = o["plan"]["edges"].as_array().unwrap().len();
                assert!(len <= 4);
                expected += len + 1;
            }
        }
    }
    assert_eq!(rows.len(), expected);
    let attacks: std::collections::BTreeSet<&str> = rows.iter().map(|r| &r[2]).collect();
    assert_eq!(
        attacks.into_iter().collect::<Vec<_>>(),
        vec!["bih", "cl", "emb", "mod", "ss"]
    );

    let (version, tradeoff) = csv_rows(&out.join("tradeoff.csv"));
    assert!(version.starts_with("#aca-tradeoff v1"));
    assert_eq!(tradeoff.len(), 3 * 6);
    let (_, summary) = csv_rows(&out.join("summary.csv"));
    assert_eq!(summary.len(), 6 * 6);

    let nodes = fs::read_to_string(out.join("nodes.csv")).unwrap();
    assert!(nodes.lines().nth(1).unwrap().starts_with("0,team"));
}

#[test]
fn neighbor_capability_raises_the_budget() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = aca(&[
        "game",
        "--data",
        path_str(&fixture("league.gml")),
        "--targets",
        "1",
        "--detectors",
        "louvain",
        "--attacks",
        "ss",
        "--capability",
        "ss-nbr",
        "--seed",
        "3",
        "--out-dir",
        path_str(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let record = read_json(&out.join("game_record.json"));
    assert_eq!(record["record"]["config"]["budget"], 51);
    let (_, rows) = csv_rows(&out.join("curves.csv"));
    assert!(rows.iter().any(|r| &r[2] == "ss-nbr"));
    let max_prefix = rows
        .iter()
        .filter(|r| &r[2] == "ss-nbr")
        .map(|r| r[4].parse::<usize>().unwrap())
        .max();
    assert!(max_prefix.unwrap() <= 51);
}

#[test]
fn edge_list_with_sibling_labels_uses_the_largest_component() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = small_game(
        path_str(&fixture("ring.edges")),
        &out,
        &["--detectors", "louvain,cp"],
    );
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["raw_node_count"], 34);
    assert_eq!(manifest["config"]["node_count"], 32);
    assert_eq!(manifest["config"]["source"]["kind"], "file");
    assert!(manifest["config"]["source"]["labels"]
        .as_str()
        .unwrap()
        .ends_with("ring.labels.csv"));
    // targets come from single-label structures, so never the pendant pair
    for t in manifest["config"]["game"]["targets"].as_array().unwrap() {
        assert!(t.as_u64().unwrap() < 30);
    }
}

#[test]
fn reruns_are_byte_identical_and_replay_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let run = small_game(
            path_str(&fixture("league.gml")),
            out,
            &["--attack-prob-grid", "0,1"],
        );
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    for f in [
        "curves.csv",
        "summary.csv",
        "tradeoff.csv",
        "game_record.json",
        "graph.edges",
    ] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f} differs"
        );
    }
    let replay = aca(&["replay", path_str(&a.join("manifest.json"))]);
    assert_eq!(code(&replay), 0, "{}{}", stdout(&replay), stderr(&replay));
    assert!(stdout(&replay).starts_with("all ") && stdout(&replay).contains("checks passed"));

    let workers = small_game(
        path_str(&fixture("league.gml")),
        &dir.path().join("c"),
        &["--attack-prob-grid", "0,1", "--workers", "1"],
    );
    assert_eq!(code(&workers), 0);
    assert_eq!(
        fs::read(a.join("curves.csv")).unwrap(),
        fs::read(dir.path().join("c/curves.csv")).unwrap()
    );
}

fn tamper(path: &Path, edit: impl FnOnce(&mut Value)) {
    let mut v = read_json(path);
    edit(&mut v);
    fs::write(path, serde_json::to_vec_pretty(&v).unwrap()).unwrap();
}

#[test]
fn replay_reports_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = small_game(
        path_str(&fixture("league.gml")),
        &out,
        &["--detectors", "louvain,hlc"],
    );
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let pristine = fs::read(out.join("game_record.json")).unwrap();

    // drop the last edge of the first non-empty plan
    tamper(&out.join("game_record.json"), |v| {
        let outcomes = v["record"]["detectors"][0]["targets"][0]["outcomes"]
            .as_array_mut()
            .unwrap();
        let outcome = outcomes
            .iter_mut()
            .find(|o| !o["plan"]["edges"].as_array().unwrap().is_empty())
            .unwrap();
        outcome["plan"]["edges"].as_array_mut().unwrap().pop();
    });
    let replay = aca(&["replay", path_str(&out.join("manifest.json"))]);
    assert_eq!(code(&replay), 4);
    assert!(stdout(&replay).contains("mismatch"), "{}", stdout(&replay));

    fs::write(out.join("game_record.json"), &pristine).unwrap();
    let mut curves = fs::read_to_string(out.join("curves.csv")).unwrap();
    curves = curves.replacen(",0,", ",0,1", 1);
    fs::write(out.join("curves.csv"), curves).unwrap();
    let replay = aca(&["replay", path_str(&out.join("manifest.json"))]);
    assert_eq!(code(&replay), 4);
    assert!(stdout(&replay).contains("curves.csv"));
}

#[test]
fn synthetic_game_runs_without_a_data_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let run = aca(&[
        "game",
        "--model",
        "lfr",
        "--n",
        "150",
        "--avg-degree",
        "8",
        "--targets",
        "2",
        "--budget",
        "3",
        "--detectors",
        "louvain,umst",
        "--attacks",
        "cl,mod",
        "--out-dir",
        path_str(&out),
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["config"]["source"]["kind"], "synthetic");
    let replay = aca(&["replay", path_str(&out.join("manifest.json"))]);
    assert_eq!(code(&replay), 0, "{}", stdout(&replay));
}
