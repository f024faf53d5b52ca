use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flowfilter::graph::fixtures;
use serde_json::Value;

fn flowfilter(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowfilter"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn setup() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("converge.tsv"), fixtures::CONVERGE).unwrap();
    fs::write(dir.path().join("hub_star.tsv"), fixtures::HUB_STAR).unwrap();
    fs::write(dir.path().join("cyc.tsv"), "s\ta\na\tb\nb\tc\nc\ta\n").unwrap();
    dir
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn place_writes_result_and_manifest() {
    let dir = setup();
    let o = flowfilter(
        dir.path(),
        &[
            "place",
            "--input",
            "converge.tsv",
            "--source",
            "s",
            "--algo",
            "greedy-all",
            "--k",
            "1",
            "--json",
            "out.json",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&dir.path().join("out.json"));
    assert_eq!(v["filters"], serde_json::json!(["z2"]));
    assert_eq!(v["f"].to_string(), "1");
    assert_eq!(v["fr"].to_string(), "1.000000");
    let m = json(&dir.path().join("out.json.manifest.json"));
    assert_eq!(m["command"], "place");
    assert_eq!(m["algorithms"], serde_json::json!(["greedy-all"]));
    assert_eq!(m["k"], 1);
    assert_eq!(m["version"], flowfilter::VERSION);
    assert_eq!(m["outputs"], serde_json::json!(["out.json"]));
}

#[test]
fn generate_layered_with_manifest() {
    let dir = setup();
    let args = [
        "generate",
        "--levels",
        "10",
        "--width",
        "100",
        "--x",
        "1",
        "--y",
        "4",
        "--seed",
        "7",
        "--out",
        "synth.tsv",
    ];
    let o = flowfilter(dir.path(), &args);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("synth.tsv")).unwrap();
    let g = flowfilter::parse_edge_list(&text, Some("s")).unwrap();
    assert_eq!(g.node_count(), 1001);
    let m = json(&dir.path().join("synth.tsv.manifest.json"));
    assert_eq!(m["generator"]["levels"], 10);
    assert_eq!(m["generator"]["seed"], 7);
    assert_eq!(m["seed"], 7);

    let again = flowfilter(dir.path(), &["replay", "synth.tsv.manifest.json"]);
    assert!(again.status.success(), "{}", stderr(&again));
}

#[test]
fn fr_curve_hub_star_contrast() {
    let dir = setup();
    let o = flowfilter(
        dir.path(),
        &[
            "fr-curve",
            "--input",
            "hub_star.tsv",
            "--source",
            "s",
            "--algos",
            "greedy-1,greedy-all",
            "--kmax",
            "1",
            "--csv",
            "curve.csv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("curve.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["algorithm", "k", "fr", "runs", "wall_ms"]);
    assert_eq!(rows[1][..4], ["greedy-1", "1", "0.000000", "1"]);
    assert_eq!(rows[2][..4], ["greedy-all", "1", "1.000000", "1"]);
    assert!(rows[1][4].parse::<f64>().unwrap() >= 0.0);
    assert!(dir.path().join("curve.csv.manifest.json").exists());
}

#[test]
fn fr_curve_json_and_replay() {
    let dir = setup();
    let args = [
        "fr-curve",
        "--input",
        "hub_star.tsv",
        "--algos",
        "greedy-all,rand-k,rand-w",
        "--kmax",
        "3",
        "--runs",
        "6",
        "--seed",
        "11",
        "--jobs",
        "3",
        "--csv",
        "c.csv",
        "--json",
        "c.json",
    ];
    assert!(flowfilter(dir.path(), &args).status.success());
    let v = json(&dir.path().join("c.json"));
    assert_eq!(v["f_max"].to_string(), "2");
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 9);
    assert_eq!(rows[3]["cells"].as_array().unwrap().len(), 6);

    let o = flowfilter(dir.path(), &["replay", "c.csv.manifest.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("c.csv") && out.contains("c.json"), "{out}");
}

#[test]
fn replay_detects_tampering() {
    let dir = setup();
    let args = [
        "oracle",
        "--input",
        "hub_star.tsv",
        "--k",
        "2",
        "--json",
        "o.json",
    ];
    assert!(flowfilter(dir.path(), &args).status.success());
    let v = json(&dir.path().join("o.json"));
    assert_eq!(v["filters"], serde_json::json!(["A"]));
    assert_eq!(v["evaluated"], 10 + 45);

    fs::write(dir.path().join("o.json"), "{}").unwrap();
    let o = flowfilter(dir.path(), &["replay", "o.json.manifest.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("outputs differ"));

    fs::write(dir.path().join("hub_star.tsv"), fixtures::CONVERGE).unwrap();
    let o = flowfilter(dir.path(), &["replay", "o.json.manifest.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("changed"));
}

#[test]
fn evaluate_reports_phi_and_f() {
    let dir = setup();
    let o = flowfilter(
        dir.path(),
        &["evaluate", "--input", "hub_star.tsv", "--filters", "A,B"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["phi_empty"].to_string(), "14");
    assert_eq!(v["phi_filtered"].to_string(), "12");
    assert_eq!(v["f"].to_string(), "2");
    assert_eq!(v["algorithm"], "given");

    let o = flowfilter(
        dir.path(),
        &["evaluate", "--input", "hub_star.tsv", "--filters", "nope"],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown node"));
}

#[test]
fn cyclic_input_needs_extraction() {
    let dir = setup();
    for args in [
        vec![
            "place",
            "--input",
            "cyc.tsv",
            "--source",
            "s",
            "--algo",
            "greedy-all",
            "--k",
            "1",
        ],
        vec![
            "fr-curve", "--input", "cyc.tsv", "--source", "s", "--algos", "greedy-1", "--kmax", "1",
        ],
        vec!["oracle", "--input", "cyc.tsv", "--source", "s", "--k", "1"],
    ] {
        let o = flowfilter(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).contains("extract-dag"), "{}", stderr(&o));
    }

    let o = flowfilter(
        dir.path(),
        &[
            "extract-dag",
            "--input",
            "cyc.tsv",
            "--source",
            "s",
            "--root",
            "s",
            "--out",
            "dag.tsv",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(dir.path().join("dag.tsv")).unwrap(),
        "s\ta\na\tb\nb\tc\n"
    );
    let o = flowfilter(
        dir.path(),
        &[
            "place",
            "--input",
            "dag.tsv",
            "--algo",
            "greedy-all",
            "--k",
            "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));

    let o = flowfilter(
        dir.path(),
        &["extract-dag", "--input", "cyc.tsv", "--best-root"],
    );
    assert!(o.status.success());
    assert_eq!(String::from_utf8_lossy(&o.stdout), "s\ta\na\tb\nb\tc\n");
}

#[test]
fn usage_errors_exit_2() {
    let dir = setup();
    for args in [
        vec![
            "place",
            "--input",
            "converge.tsv",
            "--algo",
            "greedy-7",
            "--k",
            "1",
        ],
        vec![
            "place",
            "--input",
            "converge.tsv",
            "--algo",
            "given",
            "--k",
            "1",
        ],
        vec!["extract-dag", "--input", "converge.tsv"],
        vec![
            "extract-dag",
            "--input",
            "converge.tsv",
            "--root",
            "s",
            "--best-root",
        ],
        vec![
            "fr-curve",
            "--input",
            "converge.tsv",
            "--algos",
            "greedy-1",
            "--kmax",
            "1",
            "--runs",
            "0",
        ],
        vec!["frobnicate"],
    ] {
        let o = flowfilter(dir.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert_eq!(flowfilter(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_1() {
    let dir = setup();
    fs::write(dir.path().join("bad.tsv"), "a\tb\tc\n").unwrap();
    let cases = [
        vec!["validate", "--input", "missing.tsv"],
        vec!["validate", "--input", "bad.tsv"],
        vec![
            "place",
            "--input",
            "converge.tsv",
            "--source",
            "zz",
            "--algo",
            "greedy-1",
            "--k",
            "1",
        ],
        vec![
            "oracle",
            "--input",
            "hub_star.tsv",
            "--k",
            "3",
            "--budget",
            "5",
        ],
        vec![
            "place",
            "--input",
            "hub_star.tsv",
            "--algo",
            "tree-dp",
            "--k",
            "1",
        ],
    ];
    for args in cases {
        let o = flowfilter(dir.path(), &args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
    }
}

#[test]
fn tree_dp_and_super_source() {
    let dir = setup();
    fs::write(dir.path().join("tree.tsv"), fixtures::TREE1).unwrap();
    let o = flowfilter(
        dir.path(),
        &[
            "place", "--input", "tree.tsv", "--algo", "tree-dp", "--k", "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["filters"], serde_json::json!(["a"]));

    fs::write(dir.path().join("forest.tsv"), "r1\tc\nr2\tc\nc\td\n").unwrap();
    let o = flowfilter(
        dir.path(),
        &[
            "place",
            "--input",
            "forest.tsv",
            "--algo",
            "tree-dp",
            "--k",
            "1",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("super-source"));
    let o = flowfilter(
        dir.path(),
        &[
            "place",
            "--input",
            "forest.tsv",
            "--super-source",
            "--algo",
            "greedy-all",
            "--k",
            "1",
        ],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["filters"], serde_json::json!(["c"]));
}

#[test]
fn validate_describes_graph() {
    let dir = setup();
    let o = flowfilter(dir.path(), &["validate", "--input", "converge.tsv"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["nodes"], 7);
    assert_eq!(v["edges"], 9);
    assert_eq!(v["acyclic"], true);
    assert_eq!(v["phi_empty"].to_string(), "10");
    assert_eq!(v["f_max"].to_string(), "1");

    let o = flowfilter(
        dir.path(),
        &["validate", "--input", "cyc.tsv", "--source", "s"],
    );
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["acyclic"], false);
    assert_eq!(v["cycle"].as_array().unwrap().len(), 4);
}

#[test]
fn randomized_place_is_seeded() {
    let dir = setup();
    let run = |seed: &str| {
        let o = flowfilter(
            dir.path(),
            &[
                "place",
                "--input",
                "hub_star.tsv",
                "--algo",
                "rand-i",
                "--k",
                "4",
                "--seed",
                seed,
            ],
        );
        assert!(o.status.success());
        serde_json::from_slice::<Value>(&o.stdout).unwrap()
    };
    assert_eq!(run("5"), run("5"));
    assert_eq!(run("5")["seed"], 5);
}

#[test]
fn large_counts_stay_exact_in_json() {
    let dir = setup();
    // 70 stacked diamonds: 2^70 copies reach the last node.
    let mut text = String::new();
    for i in 0..70 {
        text += &format!(
            "n{i}\ta{i}\nn{i}\tb{i}\na{i}\tn{}\nb{i}\tn{}\n",
            i + 1,
            i + 1
        );
    }
    fs::write(dir.path().join("deep.tsv"), text).unwrap();
    let o = flowfilter(
        dir.path(),
        &["evaluate", "--input", "deep.tsv", "--filters", "n70"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["f"].to_string(), "0");
    let phi: num_bigint::BigUint = v["phi_empty"].to_string().parse().unwrap();
    assert!(phi > num_bigint::BigUint::from(1u128 << 70));
}
