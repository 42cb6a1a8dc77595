use std::path::Path;
use std::process::{Command, Output};

fn gexplain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gexplain"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = gexplain(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

/// Small corpus plus a short training run, shared by the tests below.
fn setup(dir: &Path) {
    ok(dir, &["gen-dataset", "--kind", "ba2motifs-mini", "--n", "6", "--seed", "3", "--out", "data.jsonl"]);
    ok(
        dir,
        &["train", "--dataset", "data.jsonl", "--layers", "2", "--hidden", "8", "--epochs", "20", "--seed", "1", "--out", "model.json"],
    );
}

fn first_graph(dir: &Path) {
    let text = std::fs::read_to_string(dir.join("data.jsonl")).unwrap();
    let record: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    std::fs::write(dir.join("graph.json"), serde_json::to_string(&record["graph"]).unwrap()).unwrap();
}

#[test]
fn pipeline_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        setup(dir);
        first_graph(dir);
        ok(dir, &["explain", "--model", "model.json", "--graph", "graph.json", "--out", "e.json", "--dot", "e.dot"]);
        ok(
            dir,
            &["evaluate", "--model", "model.json", "--dataset", "data.jsonl", "--levels", "0,0.5,1", "--out", "eval.json"],
        );
        ok(dir, &["oracle", "--model", "model.json", "--dataset", "data.jsonl", "--cap", "12", "--out", "oracle.json"]);
    }
    for name in ["data.jsonl", "model.json", "e.json", "e.dot", "eval.json", "oracle.json"] {
        assert_eq!(read(a.path(), name), read(b.path(), name), "{name} differs");
    }
    let e: serde_json::Value = serde_json::from_slice(&read(a.path(), "e.json")).unwrap();
    let edges = e["ranked_edges"].as_array().unwrap().len() as u64;
    assert_eq!(e["forward_passes_used"].as_u64().unwrap(), 3 * edges + 1);
}

#[test]
fn explain_options() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    setup(d);
    first_graph(d);
    for method in ["linear-gradient", "sa", "ig"] {
        for k_range in ["full", "paper"] {
            ok(
                d,
                &["explain", "--model", "model.json", "--graph", "graph.json", "--method", method, "--k-range", k_range, "--class", "1", "--out", "x.json"],
            );
            let e: serde_json::Value = serde_json::from_slice(&read(d, "x.json")).unwrap();
            assert_eq!(e["target_class"], 1);
        }
    }
    let out = gexplain(d, &["explain", "--model", "model.json", "--graph", "graph.json", "--class", "7", "--out", "x.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn varsize_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen-dataset", "--kind", "varsize", "--n", "4", "--seed", "2", "--out", "v.jsonl"]);
    assert_eq!(std::fs::read_to_string(d.join("v.jsonl")).unwrap().lines().count(), 4);
    setup(d);
    let out = ok(d, &["bench", "--model", "model.json", "--sizes", "5,10,20", "--reps", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("forwards = 3.000000 * edges + 1.000000"), "{text}");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(gexplain(d, &["explain"]).status.code(), Some(2));
    assert_eq!(gexplain(d, &["gen-dataset", "--kind", "nope", "--n", "1", "--out", "x"]).status.code(), Some(2));
    std::fs::write(d.join("bad.jsonl"), "not json\n").unwrap();
    let out = gexplain(d, &["train", "--dataset", "bad.jsonl", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = gexplain(d, &["explain", "--model", "missing.json", "--graph", "g.json", "--out", "e.json"]);
    assert_eq!(out.status.code(), Some(3));
    ok(d, &["gen-dataset", "--kind", "ba2motifs-mini", "--n", "4", "--seed", "1", "--out", "data.jsonl"]);
    let out = gexplain(
        d,
        &["train", "--dataset", "data.jsonl", "--epochs", "50", "--lr", "1e300", "--init-scale", "1e150", "--out", "m.json"],
    );
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
