use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronolf"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = bin(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn corpus(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn compose_before_before() {
    assert_eq!(ok(&["algebra", "compose", "before", "before"]), "before\n");
    assert_eq!(
        ok(&["algebra", "compose", "meets", "met_by"]),
        "equals,finished_by,finishes\n"
    );
    assert_eq!(ok(&["algebra", "converse", "before,starts"]), "after,started_by\n");
}

#[test]
fn exec_reports_root_relations() {
    let out: Value = serde_json::from_str(&ok(&["lf", "exec", "(before ei1)", "--vocab", "ei1,ei2"])).unwrap();
    assert_eq!(out["denotation"]["relations"]["ei1"], serde_json::json!(["before"]));
    let root = out["denotation"]["root"].as_str().unwrap();
    let edges = out["graph"]["edges"].as_array().unwrap();
    assert!(edges.iter().any(|e| {
        (e["source"] == root && e["target"] == "ei1" && e["relations"] == serde_json::json!(["before"]))
            || (e["source"] == "ei1" && e["target"] == root && e["relations"] == serde_json::json!(["after"]))
    }));
}

#[test]
fn actions_listing() {
    let out = ok(&["lf", "actions", "(union ei1 t3)"]);
    assert_eq!(out.lines().count(), 5);
    assert_eq!(out.lines().nth(2), Some("Fn2 -> union"));
}

#[test]
fn search_finds_the_intersection() {
    let out = ok(&[
        "dpd",
        "search",
        &fixture("intersection_gold.json"),
        "--max-actions",
        "9",
    ]);
    assert!(out.lines().any(|l| l == "(intersection (after ei2) (before ei1))"));
    let stats = out.lines().last().unwrap();
    assert!(stats.starts_with("# stats {"));
    let witnesses = ok(&[
        "dpd",
        "search",
        &fixture("intersection_gold.json"),
        "--max-actions",
        "9",
        "--witnesses",
    ]);
    assert!(witnesses.lines().count() <= out.lines().count());
}

#[test]
fn search_unpruned_lists_more() {
    let count = |pruning: &str| {
        let out = ok(&[
            "dpd",
            "search",
            &fixture("intersection_gold.json"),
            "--max-actions",
            "9",
            "--pruning",
            pruning,
        ]);
        let line = out.lines().last().unwrap().trim_start_matches("# stats ").to_string();
        let stats: Value = serde_json::from_str(&line).unwrap();
        stats["enumerated"].as_u64().unwrap()
    };
    assert!(count("on") < count("off"));
}

#[test]
fn ingest_writes_manifest_and_graphs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "corpus",
        "ingest",
        "--corpus",
        &corpus("timeml"),
        "--out",
        path(dir.path()),
        "--tag",
        "fixtures",
    ]);
    let got: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    let want: Value = serde_json::from_str(&std::fs::read_to_string(corpus("timeml/manifest.json")).unwrap()).unwrap();
    assert_eq!(got, want);
    assert_eq!(std::fs::read_dir(dir.path().join("graphs")).unwrap().count(), 4);
}

#[test]
fn decode_reads_json_lines() {
    let out = ok(&["decode", &fixture("sentences.jsonl"), "--top-k", "3"]);
    let lines: Vec<Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0]["forms"][0]["form"], "(before ei2)");
    assert_eq!(lines[0]["forms"][0]["score"], 1.5);
    assert_eq!(lines[1]["forms"][0]["form"], "ei1");
    // Per-line trigger override.
    assert_eq!(lines[2]["forms"][0]["form"], "(before ei3)");
    assert!(lines.iter().all(|l| l["forms"].as_array().unwrap().len() <= 3));
    assert_eq!(out, ok(&["decode", &fixture("sentences.jsonl"), "--top-k", "3"]));
}

#[test]
fn pipeline_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["pipeline", "--corpus", &corpus("cue"), "--out", path(&a), "--jobs", "1"]);
    ok(&["pipeline", "--corpus", &corpus("cue"), "--out", path(&b), "--jobs", "3"]);
    for name in ["predictions.jsonl", "report.json", "report.txt", "graphs/cue_1.json"] {
        assert_eq!(
            std::fs::read(a.join(name)).unwrap(),
            std::fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let report: Value = serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["beam"], 10);
    assert!(report.get("elapsed_ms").is_none());
    assert!(a.join("timing.json").is_file());
}

#[test]
fn eval_modes_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let preds = dir.path().join("p.jsonl");
    std::fs::write(
        &preds,
        r#"{"doc":"doc_a","relations":[{"source":"ei1","target":"ei2","set":["before","meets"]}]}
"#,
    )
    .unwrap();
    let strict = ok(&["eval", "--corpus", &corpus("timeml"), "--predictions", path(&preds)]);
    let lax = ok(&[
        "eval",
        "--corpus",
        &corpus("timeml"),
        "--predictions",
        path(&preds),
        "--match",
        "lax",
        "--out",
        path(dir.path()),
    ]);
    let matched = |table: &str| {
        table
            .lines()
            .find(|l| l.starts_with("doc_a"))
            .unwrap()
            .split_whitespace()
            .nth(4)
            .unwrap()
            .to_string()
    };
    assert_eq!(matched(&strict), "0");
    assert_eq!(matched(&lax), "1");
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["mode"], "lax");
}

#[test]
fn failures_emit_an_error_record() {
    let out = bin(&["algebra", "compose", "bogus", "before"]);
    assert!(!out.status.success());
    let record: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(record["command"], "algebra compose");
    assert!(record["error"].as_str().unwrap().contains("bogus"));

    let out = bin(&["lf", "exec", "(before ei9)", "--vocab", "ei1"]);
    assert!(!out.status.success());
    assert!(serde_json::from_slice::<Value>(&out.stderr).is_ok());
}

#[test]
fn usage_errors_print_flags() {
    let out = bin(&["pipeline", "--corpus"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}
