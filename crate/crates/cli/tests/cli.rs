use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const VOTER: &str = "rec x. !login.(wrong.x + overload.x + ok.!voteA)";
const BALLOT_SKP: &str =
    "rec x. login.(!wrong.!infoW.x (+) !overload.x (+) !ok.!id.(voteA.(va1 + va2) + voteB.(vb1 + vb2)))";
const BALLOT_MALICIOUS: &str = "login.!wrong.rec x.!infoW.x";

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Files(tempfile::tempdir().unwrap())
    }

    fn put(&self, name: &str, text: &str) -> PathBuf {
        let p = self.0.path().join(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

fn skp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skp")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn check(client: &str, server: &str, extra: &[&str]) -> Output {
    let f = Files::new();
    let c = f.put("c", client);
    let s = f.put("s", server);
    let mut args = vec!["check", "--client", c.to_str().unwrap(), "--server", s.to_str().unwrap()];
    args.extend_from_slice(extra);
    skp(&args)
}

#[test]
fn voter_and_skipping_ballot() {
    assert_eq!(code(&check(VOTER, BALLOT_SKP, &[])), 0);
    assert_eq!(code(&check(VOTER, BALLOT_SKP, &["--engine", "both"])), 0);
}

#[test]
fn skipping_loop_prints_a_lasso() {
    let o = check("b", "rec x.(!a.x (+) !b)", &["--witness"]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("loop that only skips"), "{out}");
    assert!(out.contains("cycle:"), "{out}");
    let o = check("b", "rec x.(!a.x (+) !b)", &["--json", "--engine", "both"]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["witness"]["kind"], "lasso");
    assert_eq!(v["derivation"]["first_failure"]["failure"], "WrongHypothesis");
}

#[test]
fn strong_mode_rejects_what_skipping_accepts() {
    assert_eq!(code(&check("b", "!a.!b", &["--mode", "strong"])), 1);
    assert_eq!(code(&check("b", "!a.!b", &["--mode", "skp"])), 0);
    assert_eq!(code(&check(VOTER, "rec x. login.(!wrong.x (+) !overload.x (+) !ok.(voteA + voteB))", &["--mode", "strong"])), 0);
}

#[test]
fn derivation_is_emitted() {
    let f = Files::new();
    let out = f.0.path().join("tree.json");
    let o = check("rec x.b.x", "!c.rec y.(!a.!b.!a.y (+) !b.rec x.!b.x)", &["--engine", "derive", "--emit-derivation", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(v["rule"], "UnfL");
}

#[test]
fn subtype_and_counterexample() {
    let f = Files::new();
    let a = f.put("a", "a");
    let ca = f.put("ca", "!c.a");
    let o = skp(&["subtype", "--sub", a.to_str().unwrap(), "--super", ca.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = skp(&["subtype", "--sub", a.to_str().unwrap(), "--super", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let o = skp(&["--json", "subtype", "--sub", ca.to_str().unwrap(), "--super", a.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["counterexample"], "c.!a");
    // The emitted client is served by the smaller side and not the larger.
    assert_eq!(code(&check("c.!a", "!c.a", &[])), 0);
    assert_eq!(code(&check("c.!a", "a", &[])), 1);
}

#[test]
fn dual_and_normalize() {
    let f = Files::new();
    let p = f.put("t", "a.!b");
    assert_eq!(stdout(&skp(&["dual", p.to_str().unwrap()])).trim(), "!a.b");
    let p = f.put("u", "rec y. (c.y + a)");
    assert_eq!(stdout(&skp(&["normalize", p.to_str().unwrap()])).trim(), "rec x.(a + c.x)");
}

#[test]
fn simulate_malicious_ballot() {
    let f = Files::new();
    let c = f.put("c", VOTER);
    let s = f.put("s", BALLOT_MALICIOUS);
    let o = skp(&["simulate", "--client", c.to_str().unwrap(), "--server", s.to_str().unwrap(), "--max-steps", "6"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "τ τ skp skp skp skp (truncated)");
}

#[test]
fn gen_is_deterministic() {
    let a = stdout(&skp(&["gen", "--seed", "9", "--count", "5"]));
    let b = stdout(&skp(&["gen", "--seed", "9", "--count", "5"]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 5);
    assert_ne!(a, stdout(&skp(&["gen", "--seed", "10", "--count", "5"])));
}

#[test]
fn errors_exit_two() {
    assert_eq!(code(&check("a.(", "!a", &[])), 2);
    assert_eq!(code(&skp(&["check", "--client"])), 2);
    assert_eq!(code(&skp(&["dual", "/nonexistent/file"])), 2);
    assert_eq!(code(&check("a", "!a", &["--mode", "strong", "--engine", "derive"])), 2);
    assert_eq!(code(&check("a", "rec x.!b.x", &["--max-nodes", "1"])), 2);
}

#[test]
fn registry_add_and_query() {
    let f = Files::new();
    let store = f.0.path().join("store.jsonl");
    let store = store.to_str().unwrap();
    let good = f.put("good", BALLOT_SKP);
    let bad = f.put("bad", BALLOT_MALICIOUS);
    let voter = f.put("voter", VOTER);
    assert_eq!(code(&skp(&["registry", "add", "--store", store, "--name", "skp", good.to_str().unwrap()])), 0);
    assert_eq!(code(&skp(&["registry", "add", "--store", store, "--name", "mal", bad.to_str().unwrap()])), 0);
    for extra in [vec![], vec!["--scan"]] {
        let mut args = vec!["--json", "registry", "query", "--store", store, voter.to_str().unwrap()];
        args.extend(extra);
        let o = skp(&args);
        assert_eq!(code(&o), 0);
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["matches"], serde_json::json!([{"id": 1, "name": "skp"}]));
    }
    let broken = f.put("broken", "!a (+) b");
    assert_eq!(code(&skp(&["registry", "add", "--store", store, "--name", "x", broken.to_str().unwrap()])), 2);
}
