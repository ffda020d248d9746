use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn isoflag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isoflag")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn tmp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isoflag-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn classify_examples() {
    let out = isoflag(&["classify", "--a", "n", "--b", "n", "--c", "1^n", "--n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["finite"], true);
    assert_eq!(v["cases"][0], "I");

    let v = json(&isoflag(&["classify", "--a", "2", "--b", "2", "--c", "2", "--n", "3"]));
    assert_eq!(v["finite"], false);

    let v = json(&isoflag(&["classify", "--a", "1", "--b", "1", "--c", "1", "--n", "1"]));
    assert_eq!(v["finite"], true);
    let cases: Vec<&str> = v["cases"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(cases.contains(&"I") && cases.contains(&"III"));
    assert_eq!(v["dimT"], v["dimG"]);
}

#[test]
fn square_class_flag() {
    let finite = json(&isoflag(&["classify", "--a", "1", "--b", "1", "--c", "1,1", "--n", "2"]));
    let infinite =
        json(&isoflag(&["classify", "--a", "1", "--b", "1", "--c", "1,1", "--n", "2", "--square-classes", "infinite"]));
    assert_eq!(finite["finite"], true);
    assert_eq!(infinite["finite"], false);
    assert_eq!(infinite["excluded_by"], "square_classes");
}

#[test]
fn invalid_composition_exits_2() {
    assert_eq!(isoflag(&["classify", "--a", "2,x", "--b", "1", "--c", "1", "--n", "2"]).status.code(), Some(2));
    assert_eq!(isoflag(&["classify", "--a", "2,2", "--b", "1", "--c", "1", "--n", "2"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let args = ["verify", "--suite", "pair-orbits", "--n", "1", "--p", "3"];
    let (a, b) = (isoflag(&args), isoflag(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

const PAIR: &str = "2 3\n2 5 3\n1 0 0 0 0\n0 1 0 0 0\n2 5 3\n0 0 0 0 1\n0 0 0 1 0\n";

#[test]
fn canonicalize_model_pair() {
    let pair = tmp("pair.txt", PAIR);
    let v = tmp("v.txt", "2 3\n2 5 3\n1 0 0 1 0\n0 1 0 0 2\n");
    let out = isoflag(&["canonicalize", "--n", "2", "--p", "3", "--pair", pair.to_str().unwrap(), "--v", v.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let j = json(&out);
    assert_eq!(j["tuple"]["b"].as_array().unwrap().len(), 15);
    assert_eq!(j["stages"][0]["label"], "i");
    assert!(j["g"].is_array());
}

#[test]
fn canonicalize_rejects_bad_input() {
    let pair = tmp("pair2.txt", PAIR);
    let malformed = tmp("bad.txt", "2 3\n2 5 3\n1 0 0\n");
    let out = isoflag(&["canonicalize", "--n", "2", "--p", "3", "--pair", pair.to_str().unwrap(), "--v", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let wrong_field = tmp("v5.txt", "2 5\n2 5 5\n1 0 0 0 0\n0 1 0 0 0\n");
    let out = isoflag(&["canonicalize", "--n", "2", "--p", "3", "--pair", pair.to_str().unwrap(), "--v", wrong_field.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_hashimoto_instance() {
    let out = isoflag(&["verify", "--suite", "double-cosets", "--n", "3", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["hashimoto"]["count"], 9);
    assert_eq!(v["hashimoto"]["formula"], 9);
}

#[test]
fn verify_mismatch_exits_4() {
    let out = isoflag(&["verify", "--suite", "separation", "--family", "O6-U3", "--p", "5"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["predicate_match"], false);
    let out = isoflag(&["verify", "--suite", "separation", "--family", "Sq", "--p", "5"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_input_errors() {
    assert_eq!(isoflag(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(isoflag(&["verify", "--suite", "canonicalize-random", "--n", "1"]).status.code(), Some(2));
    assert_eq!(isoflag(&["verify", "--suite", "round-trip", "--p", "4"]).status.code(), Some(2));
}

#[test]
fn budget_exceeded_exits_5() {
    let out = Command::new(env!("CARGO_BIN_EXE_isoflag"))
        .args(["verify", "--suite", "pair-orbits", "--n", "2", "--p", "3"])
        .env("ISOFLAG_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn enumerate_catalogue_and_shapes() {
    let v = json(&isoflag(&["enumerate", "--what", "catalogue", "--n", "3"]));
    let triples: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["triple"].as_str().unwrap()).collect();
    assert!(triples.contains(&"(2)(3)(12)"));
    assert!(!triples.contains(&"(1)(1)(11)"));
    let v = json(&isoflag(&["enumerate", "--what", "shapes", "--n", "1"]));
    assert_eq!(v.as_array().unwrap().len(), 5);
}
