use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn pompom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pompom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data(o: &Output) -> Value {
    let v: Value = serde_json::from_slice(&o.stdout).expect("artifact JSON");
    v["data"].clone()
}

fn table(len: usize, f: impl Fn(&str) -> &'static str) -> Value {
    let mut m = serde_json::Map::new();
    for r in 0..(1usize << len) {
        let a: String = (0..len).rev().map(|b| if r >> b & 1 == 1 { '1' } else { '0' }).collect();
        m.insert(a.clone(), json!(f(&a)));
    }
    Value::Object(m)
}

fn write(dir: &TempDir, name: &str, v: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_vec_pretty(v).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Sets {0, j} for j = 1..=8 on n = 9, constant tables, uniform weights.
fn sunflower(dir: &TempDir) -> PathBuf {
    let cs: Vec<Value> = (1..9).map(|j| json!({"Q": [0, j], "S": table(2, |_| "1")})).collect();
    write(
        dir,
        "sunflower.json",
        &json!({"n": 9, "alphabet": ["0", "1"], "constraints": cs, "mu": vec!["1/8"; 8]}),
    )
}

/// All triples of n = 6; a constraint accepts only `000`.
fn triples(dir: &TempDir, weights: Vec<&str>) -> PathBuf {
    let mut cs = Vec::new();
    for a in 0..6 {
        for b in a + 1..6 {
            for c in b + 1..6 {
                cs.push(json!({"Q": [a, b, c], "S": table(3, |w| if w == "000" { "1" } else { "0" })}));
            }
        }
    }
    write(
        dir,
        "triples.json",
        &json!({"n": 6, "alphabet": ["0", "1"], "constraints": cs, "mu": weights, "one_sided": true}),
    )
}

#[test]
fn scm_of_sunflower_matches_hand_trace() {
    let dir = TempDir::new().unwrap();
    let f = sunflower(&dir);
    let o = pompom(&["structure", "scm", "--input", s(&f)]);
    assert_eq!(code(&o), 0);
    let d = data(&o);
    let scm = &d["decomposition"];
    assert_eq!(scm["thresholds"], json!([3, 3, 9]));
    assert_eq!(scm["cores"], json!([[0], [0], []]));
    assert_eq!(scm["matches"][0], json!([]));
    assert_eq!(scm["matches"][1].as_array().unwrap().len(), 8);
    assert_eq!(scm["sets"][2], json!([]));
    assert_eq!(scm["leftover"], json!([]));
    assert_eq!(d["violations"], json!([]));
    assert_eq!(d["size_bound_violations"], json!([]));
}

#[test]
fn constellation_of_sunflower() {
    let dir = TempDir::new().unwrap();
    let f = sunflower(&dir);
    let o = pompom(&["structure", "constellation", "--input", s(&f)]);
    assert_eq!(code(&o), 0);
    let d = data(&o);
    assert_eq!(d["constellation"]["level"], json!(1));
    assert_eq!(d["constellation"]["core"], json!([0]));
    assert_eq!(d["constellation"]["eta"], json!("16/9"));
    assert_eq!(d["report"]["heavy"], json!(true));
}

#[test]
fn combi_output_validates_as_combinatorial() {
    let dir = TempDir::new().unwrap();
    let f = triples(&dir, vec!["1/20"; 20]);
    let out = dir.path().join("combi.json");
    let o = pompom(&[
        "transform", "combi", "--input", s(&f), "--epsilon", "1", "--delta", "1/20", "--q", "3", "--output", s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = pompom(&["formula", "validate", "--combinatorial", "--input", s(&out)]);
    assert_eq!(code(&v), 0, "{}", String::from_utf8_lossy(&v.stderr));
    assert_eq!(data(&v)["combinatorial"], json!(true));
}

#[test]
fn artifacts_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let l = dir.path().join("l.json");
    let gen = pompom(&["property", "gen", "--n", "10", "--kind", "random", "--members", "3", "--seed", "9", "--output", s(&l)]);
    assert_eq!(code(&gen), 0);
    let t = dir.path().join("t.json");
    assert_eq!(code(&pompom(&["synthesize", "one-sided", "--input", s(&l), "--p", "1/3", "--output", s(&t)])), 0);
    let args = ["eval", "mc", "--input", s(&t), "--word", "0101010101", "--trials", "2000", "--seed", "4"];
    let a = pompom(&args);
    let b = pompom(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let r1 = pompom(&["run", "sample", "--input", s(&t), "--word", "1111111111", "--seed", "7"]);
    let r2 = pompom(&["run", "sample", "--input", s(&t), "--word", "1111111111", "--seed", "7"]);
    assert_eq!(r1.stdout, r2.stdout);
}

#[test]
fn metadata_records_inputs_and_seed() {
    let dir = TempDir::new().unwrap();
    let f = sunflower(&dir);
    let o = pompom(&["structure", "scm", "--input", s(&f), "--seed", "12"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["kind"], json!("scm"));
    assert_eq!(v["metadata"]["seed"], json!(12));
    assert_eq!(v["metadata"]["command"], json!("structure scm"));
    assert_eq!(v["metadata"]["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exact_and_monte_carlo_agree_for_a_synthesized_tester() {
    let dir = TempDir::new().unwrap();
    let l = dir.path().join("l.json");
    assert_eq!(code(&pompom(&["property", "gen", "--n", "10", "--kind", "zeros", "--output", s(&l)])), 0);
    let t = dir.path().join("t.json");
    assert_eq!(code(&pompom(&["synthesize", "one-sided", "--input", s(&l), "--p", "1/2", "--output", s(&t)])), 0);
    let w = "1111100000";
    let exact = data(&pompom(&["eval", "exact", "--input", s(&t), "--word", w]));
    assert_eq!(exact["exact"], json!("1/32"));
    let mc = data(&pompom(&["eval", "mc", "--input", s(&t), "--word", w, "--trials", "20000"]));
    let est = mc["estimate"].as_f64().unwrap();
    assert!((est - 1.0 / 32.0).abs() < 0.01, "{est}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&pompom(&["no-such-command"])), 1);
    assert_eq!(code(&pompom(&["structure", "scm"])), 1);
    assert_eq!(code(&pompom(&["eval", "calc", "--override", "novalue"])), 1);
    assert_eq!(code(&pompom(&["--help"])), 0);
}

#[test]
fn non_combinatorial_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let mut w = vec!["1/38"; 20];
    w[0] = "1/2";
    let f = triples(&dir, w);
    let o = pompom(&["formula", "validate", "--combinatorial", "--input", s(&f)]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data(&o)["combinatorial"], json!(false));
}

#[test]
fn cap_exceeded_exits_three() {
    let o = pompom(&["property", "gen", "--n", "10", "--kind", "all", "--cap-enum", "16"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn constellation_hypothesis_failure_exits_four() {
    let dir = TempDir::new().unwrap();
    let mut cs = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            cs.push(json!({"Q": [a, b], "S": table(2, |_| "1")}));
        }
    }
    let f = write(
        &dir,
        "k4.json",
        &json!({"n": 4, "alphabet": ["0", "1"], "constraints": cs, "mu": vec!["1/6"; 6]}),
    );
    let o = pompom(&["structure", "constellation", "--input", s(&f)]);
    assert_eq!(code(&o), 4);
    assert_eq!(serde_json::from_slice::<Value>(&o.stdout).unwrap()["kind"], json!("no_constellation"));
}

#[test]
fn appendix_calculations_pass() {
    let o = pompom(&["eval", "calc"]);
    assert_eq!(code(&o), 0);
    assert_eq!(data(&o)["violations"], json!(0));
}
