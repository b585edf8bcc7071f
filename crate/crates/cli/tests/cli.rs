use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const GOLDEN_SQUARE: f64 = 2.618_033_988_749_895;

fn mutloop(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mutloop"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = TempDir::new().unwrap();
        let files = [
            ("a2.json", r#"{"n": 2, "b": [[0, 1], [-1, 0]]}"#),
            ("a2_fz.json", r#"{"n": 2, "b": [[0, -1], [1, 0]], "convention": "fz"}"#),
            ("markov.json", r#"{"n": 3, "b": [[0, 2, -2], [-2, 0, 2], [2, -2, 0]]}"#),
            ("a3.json", r#"{"n": 3, "b": [[0, 1, 0], [-1, 0, 1], [0, -1, 0]]}"#),
            ("kk.json", r#"{"path": [2, 2], "perm": [1, 2, 3]}"#),
            ("bad_perm.json", r#"{"path": [2, 2], "perm": [1, 1, 3]}"#),
            ("wrong_perm.json", r#"{"path": [2], "perm": [1, 2, 3]}"#),
            ("not_json.json", "{"),
        ];
        for (name, body) in files {
            std::fs::write(dir.path().join(name), body).unwrap();
        }
        Fixture { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn run(&self, args: &[&str]) -> Output {
        mutloop(args, self.path())
    }
}

fn matrices(v: &Value) -> Vec<Vec<Vec<i64>>> {
    serde_json::from_value(v["matrices"].clone()).unwrap()
}

#[test]
fn mutate_prints_each_step() {
    let f = Fixture::new();
    let out = f.run(&["mutate", "--seed", "a2.json", "--path", "1,2"]);
    assert!(out.status.success());
    assert_eq!(
        matrices(&json(&out)),
        vec![vec![vec![0, -1], vec![1, 0]], vec![vec![0, 1], vec![-1, 0]]]
    );

    let out = f.run(&["mutate", "--seed", "markov.json", "--path", "1"]);
    assert_eq!(
        matrices(&json(&out)),
        vec![vec![vec![0, -2, 2], vec![2, 0, -2], vec![-2, 2, 0]]]
    );

    let out = f.run(&["mutate", "--seed", "a2.json"]);
    assert_eq!(matrices(&json(&out)), vec![vec![vec![0, 1], vec![-1, 0]]]);
}

#[test]
fn fz_input_round_trips_in_its_own_convention() {
    let f = Fixture::new();
    let out = json(&f.run(&["mutate", "--seed", "a2_fz.json"]));
    assert_eq!(out["convention"], "fz");
    assert_eq!(matrices(&out), vec![vec![vec![0, -1], vec![1, 0]]]);
    // the --fz flag reinterprets a plain file
    let plain = json(&f.run(&["mutate", "--seed", "a2.json", "--fz", "--path", "1"]));
    assert_eq!(plain["convention"], "fz");
    assert_eq!(matrices(&plain), vec![vec![vec![0, -1], vec![1, 0]]]);
}

#[test]
fn torus_lr_stability_report() {
    let f = Fixture::new();
    let out = f.run(&["stability", "--surface", "torus-LR"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["verdict"], "verified-on-samples");
    assert_eq!(v["stable_sign"], "+-");
    for key in ["lambda", "lambda_check"] {
        assert!((v[key].as_f64().unwrap() - GOLDEN_SQUARE).abs() < 1e-9, "{key}");
    }
    let h = &v["entropy"];
    assert_eq!(h["h_dfd"], h["h_per"]);
    assert!((h["h_per"].as_f64().unwrap() - GOLDEN_SQUARE.ln()).abs() < 1e-9);
    assert_eq!(v["cone_stabilization"]["n"], 2);
    assert_eq!(v["conjecture"]["holds"], true);
    assert_eq!(v["cone_criterion"]["agree"], true);
}

#[test]
fn double_mutation_loop_has_unit_stretch() {
    let f = Fixture::new();
    let out = f.run(&["stability", "--seed", "markov.json", "--loop", "kk.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lambda"], 1.0);
    assert_eq!(v["lambda_check"], 1.0);
    assert_eq!(v["cone_stabilization"]["n"], 1);
    assert_eq!(v["cone_stabilization"]["cone"], serde_json::json!([["0", "1", "0"]]));
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let code = |args: &[&str]| f.run(args).status.code();
    assert_eq!(
        code(&["stability", "--seed", "markov.json", "--loop", "bad_perm.json"]),
        Some(1)
    );
    assert_eq!(code(&["stability", "--seed", "not_json.json", "--path", "1"]), Some(1));
    assert_eq!(code(&["stability", "--seed", "missing.json", "--path", "1"]), Some(1));
    assert_eq!(code(&["mutate", "--seed", "a2.json", "--path", "3"]), Some(1));
    assert_eq!(
        code(&["stability", "--surface", "torus-LR", "--max-iterations", "0"]),
        Some(1)
    );
    assert_eq!(code(&["no-such-command"]), Some(1));
    assert_eq!(
        code(&["stability", "--seed", "markov.json", "--loop", "wrong_perm.json"]),
        Some(2)
    );
    assert_eq!(code(&["stability", "--seed", "a3.json", "--path", "2"]), Some(2));
    assert_eq!(
        code(&[
            "stability",
            "--surface",
            "sphere4-LR",
            "--region",
            "integer-rays",
            "--max-iterations",
            "4"
        ]),
        Some(3)
    );
    assert_eq!(
        code(&["entropy", "--surface", "torus-L", "--region", "integer-rays"]),
        Some(3)
    );
}

#[test]
fn json_is_byte_deterministic() {
    let f = Fixture::new();
    for args in [
        &[
            "stability",
            "--surface",
            "torus-LR",
            "--region",
            "integer-rays",
            "--rng-seed",
            "7",
        ][..],
        &["conjecture", "--count", "25", "--max-rank", "4", "--rng-seed", "3"][..],
        &["surface", "--surface", "torus-LR", "--depth", "3"][..],
    ] {
        let a = f.run(args);
        let b = f.run(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn conjecture_batch_and_rank_bound() {
    let f = Fixture::new();
    let out = f.run(&["conjecture", "--count", "200", "--max-rank", "5"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["count"], 200);
    assert_eq!(v["counterexample"], Value::Null);
    let dir: PathBuf = f.path().to_path_buf();
    assert!(std::fs::read_dir(dir).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .starts_with("counterexample")));
    assert_eq!(f.run(&["conjecture", "--max-rank", "1"]).status.code(), Some(1));
}

#[test]
fn entropy_traces_as_tsv() {
    let f = Fixture::new();
    let out = f.run(&["entropy", "--surface", "torus-LR", "--output", "tsv", "--n-max", "6"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n\tnorm_growth\torbit_growth");
    assert_eq!(lines.len(), 7);
    assert!(lines[6].starts_with("6\t"));
    // tsv is only defined for traces
    assert_eq!(
        f.run(&["mutate", "--seed", "a2.json", "--output", "tsv"]).status.code(),
        Some(1)
    );
}

#[test]
fn sign_cones_and_filling() {
    let f = Fixture::new();
    let stable_e = serde_json::json!([[2, 0, 1], [-1, 2, 0], [0, -1, 0]]);
    let v = json(&f.run(&["sign", "--surface", "torus-LR"]));
    assert_eq!(v["point"], serde_json::json!(["1", "1", "1"]));
    assert_eq!(v["sign"], "++");
    let v = json(&f.run(&["sign", "--surface", "torus-LR", "--point=1,-1,1"]));
    assert_eq!(v["sign"], "+-");
    assert_eq!(v["E"], stable_e);

    let v = json(&f.run(&["sign", "--seed", "markov.json", "--path", "1", "--point=-1,2,3/2"]));
    assert_eq!(v["sign"], "-");
    assert_eq!(v["image"], serde_json::json!(["1", "0", "3/2"]));

    let v = json(&f.run(&["cones", "--surface", "torus-LR", "--sign", "+-"]));
    assert_eq!(v["cone_stabilization"]["n"], 2);
    assert_eq!(v["strictly_convex"], false);
    assert_eq!(v["E"], stable_e);
    let v = json(&f.run(&["cones", "--surface", "torus-LR"]));
    assert_eq!(v["sign"], "+-");
    assert_eq!(
        f.run(&["cones", "--surface", "torus-LR", "--sign", "+"]).status.code(),
        Some(1)
    );

    let v = json(&f.run(&["xfill", "--seed", "markov.json", "--point", "1,1,-2"]));
    assert_eq!(v["result"]["status"], "not-filling");
    assert_eq!(v["result"]["witness"], serde_json::json!([1]));
    assert_eq!(v["result"]["index"], 3);
    let v = json(&f.run(&["xfill", "--seed", "markov.json", "--point", "[1, 1, 1]"]));
    assert_eq!(v["result"]["status"], "no-obstruction-to-depth");
}

#[test]
fn surface_catalog() {
    let f = Fixture::new();
    let v = json(&f.run(&["surface"]));
    let names: Vec<&str> = v["catalog"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["torus-LR", "torus-L", "sphere4-twist", "sphere4-LR"]);
    let v = json(&f.run(&["surface", "--surface", "torus-LR", "--depth", "3"]));
    let ns = &v["north_south"];
    assert_eq!(ns["ns_on_samples"], true);
    assert_eq!(ns["non_parabolic"], true);
    assert_eq!(ns["attracting_filling"]["status"], "no-obstruction-to-depth");
    assert_eq!(ns["repelling_filling"]["status"], "no-obstruction-to-depth");
    assert_eq!(f.run(&["surface", "--surface", "klein-bottle"]).status.code(), Some(1));
    let t = json(&f.run(&["surface", "--surface", "torus-LR", "--triangulation"]));
    assert_eq!(t["triangles"], serde_json::json!([[1, 2, 3], [1, 2, 3]]));
}
