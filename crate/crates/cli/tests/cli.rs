use std::path::PathBuf;

use std::process::{Command, Output};

use levycalc::classify::ClassReport;
use levycalc::doc::{parse, parse_triple, render};
use levycalc::measure::{Direction, LevyMeasure};
use levycalc::triple::LevyTriple;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn levycalc() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_levycalc"));
    c.env_remove("LEVYCALC_TOL");
    c
}

fn run(args: &[&str]) -> Output {
    levycalc().args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("levycalc-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self) -> &std::path::Path {
        &self.0
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn stdout_of(args: &[&str]) -> String {
    let out = levycalc().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn transform_gaussian_alpha_two() {
    let g = data("gaussian.json");
    let t = parse_triple(&stdout_of(&["transform", "--in", g.to_str().unwrap(), "--alpha", "2"])).unwrap();
    assert_eq!(t.gauss_var, 1.0 / 9.0);
    assert_eq!(t.shift, 0.0);
}

#[test]
fn transform_alpha_zero_keeps_measure() {
    for name in ["two_atom.json", "stable_mixture.json", "poisson.json"] {
        let path = data(name);
        let input = parse_triple(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let text = stdout_of(&["transform", "--in", path.to_str().unwrap(), "--alpha", "0", "--no-header"]);
        let out = parse_triple(&text).unwrap();
        assert_eq!(serde_json::to_string(&out.measure).unwrap(), serde_json::to_string(&input.measure).unwrap());
        assert_eq!(text, render(&input));
    }
}

#[test]
fn i_map_divides_weights_by_z() {
    let p = data("stable_mixture.json");
    let t = parse_triple(&stdout_of(&["transform", "--in", p.to_str().unwrap(), "--i-map"])).unwrap();
    assert_eq!(t.measure, LevyMeasure::stable(&[(Direction::Pos, 0.5, 2.0), (Direction::Neg, 1.5, 2.0 / 1.5)]));
}

#[test]
fn transform_writes_out_file_that_round_trips() {
    let dir = Scratch::new("out");
    let out = dir.path().join("j.json");
    let p = data("two_atom.json");
    let o = run(&["transform", "--in", p.to_str().unwrap(), "--alpha", "1.5", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# levycalc"));
    let t = parse_triple(&text).unwrap();
    assert_eq!(parse_triple(&render(&t)).unwrap(), t);
    assert!(matches!(t.measure, LevyMeasure::JTransformed { alpha, .. } if alpha == 1.5));
}

#[test]
fn exit_codes() {
    let dir = Scratch::new("codes");
    let bad = dir.path().join("bad.json");
    let b = bad.to_str().unwrap();
    std::fs::write(&bad, "{\"shift\": 0,").unwrap();
    assert_eq!(code(&["transform", "--in", b]), 2);
    std::fs::write(&bad, r#"{"shift": 0, "gauss_var": 0, "measure": {"type": "nope"}}"#).unwrap();
    assert_eq!(code(&["classify", "--in", b]), 2);
    std::fs::write(&bad, r#"{"shift": 0, "gauss_var": -2}"#).unwrap();
    let o = run(&["transform", "--in", b]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gauss_var"));
    assert_eq!(code(&["transform"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["cf", "--in", data("poisson.json").to_str().unwrap(), "--ymin", "1", "--ymax", "0", "--points", "3"]), 2);
    assert_eq!(code(&["simulate", "--in", data("poisson.json").to_str().unwrap(), "--samples", "0"]), 2);
    assert_eq!(code(&["simulate", "--in", data("stable_mixture.json").to_str().unwrap(), "--samples", "10"]), 3);
}

#[test]
fn quadrature_failure_exits_four() {
    let s = data("stable_mixture.json");
    let o = levycalc()
        .env("LEVYCALC_TOL", "1e-300")
        .args(["cf", "--in", s.to_str().unwrap(), "--ymin", "-3", "--ymax", "3", "--points", "7", "--method", "quadrature"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

fn cf_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('y'))
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn cf_methods_agree_on_poisson() {
    let p = data("poisson.json");
    let text = stdout_of(&["cf", "--in", p.to_str().unwrap(), "--ymin", "-10", "--ymax", "10", "--points", "21", "--method", "all"]);
    let rows = cf_rows(&text);
    assert_eq!(rows.len(), 63);
    for i in 0..21 {
        for k in [21, 42] {
            assert_eq!(rows[i][0], rows[i + k][0]);
            assert!((rows[i][1] - rows[i + k][1]).abs() <= 1e-6 && (rows[i][2] - rows[i + k][2]).abs() <= 1e-6);
        }
    }
    assert_eq!(rows[10], vec![0.0, 0.0, 0.0]);
    let summary = text.lines().find(|l| l.starts_with("# max pairwise deviation")).unwrap();
    let dev: f64 = summary.rsplit(' ').next().unwrap().parse().unwrap();
    assert!(dev <= 1e-6);
}

#[test]
fn cf_gaussian_row() {
    let g = data("gaussian.json");
    let rows = cf_rows(&stdout_of(&["cf", "--in", g.to_str().unwrap(), "--ymin", "-3", "--ymax", "3", "--points", "7"]));
    let row = rows.iter().find(|r| r[0] == 3.0).unwrap();
    assert!((row[1] + 1.5).abs() < 1e-15 && row[2] == 0.0);
}

#[test]
fn classify_poisson_is_order_zero() {
    let p = data("poisson.json");
    let out = levycalc().args(["classify", "--in", p.to_str().unwrap(), "--grid-points", "100"]).output().unwrap();
    assert!(out.status.success());
    let report: ClassReport = parse(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(report.order, 0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("order 0"));
}

#[test]
fn classify_j_image_document() {
    let dir = Scratch::new("classify");
    let out = dir.path().join("j2.json");
    let p = data("two_atom.json");
    assert_eq!(code(&["transform", "--in", p.to_str().unwrap(), "--alpha", "2", "--out", out.to_str().unwrap()]), 0);
    let report: ClassReport = parse(&stdout_of(&["classify", "--in", out.to_str().unwrap(), "--max-order", "3"])).unwrap();
    assert_eq!(report.order, 2);
}

#[test]
fn simulate_is_deterministic_across_threads() {
    let p = data("two_atom.json");
    let run = |threads: &str, format: &str| {
        levycalc()
            .args(["simulate", "--in", p.to_str().unwrap(), "--alpha", "0.5", "--samples", "40000", "--seed", "9"])
            .args(["--format", format, "--threads", threads, "--no-header"])
            .output()
            .unwrap()
    };
    let (a, b) = (run("1", "csv"), run("3", "csv"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    let bin = run("2", "bin").stdout;
    assert_eq!(bin.len(), 40000 * 8);
    let from_bin: Vec<f64> = bin.chunks(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let from_csv: Vec<f64> = String::from_utf8(a.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(from_bin, from_csv);
}

#[test]
fn simulate_summary_document() {
    let dir = Scratch::new("simulate");
    let (out, summary) = (dir.path().join("x.csv"), dir.path().join("s.json"));
    let p = data("poisson.json");
    let o = levycalc()
        .args(["simulate", "--in", p.to_str().unwrap(), "--samples", "100000", "--seed", "1"])
        .args(["--out", out.to_str().unwrap(), "--summary", summary.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = parse(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(v["n"], 100000);
    assert!(v["within_3se"].as_f64().unwrap() >= 0.9);
    let seed: LevyTriple = serde_json::from_value(v["seed_spec"].clone()).unwrap();
    assert_eq!(seed, LevyTriple::poisson(1.0));
    let lines = std::fs::read_to_string(&out).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(lines, 100000);
}

#[test]
fn verify_special_passes() {
    let o = run(&["verify", "--suite", "special"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("PASS moment identities"));
    assert!(!text.contains("FAIL"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn hyperbolic_reports_verdict() {
    let out = levycalc().args(["hyperbolic", "--no-header"]).output().unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["psi_s_verdict"]["matches"], "candidate_b");
    assert_eq!(v["rows"].as_array().unwrap().len(), 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("2t coth t"));
}

#[test]
fn no_header_output_is_byte_stable() {
    let p = data("two_atom.json");
    let args = ["transform", "--in", p.to_str().unwrap(), "--alpha", "0.7", "--no-header"];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}
