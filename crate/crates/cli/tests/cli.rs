use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn example(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/examples").join(name)
}

fn whitney(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_whitney"))
        .args(args)
        .env_remove("WHITNEY_CONSTANTS")
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn arg(p: &std::path::Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn seminorm_of_polynomial_jet_is_zero() {
    let out = whitney(&["jet-seminorm", "--problem", arg(&example("plane.json"))]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert_eq!(text(&out.stdout), "0.0\n");
}

#[test]
fn partition_suite_passes_on_every_example() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["plane.json", "sqrt.json", "bump.json"] {
        let report = dir.path().join(format!("{name}.report.json"));
        let out = whitney(&["verify", "--problem", arg(&example(name)), "--suite", "partition", "--out", arg(&report)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", text(&out.stdout));
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert_eq!(v["pass"], Value::Bool(true));
        assert_eq!(v["constants_sha256"].as_str().unwrap().len(), 64);
        assert!(v["seed"].is_u64());
    }
}

#[test]
fn verify_reports_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |k: usize| {
        let p = dir.path().join(format!("r{k}.json"));
        let out = whitney(&["verify", "--problem", arg(&example("sqrt.json")), "--suite", "cubes,lemma32", "--seed", "3", "--out", arg(&p)]);
        assert_eq!(out.status.code(), Some(0), "{}{}", text(&out.stdout), text(&out.stderr));
        std::fs::read(&p).unwrap()
    };
    assert_eq!(run(0), run(1));
}

#[test]
fn far_windows_beyond_a_bounded_set_report_zero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("far.csv");
    let out = whitney(&[
        "profile", "--problem", arg(&example("bump.json")), "--scale", "far", "--deltas", "1,4,16,64", "--out", arg(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("vacuous"));
    let body = std::fs::read_to_string(&csv).unwrap();
    let mut beyond = 0;
    for line in body.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2], "far");
        let delta: f64 = cols[0].parse().unwrap();
        if delta > 10.0 {
            beyond += 1;
            assert_eq!(cols[1].parse::<f64>().unwrap(), 0.0, "{line}");
        }
    }
    assert_eq!(beyond, 4, "two forms times two deltas beyond max|E|");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("far.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "profile");
    assert_eq!(meta["vacuous_far_windows"], 4);
    assert_eq!(meta["seed"], 7);
}

#[test]
fn csv_outputs_carry_a_meta_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cubes.csv");
    let out = whitney(&["decompose", "--problem", arg(&example("sqrt.json")), "--min-generation", "-6", "--out", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let header = std::fs::read_to_string(&csv).unwrap();
    assert!(header.starts_with("generation,a1,side,p_q,dist_q\n"));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("cubes.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["command"], "decompose");
    assert_eq!(meta["constants_source"], "builtin");
    assert_eq!(meta["seed"], 20261015);
    assert_eq!(meta["constants_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn extension_reproduces_the_plane() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.json");
    std::fs::write(&pts, "[[0.3, -0.2], [2.0, 2.0], [-1.5, 0.7]]").unwrap();
    let out = whitney(&["extend", "--problem", arg(&example("plane.json")), "--points", arg(&pts), "--order", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let body = text(&out.stdout);
    let mut lines = body.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name} in {header:?}"));
    let (x1, x2) = (col("x1"), col("x2"));
    let mut rows = 0;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let expected = 1.0 + 2.0 * v[x1] - v[x2];
        assert!((v[x2 + 1] - expected).abs() < 1e-12, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 3);
}

#[test]
fn unknown_command_exits_2() {
    let out = whitney(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).to_lowercase().contains("usage"));
}

#[test]
fn schema_errors_exit_2_with_the_offending_path() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let good = std::fs::read_to_string(example("sqrt.json")).unwrap();
    std::fs::write(&bad, good.replace("\"alpha\": 0.5", "\"alpha\": 1.5")).unwrap();
    let out = whitney(&["jet-seminorm", "--problem", arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("alpha must lie in (0,1)"), "{}", text(&out.stderr));

    std::fs::write(&bad, good.replacen("\"point\": 0", "\"point\": \"zero\"", 1)).unwrap();
    let out = whitney(&["jet-seminorm", "--problem", arg(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("coefficients[0].point"), "{}", text(&out.stderr));
}

#[test]
fn constants_flag_overrides_the_builtin_file() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.json");
    let builtin = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/constants/frozen.json")).unwrap();
    std::fs::write(&c, builtin.replace("\"seed\": 20261015", "\"seed\": 99")).unwrap();
    let csv = dir.path().join("p.csv");
    let out = whitney(&["--constants", arg(&c), "profile", "--problem", arg(&example("sqrt.json")), "--out", arg(&csv)]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("p.csv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 99);
    assert_eq!(meta["constants_source"], arg(&c));

    std::fs::write(&c, "{\"seed\": 1}").unwrap();
    let out = whitney(&["--constants", arg(&c), "jet-seminorm", "--problem", arg(&example("sqrt.json"))]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
}
