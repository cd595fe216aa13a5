use std::path::Path;
use std::process::{Command, Output};

fn trispec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn gen_hyperbolic_writes_a_valid_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let o = trispec(dir.path(), &["gen", "hyperbolic", "--k", "2", "--out", "th2.json"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let o = trispec(dir.path(), &["stats", "th2.json"]);
    let rows = data_rows(&stdout(&o));
    let get = |k: &str| rows.iter().find(|r| r[0] == k).unwrap()[1].clone();
    assert_eq!(get("vertices"), "37");
    assert_eq!(get("euler_characteristic"), "2");
    let o = trispec(dir.path(), &["validate", "th2.json", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"valid\": true"));
}

#[test]
fn css_finds_the_ring_state() {
    let dir = tempfile::tempdir().unwrap();
    assert!(trispec(dir.path(), &["gen", "ring-patch", "--out", "ring.json"]).status.success());
    assert!(trispec(dir.path(), &["gen", "tube", "--rings", "7", "--out", "tube.json"]).status.success());
    let o = trispec(
        dir.path(),
        &["css", "--patch", "ring.json", "--t", "-1.3333333", "--tol", "1e-8", "--host", "tube.json"],
    );
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r[0] == "0"));
    let lambda: f64 = rows[0][1].parse().unwrap();
    assert!((lambda + 4.0 / 3.0).abs() < 1e-12);
    let host: f64 = rows[0][3].parse().unwrap();
    assert!(host < 1e-8);
}

#[test]
fn ids_grid_gives_one_row_per_stage() {
    let dir = tempfile::tempdir().unwrap();
    let o = trispec(dir.path(), &["ids", "--measure", "grid", "--stages", "2,3,4", "--phi", "step"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    let text = stdout(&o);
    assert!(text.starts_with("# columns: stage [1]"));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(), ["2", "3", "4"]);
    assert!(rows[0][5].is_empty() && !rows[1][5].is_empty());
}

#[test]
fn usage_and_computation_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(trispec(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(trispec(dir.path(), &["gen", "double-grid", "--k", "2"]).status.code(), Some(2));
    assert_eq!(trispec(dir.path(), &["spectrum", "missing.json"]).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), "{\"faces\": [[0,1,2]], \"degree_bound\": 3}").unwrap();
    assert_eq!(trispec(dir.path(), &["stats", "bad.json"]).status.code(), Some(1));
    let o = trispec(dir.path(), &["--version"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("target"));
}

#[test]
fn run_is_deterministic_and_hashes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "generator = \"hyperbolic\"\nk = 3\nout = \"a\"\n";
    std::fs::write(dir.path().join("hyp.toml"), cfg).unwrap();
    let o = trispec(dir.path(), &["run", "--config", "hyp.toml"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    for f in ["theta-words.csv", "ids.csv", "stages.csv", "manifest.json"] {
        assert!(dir.path().join("a").join(f).exists(), "{f}");
    }
    let o = Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(["run", "--config", "hyp.toml", "--out", "b"])
        .env("TRISPEC_WORKERS", "3")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success());
    for f in ["theta-words.csv", "ids.csv", "stages.csv"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let m: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/manifest.json")).unwrap()).unwrap();
    let outputs = m["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 3);
    assert!(outputs.iter().all(|o| o["sha256"].as_str().unwrap().len() == 64));
}

#[test]
fn missing_seed_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("g.toml"), "generator = \"grid\"\nstages = [2]\n").unwrap();
    let o = trispec(dir.path(), &["run", "--config", "g.toml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn bad_worker_count_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_trispec"))
        .args(["gen", "tetrahedron"])
        .env("TRISPEC_WORKERS", "zero")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn walk_and_metric() {
    let dir = tempfile::tempdir().unwrap();
    assert!(trispec(dir.path(), &["gen", "tetrahedron", "--out", "tet.json"]).status.success());
    let o = trispec(dir.path(), &["walk", "tet.json", "--start", "0", "--n", "1"]);
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| (r[1].parse::<f64>().unwrap() - 1.0 / 3.0).abs() < 1e-15));
    let o = trispec(dir.path(), &["metric", "tet.json", "tet.json", "--a-dart", "0->1", "--b-dart", "2->3"]);
    let rows = data_rows(&stdout(&o));
    assert_eq!(rows[0][5], "true");
    let o = trispec(dir.path(), &["metric", "tet.json", "tet.json"]);
    assert_eq!(o.status.code(), Some(2));
}
