// SPDX-License-Identifier: Apache-2.0
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sisnet"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn bipartite(k: usize, sizes: [u32; 2]) -> Value {
    let gammas = [2.0, 1.5];
    json!({
        "islands": 2,
        "strains": k,
        "sizes": sizes,
        "adjacency": [[false, true], [true, false]],
        "gamma": (0..k).map(|s| json!([[0.0, gammas[s]], [gammas[s], 0.0]])).collect::<Vec<_>>(),
        "mu": vec![json!([1.0, 1.0]); k],
    })
}

fn write_config(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

fn args<'a>(cmd: &'a str, config: &'a Path, out: &'a Path) -> Vec<&'a str> {
    vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]
}

#[test]
fn simulate_replicas_differ_and_rerun_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [30, 30]);
    cfg["simulate"] = json!({"initial_counts": [[5], [5]], "horizon": 3.0, "replicas": 2});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let mut first = args("simulate", &path, &a);
    first.extend(["--seed", "99"]);
    assert!(run(&first).status.success());
    let r0 = fs::read(a.join("replica_0000.csv")).unwrap();
    let r1 = fs::read(a.join("replica_0001.csv")).unwrap();
    assert_ne!(r0, r1);

    let mut again = args("simulate", &path, &b);
    again.extend(["--seed", "99", "--threads", "1"]);
    assert!(run(&again).status.success());
    for f in ["replica_0000.csv", "replica_0001.csv", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let manifest: Value = serde_json::from_slice(&fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 99);
    assert_eq!(manifest["config"]["seed"], 99);
    assert_eq!(manifest["replica_seeds"].as_array().unwrap().len(), 2);
}

#[test]
fn rerun_from_manifest_is_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(2, [40, 40]);
    cfg["converge"] = json!({
        "schedule": [[20, 20], [40, 40]],
        "y0": [[0.25, 0.25], [0.25, 0.25]],
        "horizon": 2.0, "stride": 0.05, "replicas": 4
    });
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let first = run(&args("converge", &path, &a));
    assert!(first.status.success(), "{}", stderr(&first));
    // no seed given: one is generated and echoed
    assert!(stderr(&first).contains("seed: "));
    let manifest = a.join("manifest.json");
    assert!(run(&args("converge", &manifest, &b)).status.success());
    for f in ["report.json", "report.csv", "summary.json", "manifest.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn missing_config_exits_2() {
    let o = run(&["simulate", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).starts_with("ERROR CONFIG_NOT_FOUND:"), "{}", stderr(&o));
}

#[test]
fn existing_output_is_not_replaced() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [10, 10]);
    cfg["simulate"] = json!({"initial_counts": [[1], [1]], "horizon": 1.0});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let out = tmp.path().join("o");
    assert!(run(&args("simulate", &path, &out)).status.success());
    let before = fs::read(out.join("replica_0000.csv")).unwrap();
    let mut again = args("simulate", &path, &out);
    again.extend(["--seed", "1"]);
    let o = run(&again);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERROR OUTPUT_EXISTS"));
    assert_eq!(fs::read(out.join("replica_0000.csv")).unwrap(), before);
    again.push("--overwrite");
    assert!(run(&again).status.success());
}

#[test]
fn exact_rejects_large_instances() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(2, [50, 50]);
    cfg["exact"] = json!({"initial_counts": [[1, 1], [1, 1]], "times": [1.0]});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let o = run(&args("exact", &path, &tmp.path().join("o")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERROR EXACT_TOO_LARGE"), "{}", stderr(&o));
}

#[test]
fn exact_at_time_zero_is_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [3, 3]);
    cfg["exact"] = json!({"initial_counts": [[1], [1]], "times": [0.0], "replicas": 50, "export_generator": true});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let out = tmp.path().join("o");
    assert!(run(&args("exact", &path, &out)).status.success());
    let report: Value = serde_json::from_slice(&fs::read(out.join("exact.json")).unwrap()).unwrap();
    assert_eq!(report["checks"][0]["tv"], 0.0);
    assert_eq!(report["states"], 16);
    let gen = fs::read_to_string(out.join("generator.txt")).unwrap();
    assert!(gen.lines().all(|l| l.split(' ').count() == 3));
}

#[test]
fn shipped_exact_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&args("exact", &example("exact33.json"), &tmp.path().join("o")));
    assert!(o.status.success(), "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
}

#[test]
fn martingale_needs_an_ensemble() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [100, 100]);
    cfg["martingale"] = json!({"schedule": [[100, 100]], "y0": [[0.25], [0.25]], "t": 1.0, "replicas": 10});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let o = run(&args("martingale", &path, &tmp.path().join("o")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERROR ENSEMBLE_TOO_SMALL"));
}

#[test]
fn martingale_from_disease_free_state_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [100, 100]);
    cfg["martingale"] = json!({"schedule": [[100, 100], [200, 200]], "initial_counts": [[0], [0]], "t": 1.0, "replicas": 100});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let out = tmp.path().join("o");
    assert!(run(&args("martingale", &path, &out)).status.success());
    let summary: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"], "PASS");
    let rows = read_csv(&out.join("martingale.csv"));
    for row in &rows[1..] {
        assert_eq!(row[5].parse::<f64>().unwrap(), 0.0);
        assert_eq!(row[6].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn shipped_martingale_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&args("martingale", &example("martingale_doubling.json"), &out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["result"], "PASS");
}

#[test]
fn schedule_ratio_mismatch_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [100, 100]);
    cfg["converge"] = json!({
        "schedule": [[100, 100], [200, 600]],
        "alpha": [[1.0, 1.0], [1.0, 1.0]],
        "y0": [[0.25], [0.25]], "horizon": 1.0, "replicas": 2
    });
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let o = run(&args("converge", &path, &tmp.path().join("o")));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERROR SCHEDULE_RATIO_MISMATCH"), "{}", stderr(&o));
}

#[test]
fn single_entry_converge_is_degenerate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = bipartite(1, [50, 50]);
    cfg["converge"] = json!({"schedule": [[50, 50]], "y0": [[0.2], [0.2]], "horizon": 1.0, "replicas": 3});
    let path = write_config(tmp.path(), "cfg.json", &cfg);
    let out = tmp.path().join("o");
    assert!(run(&args("converge", &path, &out)).status.success());
    let report: Value = serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["entries"].as_array().unwrap().len(), 1);
    assert_eq!(report["entries"][0]["errors"].as_array().unwrap().len(), 3);
    assert!(report["beta"].is_null());
    assert_eq!(read_csv(&out.join("report.csv"))[0], ["N_0", "N_1", "replica", "error"]);
}

#[test]
fn shipped_fig4_config_shows_decreasing_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let o = run(&args("converge", &example("fig4.json"), &out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    let summary: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    assert_eq!(summary["checks"].as_array().unwrap().len(), 2);
}

#[test]
fn fig4_trajectory_keeps_strong_strain_drops_weak_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(run(&args("simulate", &example("fig4.json"), &out)).status.success());
    let rows = read_csv(&out.join("replica_0000.csv"));
    assert_eq!(rows[0], ["time", "island", "strain", "event", "Y_0_0", "Y_0_1", "Y_1_0", "Y_1_1"]);
    let frac = |row: &Vec<String>, c: usize| row[4 + c].parse::<f64>().unwrap() / 4000.0;
    let (first, last) = (&rows[1], rows.last().unwrap());
    for island in 0..2 {
        let (x, y) = (2 * island, 2 * island + 1);
        assert_eq!(frac(first, x), 0.25);
        assert!(frac(last, x) > 0.4, "strong strain should approach its plateau");
        assert!(frac(last, y) < 0.1, "weak strain should decay");
    }
}

#[test]
fn meanfield_constant_solutions() {
    let tmp = tempfile::tempdir().unwrap();
    for (name, y0) in [("zero", 0.0), ("endemic", 0.5)] {
        let mut cfg = bipartite(1, [10, 10]);
        cfg["meanfield"] = json!({"alpha": [[1.0, 1.0], [1.0, 1.0]], "y0": [[y0], [y0]], "horizon": 5.0, "stride": 0.5});
        let path = write_config(tmp.path(), &format!("{name}.json"), &cfg);
        let out = tmp.path().join(name);
        assert!(run(&args("meanfield", &path, &out)).status.success());
        let rows = read_csv(&out.join("meanfield.csv"));
        assert_eq!(rows[0], ["t", "y_0_0", "y_1_0"]);
        assert_eq!(rows.len(), 12);
        for row in &rows[1..] {
            for cell in &row[1..] {
                assert_eq!(cell.parse::<f64>().unwrap(), y0, "{name}");
            }
        }
    }
}

#[test]
fn meanfield_two_strains_weaker_dies_out() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(run(&args("meanfield", &example("fig4.json"), &out)).status.success());
    let rows = read_csv(&out.join("meanfield.csv"));
    let last: Vec<f64> = rows.last().unwrap()[1..].iter().map(|c| c.parse().unwrap()).collect();
    assert!((last[0] - 0.5).abs() < 1e-3 && (last[2] - 0.5).abs() < 1e-3);
    assert!(last[1] < 1e-3 && last[3] < 1e-3);
    let eq: Value = serde_json::from_slice(&fs::read(out.join("equilibrium.json")).unwrap()).unwrap();
    assert_eq!(eq["stability"], "stable");
}

#[test]
fn validate_prints_structure_and_flags_bad_specs() {
    let o = run(&["validate", "--config", example("figure1.json").to_str().unwrap()]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["superneighbors"][0], json!([1, 4]));
    assert_eq!(v["superdegrees"], json!([2, 2, 2, 2, 2]));

    let tmp = tempfile::tempdir().unwrap();
    let mut bad = bipartite(1, [3, 3]);
    bad["adjacency"] = json!([[false, true], [false, false]]);
    let path = write_config(tmp.path(), "bad.json", &bad);
    let o = run(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("ERROR INVALID_SPEC") && stderr(&o).contains("AsymmetricAdjacency"));
}

#[test]
fn micro_writes_trajectories() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    assert!(run(&args("micro", &example("exact33.json"), &out)).status.success());
    let rows = read_csv(&out.join("replica_0001.csv"));
    assert_eq!(rows[1][3], "initial");
    assert!(rows[2..].iter().all(|r| r[3] == "infection" || r[3] == "healing"));
}
