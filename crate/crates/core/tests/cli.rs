use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn fppb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fppb")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, value: &Value) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn experiment_one(horizon: usize, reps: usize) -> Value {
    json!({
        "instance": {
            "kind": "process",
            "intensity": { "kind": "linear", "c0": 20.0, "c1": -20.0 },
            "filter": { "kind": "exponential", "scale": 1.0 }
        },
        "m": 20.0, "lambda_max": 20.0, "horizon": horizon, "seed": 5, "replications": reps
    })
}

fn run_ok(args: &[&str]) {
    let out = fppb(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn simulate_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &experiment_one(3, 1));
    let out = dir.path().join("sim");
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "t,a_t,b_t,reward,instant_regret,cum_regret");
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[2].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn cumulative_column_is_prefix_sum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &experiment_one(400, 1));
    let out = dir.path().join("sim");
    run_ok(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "9"]);
    let mut sum = 0.0;
    for row in csv_rows(&out.join("trajectory.csv")) {
        sum += row[4].parse::<f64>().unwrap();
        assert!((row[5].parse::<f64>().unwrap() - sum).abs() <= 1e-9);
    }
}

#[test]
fn experiment_summary_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &experiment_one(300, 1));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for o in [&a, &b] {
        run_ok(&["experiment", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap()]);
    }
    for f in ["curve.csv", "summary.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert!((summary["z_star"].as_f64().unwrap() - 0.586).abs() < 0.002);
    assert!((summary["optimum_value"].as_f64().unwrap() - 4.61).abs() < 0.01);
    assert_eq!(summary["terminal_regret_se"].as_f64().unwrap(), 0.0);
    let header = std::fs::read_to_string(a.join("curve.csv")).unwrap();
    assert!(header.starts_with("t,avg_cum_regret\n"));
    assert_eq!(csv_rows(&a.join("curve.csv")).len(), 300);
}

#[test]
fn overrides_change_replications_and_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.json", &experiment_one(300, 1));
    let o = dir.path().join("o");
    run_ok(&["experiment", "--config", cfg.to_str().unwrap(), "--out", o.to_str().unwrap(), "--reps", "3", "--horizon", "500"]);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(o.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["replications"], 3);
    assert_eq!(summary["horizon"], 500);
    assert!(summary["terminal_regret_se"].as_f64().unwrap() > 0.0);
}

#[test]
fn cells_tile_the_interval() {
    let dir = tempfile::tempdir().unwrap();
    let horizon = 2000;
    let cfg = write_config(dir.path(), "c.json", &experiment_one(horizon, 1));
    let out = dir.path().join("cells");
    run_ok(&["cells", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = std::fs::read_to_string(out.join("cells.csv")).unwrap();
    assert!(text.starts_with("x,y,effective_samples,index,lambda_hat\n"));
    let rows = csv_rows(&out.join("cells.csv"));
    assert!(rows.len() > 1 && rows.len() <= horizon + 1);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows.last().unwrap()[1].parse::<f64>().unwrap(), 1.0);
    for w in rows.windows(2) {
        assert_eq!(w[0][1], w[1][0]);
    }
}

fn validate(dir: &Path, config: &Value) -> (i32, Value) {
    let cfg = write_config(dir, "v.json", config);
    let out = dir.join("validate");
    let res = fppb(&["validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let report = serde_json::from_str(&std::fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    (res.status.code().unwrap(), report)
}

fn check<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).expect(name)
}

#[test]
fn validate_reports_each_check() {
    let dir = tempfile::tempdir().unwrap();
    let (code, report) = validate(dir.path(), &experiment_one(10, 1));
    assert_eq!(code, 0);
    assert_eq!(report["passed"], true);

    let flat = json!({
        "instance": { "kind": "continuum_lb", "x_star": 0.5, "epsilon": 0.1,
                      "filter": { "kind": "constant", "gamma": 1.0 } },
        "m": 1.0, "lambda_max": 5.0, "horizon": 10
    });
    let (code, report) = validate(dir.path(), &flat);
    assert_eq!(code, 1);
    assert_eq!(check(&report, "gamma_lower_bound_condition")["passed"], false);

    let mut steep = experiment_one(10, 1);
    steep["instance"]["intensity"] = json!({ "kind": "linear", "c0": 25.0, "c1": -25.0 });
    steep["m"] = json!(30.0);
    let (code, report) = validate(dir.path(), &steep);
    assert_eq!(code, 1);
    assert_eq!(check(&report, "rate_bound")["passed"], false);
    assert_eq!(check(&report, "lipschitz")["passed"], true);

    let bad_lb = json!({
        "instance": { "kind": "fpmab_lb", "good_arm": 1, "epsilon": 0.1, "gamma": [1.0, 0.95] },
        "horizon": 10
    });
    let (code, report) = validate(dir.path(), &bad_lb);
    assert_eq!(code, 1);
    assert_eq!(check(&report, "filter_ratio_condition")["detail"]["violating_arm"], 1);
}

fn fpmab_means(dir: &Path, instance: Value, policy: &str, horizon: usize) -> (Vec<Vec<String>>, f64) {
    let cfg = write_config(dir, "f.json", &json!({ "instance": instance, "horizon": horizon, "seed": 3 }));
    let out = dir.join("fpmab");
    run_ok(&["fpmab", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--policy", policy]);
    let rows = csv_rows(&out.join("fpmab.csv"));
    let mean = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum::<f64>() / rows.len() as f64;
    (rows, mean)
}

#[test]
fn fpmab_uniform_mean_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let k = 4.0;
    let eps = 0.2;
    let instance = json!({ "kind": "fpmab_lb", "good_arm": 2, "epsilon": eps, "gamma": [1.0, 0.7, 0.4, 0.2] });
    let n = 40_000;
    let (rows, mean) = fpmab_means(dir.path(), instance, "uniform", n);
    let want = (k - 1.0 + 1.0 + eps) / k;
    assert!((mean - want).abs() < 4.0 * (1.2f64 / n as f64).sqrt(), "{mean} vs {want}");
    for r in &rows {
        let arm: usize = r[1].parse().unwrap();
        let per: Vec<u64> = r[5..5 + arm].iter().map(|v| v.parse().unwrap()).collect();
        assert_eq!(per.iter().sum::<u64>(), r[2].parse::<u64>().unwrap());
        assert!(r[5 + arm..].iter().all(String::is_empty));
    }
}

#[test]
fn fpmab_flat_instance_means_are_one() {
    let dir = tempfile::tempdir().unwrap();
    let instance = json!({ "kind": "fpmab_lb", "good_arm": 1, "epsilon": 0.0, "gamma": [1.0, 0.6, 0.3] });
    let (rows, _) = fpmab_means(dir.path(), instance, "uniform", 30_000);
    for arm in 1..=3 {
        let pulls: Vec<f64> = rows.iter().filter(|r| r[1] == arm.to_string()).map(|r| r[2].parse().unwrap()).collect();
        let mean = pulls.iter().sum::<f64>() / pulls.len() as f64;
        assert!((mean - 1.0).abs() < 4.0 / (pulls.len() as f64).sqrt(), "arm {arm}: {mean}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = fppb(&["simulate", "--config", dir.path().join("none.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());

    let mut unknown = experiment_one(10, 1);
    unknown["colour"] = json!("red");
    let cfg = write_config(dir.path(), "u.json", &unknown);
    let res = fppb(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("colour"));

    assert_eq!(fppb(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(fppb(&["--help"]).status.code(), Some(0));

    // output directory collides with a regular file: a run-time failure
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "ok.json", &experiment_one(5, 1));
    let res = fppb(&["simulate", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}
