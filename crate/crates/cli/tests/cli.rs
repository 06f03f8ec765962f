use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn warpgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpgeom")).args(args).output().expect("binary runs")
}

fn config(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is json")
}

fn error(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice::<Value>(&out.stderr).expect("stderr is json")["error"].clone()
}

const DIAGONAL: &str = "[algebra]\nkind = \"diagonal\"\na = [1, \"1/2\"]\n\n[deformation]\ntheta = [[0.0, 0.1], [-0.1, 0.0]]\n";

#[test]
fn diagonal_algebra_is_consistent() {
    let cfg = config(DIAGONAL);
    let out = warpgeom(&["check-jacobi", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["max_residual"]["exact"], "0");
    assert_eq!(v["consistent"], true);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn inconsistent_extended_algebra_exits_one() {
    let cfg = config("[algebra]\nkind = \"extended2d\"\na = 1\ne = 1\nf = 1\nh = 1\nr = 1\ns = 0\n");
    let out = warpgeom(&["check-jacobi", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["consistent"], false);
    assert!(v["constraints"].as_array().unwrap().iter().any(|c| c["exact"] != "0"));
}

#[test]
fn centrality_reports_omega() {
    let out = warpgeom(&["centrality", "--n", "3", "--theta", "0.1", "--order", "8"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["omega"].as_f64().unwrap() - 10.0 / 3.0).abs() < 1e-14);
    assert_eq!(v["consistent"], false);
    assert!(!v["residual"]["failing"].as_array().unwrap().is_empty());

    let strict = warpgeom(&["centrality", "--n", "3", "--theta", "0.1", "--order", "8", "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
    let two_d = warpgeom(&["centrality", "--n", "1", "--theta", "0.25", "--strict"]);
    assert_eq!(two_d.status.code(), Some(0));
    assert_eq!(json(&two_d)["residual"]["exact_zero"], true);
}

#[test]
fn dust_cosmology_csv_follows_two_thirds_law() {
    let out = warpgeom(&["cosmology", "--theta", "0", "--C", "1", "--samples", "101"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# schema_version=1"));
    assert_eq!(lines.next(), Some("t,a,adot,rho"));
    let mut rows = 0;
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        rows += 1;
        if cols[0] >= 0.1 {
            let exact = (1.5 * cols[0]).powf(2.0 / 3.0);
            assert!((cols[1] - exact).abs() <= 1e-6 * exact, "{line}");
        }
    }
    assert_eq!(rows, 101);
}

#[test]
fn cosmology_json_carries_residuals() {
    let out = warpgeom(&["cosmology", "--theta", "0.5", "--C", "1", "--a0", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["residuals"]["continuity"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["trajectory"]["a"].as_array().unwrap().len(), 201);
}

#[test]
fn config_errors_are_distinct_and_anchored() {
    let zero = config("[algebra]\na = [1, 0]\n");
    let e = error(&warpgeom(&["check-jacobi", "--config", zero.path().to_str().unwrap()]));
    assert_eq!(e["code"], "config.zero_a_component");
    assert_eq!((e["line"].as_u64(), e["column"].as_u64()), (Some(2), Some(5)));

    let skew = config("[algebra]\na = [1, 1]\n\n[deformation]\ntheta = [[0, 0.1], [0.1, 0]]\n");
    let e = error(&warpgeom(&["deform", "--config", skew.path().to_str().unwrap()]));
    assert_eq!(e["code"], "config.nonskew_theta");
    assert_eq!(e["line"], 5);

    let broken = config("[algebra\na = 1\n");
    assert_eq!(error(&warpgeom(&["check-jacobi", "--config", broken.path().to_str().unwrap()]))["code"], "config.syntax");

    let unknown = config("[algebra]\na = [1]\ncolour = 3\n");
    assert_eq!(error(&warpgeom(&["check-jacobi", "--config", unknown.path().to_str().unwrap()]))["code"], "config.syntax");

    assert_eq!(error(&warpgeom(&["check-jacobi"]))["code"], "config.missing_section");
    assert_eq!(error(&warpgeom(&["cosmology", "--C", "0", "--a0", "0"]))["code"], "cosmology.singular_start");
    assert_eq!(error(&warpgeom(&["metric", "--format", "csv"]))["code"], "usage");
    assert_eq!(warpgeom(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn curvature_output_is_deterministic() {
    let cfg = config(
        "[algebra]\na = [1.0, 0.5, -0.5, 2.0]\n\n[deformation]\ntime_space = [0.2, -0.2, 0.05]\n\n[metric]\nfamily = \"deformed-frw\"\n",
    );
    let path = cfg.path().to_str().unwrap();
    let first = warpgeom(&["curvature", "--config", path, "--points", "20", "--seed", "3"]);
    let second = warpgeom(&["curvature", "--config", path, "--points", "20", "--seed", "3"]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v = json(&first);
    assert_eq!(v["field_equations"]["pressure"]["leading_order"], 2);
    assert!(v["field_equations"]["momentum"].as_array().unwrap().iter().all(|m| m["identically_zero"] == true));
    assert!(v["sampling"]["oracle_max_relative"].as_f64().unwrap() <= 1e-6);

    // linear and integer powers vanish at t = 0, so sampling must stay at t > 0
    for base in ["t", "2*t", "t^2"] {
        let out = warpgeom(&["curvature", "--config", path, "--points", "10", "--scale-factor", base]);
        assert_eq!(out.status.code(), Some(0), "{base}");
    }
}

#[test]
fn deform_and_metric_subcommands() {
    let cfg = config(DIAGONAL);
    let path = cfg.path().to_str().unwrap();
    let v = json(&warpgeom(&["deform", "--config", path, "--word", "dx0*dx1"]));
    let exps = &v["metric"]["exponents"];
    assert_eq!(exps[0][1].as_f64(), Some(-0.2));
    assert_eq!(exps[1][0].as_f64(), Some(0.1));
    assert_eq!(v["words"][0]["terms"][0]["word"], "dx0*dx1");

    let frw = json(&warpgeom(&["metric", "--family", "frw", "--hubble", "0.7"]));
    for mu in 1..4 {
        assert_eq!(frw["metric"]["exponents"][mu][0].as_f64(), Some(0.7));
    }
    // a time-space Θ has no ultra-static metric
    let us = error(&warpgeom(&["metric", "--config", path, "--family", "ultrastatic"]));
    assert_eq!(us["code"], "spacetimes.time_space_entry");
}

#[test]
fn operators_pass_and_write_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("ops.json");
    let out = warpgeom(&["verify-operators", "--dim", "48", "--trend", "--out", target.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["trend"]["decreasing"], true);
    assert!(v["residuals"]["ccr"].as_f64().unwrap() <= 1e-10);
}
