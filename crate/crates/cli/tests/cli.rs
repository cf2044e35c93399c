use std::path::Path;
use std::process::Command;

use mhdrt_cli::run::{DispersionReport, Payload};
use mhdrt_cli::to_csv;
use serde_json::Value;

const CANONICAL: &str = r#"{"params": {"rho_plus": 2, "rho_minus": 1, "mu_plus": 1, "mu_minus": 1, "g": 1, "ell": 1, "m": 1}"#;

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, format!("{CANONICAL}, {body}}}")).unwrap();
    p
}

fn mhdrt(args: &[&str], cfg: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mhdrt"))
        .args(args)
        .arg("--config")
        .arg(cfg)
        .env_remove("MHDRT_THREADS")
        .output()
        .unwrap()
}

fn json(out: &std::process::Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn mc_on_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#""field": [0, 0, 0.3]"#);
    let v = json(&mhdrt(&["mc"], &cfg));
    assert_eq!(v["payload"]["M_c"].as_f64().unwrap(), std::f64::consts::FRAC_1_SQRT_2);
    assert_eq!(v["payload"].as_object().unwrap().len(), 1);
    assert_eq!(v["metadata"]["subcommand"], "mc");
    assert_eq!(v["metadata"]["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn equal_densities_fail_with_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.json");
    std::fs::write(
        &p,
        r#"{"params": {"rho_plus": 1, "rho_minus": 1, "mu_plus": 1, "mu_minus": 1, "g": 1, "ell": 1, "m": 1}, "field": [0, 0, 1]}"#,
    )
    .unwrap();
    let out = mhdrt(&["mc"], &p);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("[rho]"));
}

const SMALL: &str = r#""field": [1, 0, 0.3], "grid": {"n_upper": 12, "n_lower": 12}, "kgrid": {"min": 0.5, "max": 30, "count": 6}"#;

#[test]
fn dispersion_csv_columns_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = mhdrt(&["dispersion", "--format", "csv"], &cfg);
    let b = mhdrt(&["dispersion", "--format", "csv", "--threads", "1"], &cfg);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "k1,k2,status,lambda,s_star,iterations");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.split(',').count() == 6));
    assert!(rows.iter().any(|r| r.contains(",unstable,")));

    let j1 = json(&mhdrt(&["dispersion"], &cfg));
    let j2 = json(&mhdrt(&["dispersion", "--seed", "99"], &cfg));
    assert_eq!(j1["payload"], j2["payload"]);
}

#[test]
fn json_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_path = dir.path().join("out.json");
    let out = mhdrt(&["dispersion", "--out", out_path.to_str().unwrap()], &cfg);
    assert!(out.status.success() && out.stdout.is_empty());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let csv = String::from_utf8(mhdrt(&["dispersion", "--format", "csv"], &cfg).stdout).unwrap();
    for (row, line) in v["payload"]["rows"].as_array().unwrap().iter().zip(csv.lines().skip(1)) {
        let cells: Vec<&str> = line.split(',').collect();
        let lam: f64 = cells[3].parse().unwrap();
        assert_eq!(row["lambda"].as_f64().unwrap().to_bits(), lam.to_bits());
        let k2: f64 = cells[1].parse().unwrap();
        assert_eq!(row["k2"].as_f64().unwrap().to_bits(), k2.to_bits());
    }
}

#[test]
fn empty_dispersion_is_header_only() {
    let p = Payload::Dispersion(DispersionReport {
        lambda_max: 0.0,
        k_argmax: [0.0, 0.0],
        rows: vec![],
    });
    assert_eq!(to_csv(&p).unwrap(), "k1,k2,status,lambda,s_star,iterations\n");
}

#[test]
fn stability_map_decreases_toward_critical_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""field": [0, 0, 0], "grid": {"n_upper": 12, "n_lower": 12}, "kgrid": {"min": 0.5, "max": 50, "count": 8}, "sweep": {"b3_min": 0.1, "b3_max": 1.0, "count": 10}"#,
    );
    let out = mhdrt(&["stability-map", "--format", "csv"], &cfg);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "b3,lambda_max,k1_argmax,k2_argmax,regime");
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 10);
    let lam: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(lam.windows(2).all(|w| w[1] <= w[0]), "{lam:?}");
    assert_eq!(*lam.last().unwrap(), 0.0);
    assert_eq!(rows[0][4], "subcritical");
    assert_eq!(rows[9][4], "supercritical");
}

#[test]
fn ivp_ledger_and_env_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""field": [0, 0, 0.3], "grid": {"n_upper": 12, "n_lower": 12}, "ivp": {"T": 1, "dt": 0.1, "seed": 4, "k": [0, 5]}"#,
    );
    let out = Command::new(env!("CARGO_BIN_EXE_mhdrt"))
        .args(["ivp", "--format", "csv", "--config"])
        .arg(&cfg)
        .env("MHDRT_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "t,kinetic,magnetic,surface,dissipation_integral,u_norm"
    );
    assert_eq!(text.lines().count(), 12);

    let a = json(&mhdrt(&["ivp"], &cfg));
    let b = json(&mhdrt(&["ivp", "--seed", "4"], &cfg));
    let c = json(&mhdrt(&["ivp", "--seed", "5"], &cfg));
    assert_eq!(a["payload"], b["payload"]);
    assert_ne!(a["payload"], c["payload"]);
    assert!(a["payload"]["max_balance_residual"].as_f64().unwrap() < 1e-12);

    let bad = Command::new(env!("CARGO_BIN_EXE_mhdrt"))
        .args(["mc", "--config"])
        .arg(&cfg)
        .env("MHDRT_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_reports_each_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#""field": [0.5, 0, 0.3], "grid": {"n_upper": 16, "n_lower": 16}, "kgrid": {"min": 1, "max": 20, "count": 5}"#,
    );
    let v = json(&mhdrt(&["verify", "--seed", "1"], &cfg));
    let checks = v["payload"]["checks"].as_array().unwrap();
    let names: Vec<&str> = checks.iter().map(|c| c["name"].as_str().unwrap()).collect();
    for n in [
        "poincare_bound",
        "trace_drift",
        "korn_drift",
        "testfn_limit",
        "fixed_point_residual",
        "quadratic_pencil",
        "energy_identity",
    ] {
        assert!(names.contains(&n), "{n} missing");
    }
    assert_eq!(v["payload"]["passed"], true, "{v}");
}
