//! End-to-end checks of the `biharm` binary: exit codes, output files,
//! and flag overrides.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biharm"))
}

fn write_config(dir: &Path, value: &Value) -> std::path::PathBuf {
    let path = dir.join("job.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn manufactured_config(nodes: u64) -> Value {
    json!({
        "map": {"kind": "disk", "radius": 1.0},
        "boundary_data": {"kind": "manufactured", "function": "zeta2"},
        "nodes": nodes,
        "lattice": {"nx": 11, "ny": 11, "margin": 0.25}
    })
}

#[test]
fn solve_writes_outputs_and_exits_zero() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &manufactured_config(64));
    let out = dir.path().join("out");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    for name in ["densities.csv", "field.csv", "diagnostics.json"] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let diag: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["nullspace_dim"], 1);
    assert_eq!(diag["n"], 64);
    let densities = std::fs::read_to_string(out.join("densities.csv")).unwrap();
    assert!(densities.starts_with("theta,s,g1,g3"));
    assert_eq!(densities.lines().count(), 65);
}

#[test]
fn nodes_flag_overrides_config() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &manufactured_config(64));
    let out = dir.path().join("out");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--nodes",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let diag: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap())
            .unwrap();
    assert_eq!(diag["n"], 32);
}

#[test]
fn odd_node_override_is_rejected() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &manufactured_config(64));
    let result = run(&["solve", "--config", config.to_str().unwrap(), "--nodes", "33"]);
    assert_eq!(result.status.code(), Some(1));
    assert!(!result.stderr.is_empty());
}

#[test]
fn incompatible_data_is_flagged_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let n = 64usize;
    // rotational field (-y, x): circulation 2*area, not solvable
    let thetas: Vec<f64> = (0..n)
        .map(|j| 2.0 * std::f64::consts::PI * j as f64 / n as f64)
        .collect();
    let config = write_config(
        dir.path(),
        &json!({
            "map": {"kind": "disk", "radius": 1.0},
            "boundary_data": {
                "kind": "samples",
                "u1": thetas.iter().map(|t| -t.sin()).collect::<Vec<_>>(),
                "u3": thetas.iter().map(|t| t.cos()).collect::<Vec<_>>()
            },
            "nodes": n,
            "lattice": {"nx": 11, "ny": 11, "margin": 0.25}
        }),
    );
    let out = dir.path().join("out");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(2), "{result:?}");
    let diag: Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("diagnostics.json")).unwrap())
            .unwrap();
    let defect = diag["solvability_defect"].as_f64().unwrap();
    assert!((defect - 2.0 * std::f64::consts::PI).abs() < 1e-6, "defect {defect}");
}

#[test]
fn principal_data_solves_end_to_end() {
    let dir = TempDir::new().unwrap();
    let n = 64usize;
    // compatible normal data: omega2 = cos(theta) integrates to zero
    let omega2: Vec<f64> = (0..n)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64).cos())
        .collect();
    let config = write_config(
        dir.path(),
        &json!({
            "map": {"kind": "disk", "radius": 1.0},
            "boundary_data": {
                "kind": "principal",
                "omega1_prime": vec![0.0; n],
                "omega2": omega2
            },
            "nodes": n,
            "lattice": {"nx": 11, "ny": 11, "margin": 0.25}
        }),
    );
    let out = dir.path().join("out");
    let result = run(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
}

#[test]
fn malformed_config_exits_one() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{not json").unwrap();
    let result = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&result.stderr).contains("error"));
}

#[test]
fn verify_passes_and_fails_by_resolution() {
    let dir = TempDir::new().unwrap();
    let config = write_config(dir.path(), &manufactured_config(128));
    let ok = run(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0), "{ok:?}");
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.contains("PASS"), "{stdout}");

    let coarse = run(&["verify", "--config", config.to_str().unwrap(), "--nodes", "8"]);
    assert_eq!(coarse.status.code(), Some(1), "{coarse:?}");
    assert!(String::from_utf8_lossy(&coarse.stdout).contains("FAIL"));
}

#[test]
fn kernel_dump_covers_finite_and_infinite_rows() {
    let dir = TempDir::new().unwrap();
    let config = write_config(
        dir.path(),
        &json!({
            "map": {"kind": "polynomial", "coefficients": [[1.0, 0.0], [0.0, 0.0], [0.1, 0.0]]},
            "boundary_data": {"kind": "manufactured", "function": "zeta"},
            "nodes": 16
        }),
    );
    for t in ["0.5", "-2.0", "inf"] {
        let out = dir.path().join(format!("kernel_{t}.csv"));
        let result = run(&[
            "kernel",
            "--config",
            config.to_str().unwrap(),
            "--t",
            t,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(0), "t={t}: {result:?}");
        let text = std::fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("theta,s,"), "t={t}");
        assert_eq!(text.lines().count(), 17, "t={t}");
    }
}
