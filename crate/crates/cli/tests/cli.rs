use std::path::Path;
use std::process::{Command, Output};

use meissner_core::field_solver::analytic_constant_g;
use meissner_core::RadialGrid;

fn meissner(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meissner")).args(args).output().expect("binary runs")
}

fn read_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_owned).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(str::to_owned).collect()).collect();
    (header, rows)
}

fn scalar(path: &Path, name: &str) -> String {
    let (_, rows) = read_table(path);
    rows.into_iter().find(|r| r[0] == name).unwrap_or_else(|| panic!("no scalar {name}"))[1].clone()
}

#[test]
fn constant_density_field_matches_bessel_solution() {
    let dir = tempfile::tempdir().unwrap();
    let density = dir.path().join("g.csv");
    std::fs::write(&density, "rho,g\n0,1\n0.5,1\n1,1\n").unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        format!("mode = \"solve-field\"\nkappa = 10.0\nboundary_b = 0.9\ngrid_n = 801\ntol = 1e-12\ndensity_file = {:?}\n", density),
    )
    .unwrap();
    let out = dir.path().join("field.csv");
    let status = meissner(&["--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));

    let (header, rows) = read_table(&out);
    assert_eq!(header, ["rho", "B", "a"]);
    assert_eq!(rows.len(), 801);
    let exact = analytic_constant_g(1.0, 10.0, 0.9, RadialGrid::cylinder(801).unwrap()).unwrap();
    let err = rows
        .iter()
        .zip(exact.values())
        .map(|(r, e)| (r[1].parse::<f64>().unwrap() - e).abs())
        .fold(0.0, f64::max);
    assert!(err < 5e-6, "sup error {err}");
    assert_eq!(scalar(&dir.path().join("field.scalars.csv"), "method"), "picard");
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(&config, "mode = \"solve-field\"\nkappa = 10.0\ndensity = 1.0\ngrid_n = 201\n").unwrap();
    let out = dir.path().join("f.csv");
    let status = meissner(&[
        "--config",
        config.to_str().unwrap(),
        "--kappa",
        "0",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let (_, rows) = read_table(&out);
    assert!(rows.iter().all(|r| (r[1].parse::<f64>().unwrap() - 0.9).abs() < 1e-15));
}

#[test]
fn verify_passes_on_defaults() {
    let out = meissner(&["--mode", "verify"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.starts_with("check,status,value\n"));
    assert!(!stdout.contains(",fail,"));
    assert!(stdout.contains("density_above_reference,info,"));
}

#[test]
fn uncoupled_phase_report_adds_fields() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("phase.csv");
    let status = meissner(&["--mode", "phase", "--kappa", "0", "--output", out.to_str().unwrap()]);
    assert!(status.status.success());
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["name", "value"]);
    let names: Vec<&str> = rows.iter().take(3).map(|r| r[0].as_str()).collect();
    assert_eq!(names, ["H0", "HcR", "Hc0"]);
    let v: Vec<f64> = rows.iter().take(3).map(|r| r[1].parse().unwrap()).collect();
    assert!((v[2] - v[0] - v[1]).abs() <= 1e-12 * v[2]);
    let tau: f64 = scalar(&out, "tau").parse().unwrap();
    assert!((tau - 1.0).abs() < 1e-6);
}

#[test]
fn applied_field_is_classified() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("p.toml");
    std::fs::write(&config, "mode = \"phase\"\ntau = 1.0\napplied_h = 100.0\n").unwrap();
    let out = dir.path().join("p.csv");
    let status = meissner(&["--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(status.status.success());
    assert_eq!(scalar(&out, "phase"), "expelled");
}

#[test]
fn configuration_errors_exit_one() {
    let missing_kappa = meissner(&["--mode", "self-consistent"]);
    assert_eq!(missing_kappa.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing_kappa.stderr).contains("kappa"));

    let bad_mixing = meissner(&["--mode", "self-consistent", "--kappa", "1", "--mixing", "1.5"]);
    assert_eq!(bad_mixing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_mixing.stderr).contains("mixing"));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "mode = \"sweep\"\nkapa = 1.0\n").unwrap();
    let unknown_key = meissner(&["--config", config.to_str().unwrap()]);
    assert_eq!(unknown_key.status.code(), Some(1));

    assert_eq!(meissner(&["--no-such-flag"]).status.code(), Some(1));
    assert_eq!(meissner(&["--help"]).status.code(), Some(0));
}

#[test]
fn iteration_cap_exits_two() {
    let out = meissner(&["--mode", "self-consistent", "--kappa", "10", "--max-iter", "2", "--grid-n", "401"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn self_consistent_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = meissner(&[
            "--mode",
            "self-consistent",
            "--kappa",
            "5",
            "--grid-n",
            "601",
            "--output",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success());
        out
    };
    let (a, b) = (run("a.csv"), run("b.csv"));
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.history.csv")).unwrap(),
        std::fs::read(dir.path().join("b.history.csv")).unwrap()
    );
    let (header, rows) = read_table(&a);
    assert_eq!(header, ["rho", "B", "a", "g", "j_theta"]);
    assert_eq!(rows.len(), 601);
    assert_eq!(scalar(&dir.path().join("a.scalars.csv"), "converged"), "true");
}

#[test]
fn json_output_has_all_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sc.json");
    let status = meissner(&[
        "--mode",
        "self-consistent",
        "--kappa",
        "5",
        "--grid-n",
        "401",
        "--format",
        "json",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["config"]["mode"], "self-consistent");
    assert_eq!(v["config"]["kappa"], 5.0);
    assert_eq!(v["scalars"]["converged"], true);
    assert_eq!(v["columns"]["rho"].as_array().unwrap().len(), 401);
    let iterations = v["scalars"]["iterations"].as_u64().unwrap() as usize;
    assert_eq!(v["history"]["iteration"].as_array().unwrap().len(), iterations);

    let phase = meissner(&["--mode", "phase", "--kappa", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&phase.stdout).unwrap();
    assert!(v["history"].as_object().unwrap().is_empty());
    assert!(v["scalars"]["H0"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_writes_curve_and_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("s.toml");
    std::fs::write(&config, "mode = \"sweep\"\nkappa = 0.0\ngrid_n = 601\nb_values = [0.04, 0.02, 0.3]\n").unwrap();
    let out = dir.path().join("s.csv");
    let status = meissner(&["--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let (header, rows) = read_table(&out);
    assert_eq!(header, ["b_tilde", "energy", "converged", "iterations"]);
    let b: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(b, [0.02, 0.04, 0.3]);
    for r in &rows {
        let (b, e): (f64, f64) = (r[0].parse().unwrap(), r[1].parse().unwrap());
        assert!((e - b).abs() < 1e-4 * b);
    }
    let (slope_header, slopes) = read_table(&dir.path().join("s.slopes.csv"));
    assert_eq!(slope_header, ["b_mid", "slope"]);
    assert_eq!(slopes.len(), 2);
}
