use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn giantcz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_giantcz"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.toml");
    fs::write(
        &path,
        "preset = \"4a\"\n[system]\nnum_sites = 30\n[solver]\nt_max_J = 20.0\ndt_J = 0.5\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(giantcz(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(giantcz(&["fidelity"]).status.code(), Some(2));
    assert_eq!(giantcz(&["fidelity", "--preset", "4a", "--config", "x.toml"]).status.code(), Some(2));
}

#[test]
fn config_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "preset = \"4a\"\n[system]\nfoo = 1\n").unwrap();
    let out = giantcz(&["fidelity", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("foo"));

    let missing = dir.path().join("absent.toml");
    assert_eq!(giantcz(&["dynamics", "--config", missing.to_str().unwrap()]).status.code(), Some(3));
    assert_eq!(giantcz(&["dynamics", "--preset", "nope"]).status.code(), Some(3));
}

#[test]
fn presets_lists_every_alias() {
    let out = giantcz(&["presets"]);
    assert!(out.status.success());
    let text = stdout(&out);
    for alias in ["2d", "2e", "3c", "3d", "3e", "4a", "4b"] {
        assert!(text.lines().any(|l| l.split_whitespace().nth(1) == Some(alias)), "{alias}");
    }
}

#[test]
fn two_point_dark_frequencies() {
    let out = giantcz(&["df", "--two-point", "--dx", "4", "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "df");
    let mut freqs: Vec<f64> = v["solutions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["frequency"].as_f64().unwrap())
        .collect();
    freqs.sort_by(f64::total_cmp);
    assert_eq!(freqs.len(), 2);
    assert!((freqs[0] + 2f64.sqrt()).abs() < 1e-9);
    assert!((freqs[1] - 2f64.sqrt()).abs() < 1e-9);
}

#[test]
fn adjacent_points_have_no_interior_dark_frequency() {
    let out = giantcz(&["df", "--two-point", "--dx", "1"]);
    assert!(out.status.success());
    let rows = stdout(&out)
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim_start().starts_with("branch"))
        .count();
    assert_eq!(rows, 0);
}

#[test]
fn fidelity_csv_for_small_chain() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let csv = dir.path().join("f.csv");
    let out = giantcz(&["fidelity", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("t,process_fidelity,average_fidelity,phi1,phi2,trace_deficit")
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 41);
    assert!((rows[0][1] - 0.25).abs() < 1e-12);
    for r in &rows {
        assert!((r[2] - (4.0 * r[1] + 1.0) / 5.0).abs() < 1e-12);
        assert!((0.0..=1.0).contains(&r[1]));
    }
}

#[test]
fn dynamics_json_and_gnuplot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = giantcz(&["dynamics", "--config", &cfg, "--json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["trace"]["n11"][0], 1.0);
    assert_eq!(v["config"]["num_sites"], 30);

    let data = dir.path().join("d.csv");
    let script = dir.path().join("d.gp");
    let out = giantcz(&[
        "dynamics",
        "--config",
        &cfg,
        "--out",
        data.to_str().unwrap(),
        "--gnuplot",
        script.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(&data).unwrap().starts_with("t_J,n11,n20,norm\n"));
    assert!(fs::read_to_string(&script).unwrap().contains("using 1:2"));
}

#[test]
fn hamiltonian_dump_is_hermitian_without_decay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let dump = dir.path().join("h.txt");
    let out = giantcz(&["hamiltonian", "--config", &cfg, "--sector", "1", "--out", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&dump).unwrap();
    let mut entries = std::collections::HashMap::new();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let f: Vec<&str> = line.split_whitespace().collect();
        let (i, j): (usize, usize) = (f[0].parse().unwrap(), f[1].parse().unwrap());
        let (re, im): (f64, f64) = (f[2].parse().unwrap(), f[3].parse().unwrap());
        entries.insert((i, j), (re, im));
    }
    // two atoms plus 30 single-photon states
    assert!(entries.keys().all(|&(i, j)| i < 32 && j < 32));
    for (&(i, j), &(re, im)) in &entries {
        let (re_t, im_t) = entries[&(j, i)];
        assert!((re - re_t).abs() < 1e-15 && (im + im_t).abs() < 1e-15);
    }
}
