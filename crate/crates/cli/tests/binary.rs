//! End-to-end checks of the `sshg` binary: exit codes, batch layout, thread control.

use std::path::Path;
use std::process::{Command, Output};

fn sshg(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sshg"));
    c.args(args).env_remove("SSHG_THREADS");
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Smallest `|k + δ|` over the lattice and the number of lattice points attaining it.
fn lowest_shell(delta: [f64; 2]) -> (f64, usize) {
    let mut norms = Vec::new();
    for k1 in -3..=3 {
        for k2 in -3..=3 {
            norms.push((k1 as f64 + delta[0]).hypot(k2 as f64 + delta[1]));
        }
    }
    let min = norms.iter().copied().filter(|&n| n > 0.0).fold(f64::INFINITY, f64::min);
    (min, norms.iter().filter(|&&n| (n - min).abs() < 1e-12).count())
}

#[test]
fn spectrum_mode_reports_the_lowest_shell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write(dir.path(), "s.json", r#"{"mode": "spectrum", "spin_delta": [0.5, 0.5]}"#);
    let o = sshg(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("run.json"));
    let (lam, modes) = lowest_shell([0.5, 0.5]);
    assert_eq!(v["spectrum"]["harmonic_dim"], 0);
    assert!((v["spectrum"]["lambda_1"].as_f64().unwrap() - lam).abs() < 1e-12);
    assert_eq!(v["spectrum"]["lambda_1_multiplicity"].as_u64().unwrap() as usize, 2 * modes);
    assert!(v["multiplicity"].is_null());

    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("index,lambda"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "1");
    assert!((first[1].parse::<f64>().unwrap() - lam).abs() < 1e-12);
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn harmonic_block_leads_the_spectrum_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let cfg = write(dir.path(), "s.json", r#"{"mode": "spectrum", "spin_delta": [0, 0], "grid_n": 16}"#);
    let o = sshg(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], &[]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect();
    assert!(rows[..4].iter().all(|r| r[0] == "0" && r[1].parse::<f64>().unwrap() == 0.0));
    assert_eq!(rows[4][0], "1");
    assert!((rows[4][1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn probe_on_an_eigenvalue_fails_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let rho = std::f64::consts::FRAC_1_SQRT_2 + 5e-10;
    let cfg = write(
        dir.path(),
        "p.json",
        &format!(r#"{{"mode": "probe", "spin_delta": [0.5, 0.5], "rho": {rho}, "output_dir": "{}"}}"#, dir.path().join("o").display()),
    );
    let o = sshg(&["solve", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Dirac eigenvalue"));
    assert!(!dir.path().join("o").join("run.json").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.json", r#"{"mode": "spectrum", "spin_delta": [0, 0], "gridn": 16}"#);
    let o = sshg(&["solve", "--config", &unknown], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gridn"));

    let mp = write(dir.path(), "m.json", r#"{"mode": "mountain_pass", "spin_delta": [0, 0], "rho": 0.5}"#);
    let o = sshg(&["solve", "--config", &mp], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spin_delta"));

    let ok = write(dir.path(), "s.json", r#"{"mode": "spectrum", "spin_delta": [0, 0], "grid_n": 16}"#);
    let o = sshg(&["solve", "--config", &ok], &[("SSHG_THREADS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn capacity_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Four harmonic spinors plus eight eigenspinors at lambda = 1 make a low block of 12.
    let cfg = write(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"mode": "multiplicity", "spin_delta": [0, 0], "grid_n": 16, "rho": 1.2, "output_dir": "{}"}}"#,
            dir.path().join("o").display()
        ),
    );
    let o = sshg(&["solve", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn batch_runs_land_in_separate_directories() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", r#"{"mode": "spectrum", "spin_delta": [0.5, 0]}"#);
    let b = write(dir.path(), "b.json", r#"{"mode": "probe", "spin_delta": [0.5, 0.5], "rho": 0.5, "probe_samples": 10}"#);
    let out = dir.path().join("batch");
    let o = sshg(&["solve", "--config", &a, "--config", &b, "--out", out.to_str().unwrap(), "--threads", "2"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&out.join("a").join("run.json"))["config"]["mode"], "spectrum");
    let p = json(&out.join("b").join("run.json"));
    assert!(p["probe"]["margin"].as_f64().unwrap() > 0.0);

    let o = sshg(&["solve", "--config", &a, "--config", &a], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("output_dir"));
}

#[test]
fn levels_do_not_depend_on_the_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "m.json", r#"{"mode": "mountain_pass", "spin_delta": [0.5, 0.5], "rho": 0.5}"#);
    let mut levels = Vec::new();
    for (tag, threads) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let out = dir.path().join(tag);
        let o = sshg(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()], &[("SSHG_THREADS", threads)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        levels.push(json(&out.join("run.json"))["levels"]["c1"].as_f64().unwrap());
    }
    assert_eq!(levels[0].to_bits(), levels[1].to_bits());
    assert!((levels[0] - levels[2]).abs() <= 1e-12 * levels[0].abs());
}
