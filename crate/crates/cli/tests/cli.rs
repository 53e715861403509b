use std::path::Path;
use std::process::{Command, Output};

fn hartman(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hartman"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn print_preset(name: &str, cwd: &Path) -> String {
    let out = hartman(&["preset", name, "--print"], cwd);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn unknown_preset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hartman(&["preset", "nope"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verb_without_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hartman(&["times"], dir.path()).status.code(), Some(2));
}

#[test]
fn zero_threads_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = hartman(&["preset", "free", "--print", "--threads", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn printed_preset_drives_amplitudes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("free.toml"), print_preset("free", dir.path())).unwrap();
    let out = hartman(&["amplitudes", "--config", "free.toml", "--out", "run"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let t: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("transmission = "))
        .expect("transmission line")
        .parse()
        .unwrap();
    // free space: the packet norm, short of 1 only by the truncated tails
    assert!((t - 1.0).abs() < 1e-6, "{stdout}");
    let csv = std::fs::read_to_string(dir.path().join("run/amplitudes.csv")).unwrap();
    assert!(csv.starts_with("k_inv_nm,E_ev,T,R,J,lambda"));
    assert!(dir.path().join("run/manifest.toml").exists());
}

#[test]
fn verb_conflicting_with_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("experiment = \"times\"\n{}", print_preset("free", dir.path()));
    std::fs::write(dir.path().join("c.toml"), text).unwrap();
    let out = hartman(&["amplitudes", "--config", "c.toml", "--out", "run"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("run").exists());
}

#[test]
fn sweep_preset_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = hartman(&["preset", "e-half-v0", "--out", "sweep"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep/sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "d_nm,T,d_gr_nm,tau_dwell_ps,tau0_ps,tau_end_ps,tau_int_ps");
    assert_eq!(lines.len(), 24);
}
