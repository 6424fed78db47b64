//! Runs the built binary end to end.

use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_squeezeprobe");

fn squeezeprobe(args: &[&str], out: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

fn header(dir: &Path, name: &str) -> String {
    let text = std::fs::read_to_string(dir.join(name)).unwrap();
    text.lines().next().unwrap().to_string()
}

#[test]
fn husimi_writes_grid_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["husimi", "--set", "husimi_points=11"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(header(dir.path(), "husimi.csv"), "x,y,Q");
    let m = manifest(dir.path());
    assert_eq!(m["command"], "husimi");
    assert_eq!(m["files"][0]["rows"], 121);
    assert_eq!(m["constants"]["hbar_J_s"], 1.054_571_817e-34);
    assert_eq!(m["constants"]["k_B_J_per_K"], 1.380_649e-23);
    let nu_q = m["derived"]["nuQ_Hz"].as_f64().unwrap();
    assert!((nu_q - 200e3).abs() < 1e-6);
}

#[test]
fn squeeze_columns_carry_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["squeeze", "--set", "time_samples=50"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        header(dir.path(), "squeeze.csv"),
        "eta,t_seconds,nuQ_t,xi,Ix,Iy,Iz,A,B,C"
    );
}

#[test]
fn out_of_range_parameter_exits_one_and_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["squeeze", "--set", "eta=2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("eta"));
    assert!(!dir.path().join("squeeze.csv").exists());
}

#[test]
fn unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["squeeze", "--set", "bogus=1"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
}

#[test]
fn misaligned_initial_state_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["squeeze", "--set", "initial_state=\"thermal\""], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mean spin vector"));
}

#[test]
fn config_file_and_overrides_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"eta": 0.5, "time_samples": 40}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = squeezeprobe(
        &["squeeze", "--config", cfg.to_str().unwrap(), "--set", "eta_values=[0.25]"],
        &out_dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(&out_dir);
    assert_eq!(m["config"]["eta"], 0.5);
    assert_eq!(m["config"]["eta_values"], serde_json::json!([0.25]));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let names = ["fidelity_map.csv", "fidelity_contour.csv", "manifest.json"];
    let args = ["fidelity-map", "--set", "map_B_points=8", "--set", "map_T_points=8"];
    let mut runs = Vec::new();
    for threads in ["1", "3"] {
        let out = squeezeprobe(&[&args[..], &["--threads", threads]].concat(), dir.path());
        assert!(out.status.success());
        let bytes: Vec<Vec<u8>> = names.iter().map(|n| std::fs::read(dir.path().join(n)).unwrap()).collect();
        runs.push(bytes);
    }
    for (k, name) in names.iter().enumerate() {
        assert!(runs[0][k] == runs[1][k], "{name} differs between runs");
    }
}

#[test]
fn order_flag_is_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let out = squeezeprobe(&["spectrum", "--order", "3"], dir.path());
    assert!(!out.status.success());
}
