use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn gcecap(args: &[&str], out: &PathBuf) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcecap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("run gcecap")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("gcecap-test-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

#[test]
fn zero_particles_is_a_config_error() {
    let out = scratch("n0");
    let o = gcecap(&["sweep-bose", "--N", "0"], &out);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("N must be positive"));
    assert!(!out.join("sweep_bose.csv").exists());
}

#[test]
fn unknown_set_key_is_a_config_error() {
    let out = scratch("badkey");
    let o = gcecap(&["sweep-fermi", "--set", "colour=blue"], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_csv_is_byte_identical_across_runs() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    for dir in [&a, &b] {
        let o = gcecap(&["sweep-bose", "--N", "100", "--grid-points", "25"], dir);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let x = fs::read(a.join("sweep_bose.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("sweep_bose.csv")).unwrap());
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("T,T_norm,mu,E,C_bits\n"));
    assert_eq!(text.lines().count(), 26);
}

#[test]
fn sweep_bcs_runs_with_reference_settings() {
    let out = scratch("bcs");
    let o = gcecap(&["sweep-bcs", "--grid-points", "12"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("sweep_bcs.csv")).unwrap();
    assert_eq!(csv.lines().count(), 13);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("sweep_bcs.json")).unwrap()).unwrap();
    assert_eq!(json["config"]["statistics"], "bcs");
    assert!(json["config"]["v0"].as_f64().unwrap() > 0.0);
}

#[test]
fn compare_writes_both_columns() {
    let out = scratch("cmp");
    let o = gcecap(&["compare", "--grid-points", "10"], &out);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("compare.csv")).unwrap();
    assert!(csv.starts_with("T_over_Tc,C_bose_bits,T_over_Tf,C_fermi_bits\n"));
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn config_file_and_flags_combine() {
    let out = scratch("cfg");
    fs::create_dir_all(&out).unwrap();
    let cfg = out.join("run.cfg");
    fs::write(&cfg, "# hard box\ntrap = box3d_hard\nN = 50\n").unwrap();
    let o = gcecap(&["spectrum-dump", "--config", cfg.to_str().unwrap(), "--N", "20"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("box3d_hard"), "{stdout}");
    assert!(out.join("spectrum.csv").exists());
}

#[test]
fn theorem_check_on_power_law_needs_temperatures() {
    let out = scratch("thm");
    let o = gcecap(&["theorem-check", "--trap", "power_law(1,3)"], &out);
    assert_eq!(o.status.code(), Some(2));
    let o = gcecap(&["theorem-check", "--trap", "power_law(1,3)", "--temperatures", "50,100"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("theorem.csv")).unwrap().lines().count(), 3);
}
