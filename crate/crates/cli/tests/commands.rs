use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_condlim"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], cfg: &Path) -> Output {
    bin().arg(args[0]).arg("--config").arg(cfg).args(&args[1..]).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("model.conf");
    std::fs::write(&p, text).unwrap();
    p
}

fn data_rows(out: &Output) -> Vec<String> {
    String::from_utf8_lossy(&out.stdout).lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect()
}

#[test]
fn verify_f1_default_thresholds_passes() {
    let out = run(&["verify", "--seed", "1"], &config("f1.conf"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("# verdict: PASS"));
    assert_eq!(data_rows(&out).len(), 5);
}

#[test]
fn verify_exit_one_on_threshold_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("f1.conf")).unwrap() + "verify.ks_max = 0.0001\n";
    let cfg = write_config(dir.path(), &text);
    let out = run(&["verify", "--seed", "1", "--n", "2000"], &cfg);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_family_is_config_error_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "angular.family = uniform\nshape_u.family = power\nshape_u.kappa = 2\n");
    let out = run(&["phi", "--x", "10"], &cfg);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("radial.family"));
}

#[test]
fn unknown_key_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("f1.conf")).unwrap() + "verify.ks_maxx = 1\n";
    let out = run(&["phi", "--x", "10"], &write_config(dir.path(), &text));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verify.ks_maxx"));
}

#[test]
fn asym_at_infeasible_x_is_numeric_error() {
    let out = run(&["tailprob", "--method", "asym", "--x", "0.01"], &config("f1.conf"));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("x = 0.01"));
}

#[test]
fn stochastic_commands_need_seed() {
    for cmd in [&["simulate", "--x", "10"][..], &["limit-sample"], &["verify"], &["tailprob", "--method", "mc", "--x", "10"]] {
        let out = run(cmd, &config("f1.conf"));
        assert_eq!(out.status.code(), Some(2), "{cmd:?}");
    }
}

#[test]
fn bad_flag_is_usage_error() {
    let out = run(&["phi", "--bogus"], &config("f1.conf"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn header_carries_metadata() {
    let out = run(&["simulate", "--x", "20", "--n", "10", "--seed", "9"], &config("f1.conf"));
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for key in ["# command: simulate", "# version: ", "# config_sha256: ", "# seed: 9", "# psi: ", "# phi_used: ", "# condition: right_sided"] {
        assert!(text.contains(key), "missing {key}");
    }
    let rows = data_rows(&out);
    assert_eq!(rows[0], "R,T,r_norm,t_norm");
    assert_eq!(rows.len(), 11);
    for row in &rows[1..] {
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[0] * (1.0 - cells[1] * cells[1])) > 20.0);
        assert!(cells[1] > 0.0);
    }
}

#[test]
fn config_hash_ignores_layout() {
    let dir = tempfile::tempdir().unwrap();
    let original = std::fs::read_to_string(config("f1.conf")).unwrap();
    let mut lines: Vec<&str> = original.lines().filter(|l| !l.starts_with('#')).collect();
    lines.reverse();
    let cfg = write_config(dir.path(), &(lines.join("\n\n") + "\n# trailing comment\n"));
    let a = run(&["phi", "--x", "10"], &config("f1.conf"));
    let b = run(&["phi", "--x", "10"], &cfg);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn phi_columns_and_values() {
    let out = run(&["phi", "--x-grid", "100"], &config("f1.conf"));
    let rows = data_rows(&out);
    assert_eq!(rows[0], "x,psi,phi_minus,phi_plus,phi_star,residual_minus,residual_plus");
    let cells: Vec<f64> = rows[1].split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[3] - 0.1).abs() < 1e-12);
    assert!((cells[4] - 0.2).abs() < 1e-12);
}

#[test]
fn out_path_written_and_unwritable_path_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("phi.csv");
    let out = bin().args(["phi", "--x", "10", "--config"]).arg(config("f1.conf")).arg("--out").arg(&out_path).output().unwrap();
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&out_path).unwrap().starts_with("# command: phi"));
    let bad = dir.path().join("missing-dir/phi.csv");
    let out = bin().args(["phi", "--x", "10", "--config"]).arg(config("f1.conf")).arg("--out").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn density_is_normalized() {
    let out = run(&["density", "--n", "5"], &config("f1.conf"));
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let norm: f64 = text.lines().find_map(|l| l.strip_prefix("# normalization: ")).unwrap().parse().unwrap();
    assert!((norm - 1.0).abs() < 1e-6);
    assert_eq!(data_rows(&out).len(), 26);
}

#[test]
fn tailprob_methods_agree_at_large_x() {
    let get = |method: &str| -> f64 {
        let out = run(&["tailprob", "--method", method, "--x", "100", "--seed", "2", "--n", "400000"], &config("f1.conf"));
        assert!(out.status.success());
        data_rows(&out)[1].split(',').nth(1).unwrap().parse().unwrap()
    };
    let (mc, quad, asym) = (get("mc"), get("quad"), get("asym"));
    assert!((quad / asym - 1.0).abs() < 0.01);
    assert!((mc / quad - 1.0).abs() < 0.05);
}
