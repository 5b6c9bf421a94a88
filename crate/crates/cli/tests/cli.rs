use std::path::Path;
use std::process::{Command, Output};

fn rydmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rydmix"))
        .args(args)
        .env("RYDMIX_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

#[test]
fn bound_curve() {
    let out = rydmix(&["bound"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("a_over_omega,upper_bound"));
    let data = rows(&text);
    assert_eq!(data.len(), 800);
    assert!(data.iter().any(|r| r[1] > 1.0));
    assert!(data.iter().any(|r| r[1] < 0.2));
}

#[test]
fn map_has_factor_three_floor() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "box.a_max = 1000\nbox.omega_min = 100\nbox.omega_max = 500\n");
    let out_path = dir.path().join("map.csv");
    let out = rydmix(&["--command", "map", "--config", &cfg, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("delta_M_MHz,eta_m,a_star_MHz,omega_star_MHz,k_star,sensitivity_nV")
    );
    let data = rows(&text);
    assert_eq!(data.len(), 191);
    let min = data.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    assert!(min >= 1.0 / 3.0);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "map.max = 600\n");
    let a = rydmix(&["map", "--config", &cfg]);
    let b = rydmix(&["map", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.contains(&b'\r'));
}

#[test]
fn infeasible_map_points_are_nan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "box.a_max = 10\nbox.omega_min = 100\nbox.omega_max = 100\nmap.min = 100\nmap.max = 200\nmap.step = 50\n",
    );
    let out = rydmix(&["map", "--config", &cfg]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2], "150,nan,nan,nan,nan,nan");
}

#[test]
fn optimize_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "mw.delta_M = 700\nbox.a_max = 500\n");
    let out = rydmix(&["optimize", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with(
        "delta_M_MHz,eta_m,a_star_MHz,omega_star_MHz,k_star,sensitivity_nV,delta_M_shift_MHz,omega_retuned_MHz,delta_c_retuned_MHz\n"
    ));
    let data = rows(&text);
    assert_eq!(data.len(), 1);
    assert_eq!(data[0][4], 1.0);
    assert!((data[0][1] - 0.58186522428).abs() < 1e-4);
}

#[test]
fn heterodyne_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "heterodyne.samples_per_period = 64\nheterodyne.delta_p = -6.5\n");
    let out = rydmix(&["heterodyne", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t_us,dT_effective,dT_no2nd"));
    let data = rows(&text);
    assert_eq!(data.len(), 129);
    assert_eq!(data[0][0], 0.0);
    assert!((data[128][0] - 2000.0).abs() < 1e-6);
}

#[test]
fn spectrum_columns_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.points = 7\nsweep.min = -6\nsweep.max = 6\n");
    let out = rydmix(&["spectrum", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text.lines().next(),
        Some("delta_p_MHz,im_rho21_original,im_rho21_effective,im_rho21_no2nd")
    );
    let data = rows(&text);
    assert_eq!(data.len(), 7);
    let peak = data.iter().map(|r| r[2]).fold(0.0, f64::max);
    for r in &data {
        assert!((r[1] - r[2]).abs() <= 0.05 * peak, "{r:?}");
    }
}

#[test]
fn validate_passes() {
    let out = rydmix(&["validate"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert_eq!(text.lines().count(), 6);
    assert!(text.lines().all(|l| l.starts_with("PASS ")));
}

#[test]
fn bad_inputs_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "probe.omega_p 0.1\n");
    let out = rydmix(&["spectrum", "--config", &cfg]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 1"), "{err}");

    let out = rydmix(&["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("unknown command"));

    let out = rydmix(&[]);
    assert!(!out.status.success());

    let cfg = write_config(dir.path(), "mw.delta_M = 5000\nbox.a_max = 10\nbox.omega_min = 100\nbox.omega_max = 100\n");
    let out = rydmix(&["optimize", "--config", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("optimizer:"));

    let out = rydmix(&["bound", "--config", "/nonexistent/file.cfg"]);
    assert!(!out.status.success());
}
