use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

use tsl_core::config::DESIGN_CONFIG;
use tsl_core::response::{model_response, write_tf_csv};

fn tsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsl"))
        .args(args)
        .env_remove("TSL_NUM_THREADS")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Shipped configs written into a fresh temp dir.
fn defaults() -> TempDir {
    let dir = TempDir::new().unwrap();
    let o = tsl(&["paper-defaults", "--out", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn defaults_subcommand_writes_design_config() {
    let d = defaults();
    assert_eq!(std::fs::read_to_string(d.path().join("design.cfg")).unwrap(), DESIGN_CONFIG);
    assert!(d.path().join("negative_g.cfg").exists());
    assert!(d.path().join("positive_g.cfg").exists());
}

fn critical_power(cfg: &str) -> (f64, String) {
    let d = defaults();
    let out = d.path().join("out");
    let o = tsl(&["stability", "--config", s(&d.path().join(cfg)), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(out.join("critical_powers.json"));
    let first = &j["critical_powers"][0];
    let csv = std::fs::read_to_string(out.join("stability.csv")).unwrap();
    assert!(csv.starts_with("power_w,f_diff_hz,f_com_hz\n"));
    assert_eq!(csv.lines().count(), 802);
    (first["power_w"].as_f64().unwrap(), first["mode"].as_str().unwrap().to_string())
}

#[test]
fn stability_negative_g() {
    let (p, mode) = critical_power("negative_g.cfg");
    assert!((p / 34e3 - 1.0).abs() < 0.05, "{p}");
    assert_eq!(mode, "common");
}

#[test]
fn stability_positive_g() {
    let (p, mode) = critical_power("positive_g.cfg");
    assert!((p / 0.72 - 1.0).abs() < 0.10, "{p}");
    assert_eq!(mode, "differential");
}

#[test]
fn unstable_rows_are_negative() {
    let d = defaults();
    let out = d.path().join("out");
    tsl(&["stability", "--config", s(&d.path().join("positive_g.cfg")), "--out", s(&out)]);
    let csv = std::fs::read_to_string(out.join("stability.csv")).unwrap();
    let last: Vec<f64> = csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 1e5);
    assert!(last[1] < 0.0);
}

#[test]
fn empty_power_grid_is_usage_error() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "c.cfg", &DESIGN_CONFIG.replace("points = 801", "points = 0"));
    let o = tsl(&["stability", "--config", s(&cfg), "--out", s(d.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("stability.points"));
}

#[test]
fn missing_unit_is_usage_error_naming_key() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(d.path(), "c.cfg", &DESIGN_CONFIG.replace("mass = 60 g", "mass = 60"));
    let o = tsl(&["noise", "--config", s(&cfg), "--out", s(d.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("mirror2.mass"), "{}", stderr(&o));
}

#[test]
fn missing_config_file_is_usage_error() {
    let o = tsl(&["modes", "--config", "/nonexistent/x.cfg", "--out", "/tmp"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_flags_are_usage_errors() {
    assert_eq!(code(&tsl(&["frobnicate"])), 2);
    assert_eq!(code(&tsl(&["modes", "--power", "lots"])), 2);
    let d = TempDir::new().unwrap();
    assert_eq!(code(&tsl(&["modes", "--power", "-1", "--out", s(d.path())])), 2);
}

#[test]
fn modes_endpoints_and_flags() {
    let d = defaults();
    let cfg = d.path().join("negative_g.cfg");
    let out = d.path().join("zero");
    assert_eq!(code(&tsl(&["modes", "--config", s(&cfg), "--power", "0", "--out", s(&out)])), 0);
    let j = json(out.join("modes.json"));
    assert!((j["differential"]["exact_hz"].as_f64().unwrap() - 0.5).abs() < 1e-8);
    assert!((j["common"]["exact_hz"].as_f64().unwrap() - 5.0).abs() < 1e-8);

    let out = d.path().join("kw");
    assert_eq!(code(&tsl(&["modes", "--config", s(&cfg), "--out", s(&out)])), 0);
    let j = json(out.join("modes.json"));
    assert_eq!(j["power_w"].as_f64().unwrap(), 1e3);
    assert!(j["differential"]["relative_difference"].as_f64().unwrap() < 1e-2);
    assert_eq!(j["stable"], Value::Bool(true));

    let out = d.path().join("high");
    assert_eq!(code(&tsl(&["modes", "--config", s(&cfg), "--power", "1e5", "--out", s(&out)])), 0);
    let j = json(out.join("modes.json"));
    assert_eq!(j["stable"], Value::Bool(false));
    assert_eq!(j["common"]["stable"], Value::Bool(false));
    assert!(j["common"]["exact_hz"].as_f64().unwrap() < 0.0);
}

#[test]
fn tf_at_unstable_power_is_numerical_failure() {
    let d = TempDir::new().unwrap();
    let o = tsl(&["tf", "--power", "1e8", "--out", s(d.path())]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn tf_selftest() {
    let d = TempDir::new().unwrap();
    let o = tsl(&["tf", "--selftest", "--out", s(d.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(d.path().join("selftest.json"));
    assert_eq!(j["passed"], Value::Bool(true));
    assert!(j["max_relative_error"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(d.path().join("tf.csv")).unwrap();
    assert!(csv.starts_with("freq_hz,mag_db,phase_deg\n"));
}

fn write_tf(path: &Path, f0: f64) {
    let freqs: Vec<f64> = (0..150).map(|k| 0.2 * 100f64.powf(k as f64 / 149.0)).collect();
    let data = model_response(f0, 0.05, 2e-3, &freqs).unwrap();
    write_tf_csv(&data, std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn five_fits_keep_order() {
    let d = TempDir::new().unwrap();
    let f0s = [3.0, 2.0, 5.5, 4.0, 6.5];
    let mut args = vec!["tf".to_string(), "--out".into(), s(&d.path().join("out")).into()];
    for (k, f0) in f0s.iter().enumerate() {
        let p = d.path().join(format!("m{k}.csv"));
        write_tf(&p, *f0);
        args.push("--fit".into());
        args.push(s(&p).into());
    }
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = tsl(&refs);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(d.path().join("out/fits.json"));
    let fits = j["fits"].as_array().unwrap();
    assert_eq!(fits.len(), 5);
    for (k, (rec, f0)) in fits.iter().zip(f0s).enumerate() {
        assert!(rec["source"].as_str().unwrap().ends_with(&format!("m{k}.csv")));
        assert!((rec["resonant_frequency_hz"].as_f64().unwrap() / f0 - 1.0).abs() < 1e-6);
        assert!(rec["sigma"]["resonant_frequency_hz"].is_number());
        assert!(rec["residual_norm"].is_number());
    }
    assert!(j.get("prediction").is_none());
}

#[test]
fn fits_with_powers_get_prediction_band() {
    let d = TempDir::new().unwrap();
    let cfg = write_config(
        d.path(),
        "c.cfg",
        &DESIGN_CONFIG.replace("power_scale_sigma = 0.1", "power_scale_sigma = 0.1\nfit_powers = 1, 2 W\nfit_power_sigmas = 0.1, 0.2 W"),
    );
    let (a, b) = (d.path().join("a.csv"), d.path().join("b.csv"));
    write_tf(&a, 1.0);
    write_tf(&b, 1.2);
    let out = d.path().join("out");
    let o = tsl(&["tf", "--config", s(&cfg), "--fit", s(&a), "--fit", s(&b), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(out.join("fits.json"));
    assert_eq!(j["prediction"].as_array().unwrap().len(), 2);
    assert_eq!(j["fits"][1]["power_w"].as_f64().unwrap(), 2.0);

    let o = tsl(&["tf", "--config", s(&cfg), "--fit", s(&a), "--out", s(&out)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("tf.fit_powers"));
}

#[test]
fn malformed_fit_csv_reports_line() {
    let d = TempDir::new().unwrap();
    let p = d.path().join("bad.csv");
    std::fs::write(&p, "freq_hz,mag_db,phase_deg\n1,0,0\n2,0,0\n3,x,0\n").unwrap();
    let o = tsl(&["tf", "--fit", s(&p), "--out", s(d.path())]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn missing_fit_file_is_usage_error() {
    let d = TempDir::new().unwrap();
    let o = tsl(&["tf", "--fit", "/nonexistent.csv", "--out", s(d.path())]);
    assert_eq!(code(&o), 2);
}

#[test]
fn noise_band_and_metadata() {
    let d = defaults();
    let out = d.path().join("n");
    let o = tsl(&["noise", "--config", s(&d.path().join("design.cfg")), "--out", s(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let j = json(out.join("noise_dominance.json"));
    let bands = j["bands"].as_array().unwrap();
    assert_eq!(bands.len(), 1);
    let lo = bands[0]["f_low_hz"].as_f64().unwrap();
    let hi = bands[0]["f_high_hz"].as_f64().unwrap();
    assert!((65.0..=260.0).contains(&lo) && (300.0..=1200.0).contains(&hi));
    for key in ["qrpn", "shot_noise", "seismic", "coating_brownian"] {
        assert!(j["formula_ids"][key].is_string());
    }
    assert_eq!(j["finesse"].as_f64().unwrap(), 5000.0);
    assert!((j["mode_matching_efficiency"].as_f64().unwrap() - 0.4398).abs() < 1e-4);
}

#[test]
fn noise_low_power_empty_band() {
    let d = TempDir::new().unwrap();
    let o = tsl(&["noise", "--power", "0.014", "--out", s(d.path())]);
    assert_eq!(code(&o), 0);
    assert!(json(d.path().join("noise_dominance.json"))["bands"].as_array().unwrap().is_empty());
}

#[test]
fn noise_output_is_deterministic() {
    let d = TempDir::new().unwrap();
    let (a, b) = (d.path().join("a"), d.path().join("b"));
    assert_eq!(code(&tsl(&["noise", "--out", s(&a)])), 0);
    let threaded = Command::new(env!("CARGO_BIN_EXE_tsl"))
        .args(["noise", "--out", s(&b)])
        .env("TSL_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(code(&threaded), 0);
    for f in ["noise_budget.csv", "noise_dominance.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
    }
    let csv = std::fs::read_to_string(a.join("noise_budget.csv")).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.split(',').all(|v| v.contains('e') && v.split('e').next().unwrap().trim_start_matches('-').len() == 10));
}

#[test]
fn bad_thread_count_is_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_tsl"))
        .args(["modes", "--out", "/tmp"])
        .env("TSL_NUM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}
