//! Subcommand bodies. Each returns the files it would write so the binary and
//! the tests share one code path.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::{negative_g_config, positive_g_config, RunConfig, DESIGN_CONFIG};
use crate::dynamics::{
    approx_common_frequency, approx_differential_frequency, critical_powers, power_sweep,
    solve_modes, ApproxFrequency, Mode, StiffnessSystem,
};
use crate::error::{Error, Result};
use crate::geometry::MirrorIndex;
use crate::noise::{dominance_band, log_grid, total_budget};
use crate::response::{
    fit_resonance, frequency_vs_power_curve, load_tf_csv, model_response, parse_tf_csv,
    synthesize_response, write_tf_csv, PowerPoint, PredictionUncertainty, TransferFunctionData,
};

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Artifact {
            name: name.to_string(),
            contents,
        }
    }
}

/// Write each artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.contents)?;
            Ok(path)
        })
        .collect()
}

/// Scientific notation with 9 significant digits.
pub fn fmt_sci(x: f64) -> String {
    format!("{x:.8e}")
}

/// JSON number rounded to 9 significant digits; non-finite values become null.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(fmt_sci(x).parse::<f64>().unwrap_or(x))
    } else {
        Value::Null
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn signed_hz(w2: f64) -> f64 {
    let f = w2.abs().sqrt() / (2.0 * std::f64::consts::PI);
    if w2 < 0.0 {
        -f
    } else {
        f
    }
}

/// `stability.csv` (signed mode frequencies over the power grid) and
/// `critical_powers.json`.
pub fn cmd_stability(cfg: &RunConfig) -> Result<Vec<Artifact>> {
    let grid = cfg.stability.grid();
    if grid.is_empty() {
        return Err(Error::Config {
            key: "stability.points".into(),
            message: "power grid is empty".into(),
        });
    }
    let mut csv = String::from("power_w,f_diff_hz,f_com_hz\n");
    for pt in power_sweep(&cfg.system, &grid) {
        let m = pt.modes?;
        let _ = writeln!(
            csv,
            "{},{},{}",
            fmt_sci(pt.power),
            fmt_sci(m.differential.signed_frequency_hz()),
            fmt_sci(m.common.signed_frequency_hz())
        );
    }
    let critical = critical_powers(&cfg.system, cfg.stability.power_max)?;
    let json = json!({
        "g1": num(cfg.system.g1()),
        "g2": num(cfg.system.g2()),
        "power_max_w": num(cfg.stability.power_max),
        "critical_powers": critical
            .iter()
            .map(|c| json!({ "power_w": num(c.power), "mode": c.mode.to_string() }))
            .collect::<Vec<_>>(),
    });
    Ok(vec![
        Artifact::new("stability.csv", csv),
        Artifact::new("critical_powers.json", to_json(&json)),
    ])
}

fn mode_record(exact: &Mode, approx: Option<ApproxFrequency>) -> Value {
    let exact_hz = exact.signed_frequency_hz();
    let approx_hz = approx.map(|a| signed_hz(a.squared()));
    json!({
        "exact_hz": num(exact_hz),
        "exact_omega_squared": num(exact.squared_angular_frequency),
        "approx_hz": approx_hz.map_or(Value::Null, num),
        "relative_difference": approx_hz.map_or(Value::Null, |a| num(((a - exact_hz) / exact_hz).abs())),
        "stable": exact.stable(),
        "eigenvector": [num(exact.eigenvector[0]), num(exact.eigenvector[1])],
    })
}

/// `modes.json`: exact and single-mirror approximate frequencies at one power.
pub fn cmd_modes(cfg: &RunConfig, power: Option<f64>) -> Result<Vec<Artifact>> {
    let power = power.unwrap_or(cfg.modes.power);
    let stiffness = StiffnessSystem::from_system(&cfg.system, power)?;
    let modes = solve_modes(&stiffness)?;
    let common_approx = approx_common_frequency(&stiffness).ok();
    let json = json!({
        "power_w": num(power),
        "beta": num(stiffness.beta),
        "differential": mode_record(&modes.differential, Some(approx_differential_frequency(&stiffness))),
        "common": mode_record(&modes.common, common_approx),
        "stable": modes.all_stable(),
    });
    Ok(vec![Artifact::new("modes.json", to_json(&json))])
}

fn fit_record(label: &str, data: &TransferFunctionData) -> Result<(Value, crate::response::ResonanceFit)> {
    let fit = fit_resonance(data, None)?;
    let s = fit.sigma();
    let v = json!({
        "source": label,
        "resonant_frequency_hz": num(fit.resonant_frequency),
        "damping_ratio": num(fit.damping_ratio),
        "gain": num(fit.gain),
        "sigma": {
            "resonant_frequency_hz": num(s[0]),
            "damping_ratio": num(s[1]),
            "gain": num(s[2]),
        },
        "residual_norm": num(fit.residual_norm),
        "converged": fit.converged,
        "iterations": fit.iterations,
    });
    Ok((v, fit))
}

const SELFTEST_PARAMS: (f64, f64, f64) = (2.0, 0.05, 1.0);
const SELFTEST_RTOL: f64 = 1e-6;

/// Synthesize the model response, pass it through the CSV writer and reader,
/// fit it, and require every parameter back to 1e-6 relative.
pub fn tf_selftest(frequencies: &[f64]) -> Result<Value> {
    let (f0, zeta, gain) = SELFTEST_PARAMS;
    let data = model_response(f0, zeta, gain, frequencies)?;
    let mut buf = Vec::new();
    write_tf_csv(&data, &mut buf)?;
    let reread = parse_tf_csv(std::str::from_utf8(&buf).map_err(|e| Error::Io(e.to_string()))?)?;
    let fit = fit_resonance(&reread, None)?;
    let errors = [
        ((fit.resonant_frequency - f0) / f0).abs(),
        ((fit.damping_ratio - zeta) / zeta).abs(),
        ((fit.gain - gain) / gain).abs(),
    ];
    let worst = errors.iter().cloned().fold(0.0, f64::max);
    if worst.is_nan() || worst >= SELFTEST_RTOL {
        return Err(Error::Domain(format!(
            "self-test recovery error {worst:e} exceeds {SELFTEST_RTOL:e}"
        )));
    }
    Ok(json!({
        "true": { "resonant_frequency_hz": f0, "damping_ratio": zeta, "gain": gain },
        "fitted": {
            "resonant_frequency_hz": num(fit.resonant_frequency),
            "damping_ratio": num(fit.damping_ratio),
            "gain": num(fit.gain),
        },
        "max_relative_error": num(worst),
        "passed": true,
    }))
}

/// `tf.csv` at the configured power; with fit inputs also `fits.json`, and
/// with `--selftest` also `selftest.json`.
pub fn cmd_tf(cfg: &RunConfig, power: Option<f64>, fit_paths: &[PathBuf], selftest: bool) -> Result<Vec<Artifact>> {
    let power = power.unwrap_or(cfg.tf.power);
    let grid = cfg.tf.grid();
    let mut out = Vec::new();

    let synthesized = synthesize_response(&cfg.system, power, &grid)?;
    let mut buf = Vec::new();
    write_tf_csv(&synthesized, &mut buf)?;
    out.push(Artifact::new("tf.csv", String::from_utf8(buf).expect("writer emits ascii")));

    if !fit_paths.is_empty() {
        let powers = &cfg.tf.fit_powers;
        if !powers.is_empty() && powers.len() != fit_paths.len() {
            return Err(Error::Config {
                key: "tf.fit_powers".into(),
                message: format!("{} powers for {} --fit files", powers.len(), fit_paths.len()),
            });
        }
        let mut records = Vec::new();
        let mut points = Vec::new();
        for (k, path) in fit_paths.iter().enumerate() {
            let data = load_tf_csv(path).map_err(|e| match e {
                Error::Csv { line, message } => Error::Csv {
                    line,
                    message: format!("{}: {message}", path.display()),
                },
                Error::Io(m) => Error::Io(format!("{}: {m}", path.display())),
                other => other,
            })?;
            let (mut rec, fit) = fit_record(&path.display().to_string(), &data)?;
            if let Some(&p) = powers.get(k) {
                rec["power_w"] = num(p);
                points.push(PowerPoint {
                    power: p,
                    power_sigma: cfg.tf.fit_power_sigmas.get(k).copied().unwrap_or(0.0),
                    fit,
                });
            }
            records.push(rec);
        }
        let mut doc = json!({ "fits": records });
        if !points.is_empty() {
            let band = frequency_vs_power_curve(
                &cfg.system,
                &points,
                PredictionUncertainty {
                    length: cfg.tf.length_sigma,
                    power_scale: cfg.tf.power_scale_sigma,
                },
            )?;
            doc["prediction"] = band
                .iter()
                .map(|b| {
                    json!({
                        "power_w": num(b.power_w),
                        "measured_hz": num(b.measured_hz),
                        "measured_sigma_hz": num(b.measured_sigma_hz),
                        "predicted_hz": num(b.predicted_hz),
                        "predicted_low_hz": num(b.predicted_low_hz),
                        "predicted_high_hz": num(b.predicted_high_hz),
                        "contained": b.contained,
                    })
                })
                .collect();
        }
        out.push(Artifact::new("fits.json", to_json(&doc)));
    }

    if selftest {
        out.push(Artifact::new("selftest.json", to_json(&tf_selftest(&grid)?)));
    }
    Ok(out)
}

/// `noise_budget.csv` and `noise_dominance.json`.
pub fn cmd_noise(cfg: &RunConfig, power: Option<f64>) -> Result<Vec<Artifact>> {
    let system = match power {
        Some(p) => cfg.system.with_intracavity_power(p),
        None => cfg.system.clone(),
    };
    let n = &cfg.noise;
    let grid = log_grid(n.freq_min, n.freq_max, n.points_per_decade)?;
    let budget = total_budget(&system, &cfg.env, &grid)?;
    let bands = dominance_band(&budget)?;

    let mut csv = budget.csv_header();
    csv.push('\n');
    for (i, f) in budget.frequencies.iter().enumerate() {
        let mut row = vec![fmt_sci(*f)];
        row.extend(budget.sources.iter().map(|c| fmt_sci(c.asd[i])));
        row.push(fmt_sci(budget.shot_noise.asd[i]));
        row.push(fmt_sci(budget.classical_total.asd[i]));
        row.push(fmt_sci(budget.qrpn.asd[i]));
        csv.push_str(&row.join(","));
        csv.push('\n');
    }

    let model = &budget.model;
    let mut formulas = serde_json::Map::new();
    for c in budget.sources.iter().chain([&budget.shot_noise, &budget.qrpn]) {
        formulas.insert(c.label.clone(), json!(c.formula_id));
    }
    let json = json!({
        "bands": bands.iter().map(|b| json!({ "f_low_hz": num(b.f_low), "f_high_hz": num(b.f_high) })).collect::<Vec<_>>(),
        "formula_ids": formulas,
        "intracavity_power_w": num(model.intracavity_power),
        "finesse": num(model.finesse),
        "beam_radius_m": num(model.beam_radius),
        "computed_beam_radius_m": num(crate::geometry::spot_size_on_mirror(&system, MirrorIndex::First)?),
        "mode_matching_efficiency": system.mode_matching_efficiency().map_or(Value::Null, num),
        "coating": {
            "doublets": model.stack.doublet_count,
            "transmission": num(model.stack.transmission),
            "thickness_m": num(model.stack.total_physical_thickness),
            "effective_loss_angle": num(model.stack.effective_loss_angle),
        },
        "classical_sources": budget.sources.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "shot_noise_in_classical_total": false,
    });
    Ok(vec![
        Artifact::new("noise_budget.csv", csv),
        Artifact::new("noise_dominance.json", to_json(&json)),
    ])
}

/// The shipped configurations, verbatim.
pub fn cmd_defaults() -> Vec<Artifact> {
    vec![
        Artifact::new("design.cfg", DESIGN_CONFIG.to_string()),
        Artifact::new("negative_g.cfg", negative_g_config()),
        Artifact::new("positive_g.cfg", positive_g_config()),
    ]
}
