//! Torque-to-beam-spot transfer functions and resonance fitting.
//!
//! The measured quantity is the spot motion on the test mass when a pure yaw
//! torque drives the input mirror. Synthesis uses structural damping
//! (K → K(1 + i/Q)); the fit uses the phenomenological magnitude model
//!
//! ```text
//! |H(f)| = A / √((f0² − f²)² + (2ζ f0 f)²)
//! ```
//!
//! Near resonance ζ ≈ 1/(2Q). Only the magnitude enters the fit objective.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::beam_spot::spot1_phasor;
use crate::dynamics::{approx_differential_frequency, solve_modes, StiffnessSystem};
use crate::error::{ensure_non_negative, Error, Result};
use crate::geometry::CavitySystem;

pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunctionData {
    /// Hz, strictly increasing.
    pub frequencies: Vec<f64>,
    pub response: Vec<Complex64>,
    /// Optional 1σ magnitude uncertainty per point, linear units.
    pub magnitude_sigma: Option<Vec<f64>>,
}

impl TransferFunctionData {
    pub fn new(
        frequencies: Vec<f64>,
        response: Vec<Complex64>,
        magnitude_sigma: Option<Vec<f64>>,
    ) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::EmptyInput);
        }
        if frequencies.len() != response.len()
            || magnitude_sigma
                .as_ref()
                .is_some_and(|s| s.len() != frequencies.len())
        {
            return Err(Error::GridMismatch);
        }
        if frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidParameter {
                name: "frequency",
                value: frequencies
                    .iter()
                    .copied()
                    .find(|f| !(f.is_finite() && *f > 0.0))
                    .unwrap_or(f64::NAN),
                reason: "must be positive and finite",
            });
        }
        if frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter {
                name: "frequencies",
                value: f64::NAN,
                reason: "must be strictly increasing",
            });
        }
        if let Some(s) = &magnitude_sigma {
            if s.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(Error::InvalidParameter {
                    name: "mag_sigma",
                    value: f64::NAN,
                    reason: "must be positive and finite",
                });
            }
        }
        Ok(TransferFunctionData {
            frequencies,
            response,
            magnitude_sigma,
        })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.response.iter().map(|h| h.norm()).collect()
    }

    /// Phase in degrees, unwrapped along the frequency axis.
    pub fn unwrapped_phase_deg(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        let mut offset = 0.0;
        let mut prev: Option<f64> = None;
        for h in &self.response {
            let p = h.arg().to_degrees();
            if let Some(last) = prev {
                let mut d = p + offset - last;
                while d > 180.0 {
                    offset -= 360.0;
                    d -= 360.0;
                }
                while d < -180.0 {
                    offset += 360.0;
                    d += 360.0;
                }
            }
            let v = p + offset;
            out.push(v);
            prev = Some(v);
        }
        out
    }
}

/// Spot motion on mirror 1 per unit torque on mirror 2, m/(N·m).
pub fn synthesize_response(
    system: &CavitySystem,
    intracavity_power: f64,
    frequencies: &[f64],
) -> Result<TransferFunctionData> {
    ensure_non_negative("intracavity_power", intracavity_power)?;
    let stiffness = StiffnessSystem::from_system(system, intracavity_power)?;
    let modes = solve_modes(&stiffness)?;
    for m in [&modes.differential, &modes.common] {
        if !m.stable() {
            return Err(Error::UnstableMode {
                label: m.label.to_string(),
                omega_sq: m.squared_angular_frequency,
            });
        }
    }
    let q = [
        system.suspension1.quality_factor,
        system.suspension2.quality_factor,
    ];
    let response = frequencies
        .iter()
        .map(|&f| {
            let omega = 2.0 * PI * f;
            let alpha = angles_for_input_torque(&stiffness, q, omega);
            spot1_phasor(system, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    TransferFunctionData::new(frequencies.to_vec(), response, None)
}

/// Solve (K_opt + K_mech(1 + i/Q) − I Ω²) α = (0, 1).
fn angles_for_input_torque(s: &StiffnessSystem, q: [f64; 2], omega: f64) -> [Complex64; 2] {
    let diag = |i: usize| {
        Complex64::new(
            s.k_opt[i][i] + s.k_mech[i] - s.inertia[i] * omega * omega,
            s.k_mech[i] / q[i],
        )
    };
    let a = diag(0);
    let d = diag(1);
    let b = Complex64::new(s.k_opt[0][1], 0.0);
    let c = Complex64::new(s.k_opt[1][0], 0.0);
    let det = a * d - b * c;
    [-b / det, a / det]
}

/// Complex second-order response A / (f0² − f² + 2iζ f0 f), the fit model with phase.
pub fn model_response(
    resonant_frequency: f64,
    damping_ratio: f64,
    gain: f64,
    frequencies: &[f64],
) -> Result<TransferFunctionData> {
    let response = frequencies
        .iter()
        .map(|&f| {
            gain / Complex64::new(
                resonant_frequency * resonant_frequency - f * f,
                2.0 * damping_ratio * resonant_frequency * f,
            )
        })
        .collect();
    TransferFunctionData::new(frequencies.to_vec(), response, None)
}

/// |H(f)| of the fit model.
pub fn model_magnitude(resonant_frequency: f64, damping_ratio: f64, gain: f64, f: f64) -> f64 {
    let a = resonant_frequency * resonant_frequency - f * f;
    let b = 2.0 * damping_ratio * resonant_frequency * f;
    gain / a.hypot(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonanceFit {
    /// Hz
    pub resonant_frequency: f64,
    pub damping_ratio: f64,
    pub gain: f64,
    /// Parameter order (f0, ζ, A).
    pub covariance: [[f64; 3]; 3],
    /// √ of the (weighted) sum of squared residuals.
    pub residual_norm: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ResonanceFit {
    pub fn sigma(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.covariance[i][i].max(0.0).sqrt())
    }
}

const FIT_MAX_ITERATIONS: usize = 200;
const FIT_STEP_RTOL: f64 = 1e-8;

fn seed_from_peak(freqs: &[f64], mags: &[f64]) -> (f64, f64, f64) {
    let (imax, &peak) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let f0 = freqs[imax];
    let half = peak / std::f64::consts::SQRT_2;
    let lower = (0..imax).rev().find(|&i| mags[i] < half).map(|i| freqs[i]);
    let upper = (imax + 1..mags.len())
        .find(|&i| mags[i] < half)
        .map(|i| freqs[i]);
    let zeta = match (lower, upper) {
        (Some(lo), Some(hi)) => (hi - lo) / (2.0 * f0),
        (None, Some(hi)) => (hi - f0) / f0,
        (Some(lo), None) => (f0 - lo) / f0,
        (None, None) => 0.5,
    }
    .clamp(1e-6, 10.0);
    let gain = peak / model_magnitude(f0, zeta, 1.0, f0);
    (f0, zeta, gain)
}

/// Least-squares magnitude fit over (f0, ζ, A) with Levenberg-Marquardt
/// damping of the Gauss-Newton step.
pub fn fit_resonance(
    data: &TransferFunctionData,
    initial_guess: Option<&ResonanceFit>,
) -> Result<ResonanceFit> {
    if data.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: data.len(),
        });
    }
    let freqs = &data.frequencies;
    let mags = data.magnitudes();
    if mags.iter().any(|m| !m.is_finite()) {
        return Err(Error::NonFinite("transfer function magnitudes"));
    }
    let first = mags[0];
    if mags.iter().all(|&m| m == first) {
        return Err(Error::DegenerateData("all magnitudes are equal"));
    }
    let weights: Vec<f64> = match &data.magnitude_sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; mags.len()],
    };

    let mut p = match initial_guess {
        Some(g) => Vector3::new(g.resonant_frequency, g.damping_ratio, g.gain),
        None => {
            let (f0, z, a) = seed_from_peak(freqs, &mags);
            Vector3::new(f0, z, a)
        }
    };
    if !(p[0] > 0.0 && p[1] > 0.0 && p.iter().all(|v| v.is_finite())) {
        return Err(Error::InvalidParameter {
            name: "initial_guess",
            value: p[0].min(p[1]),
            reason: "f0 and damping ratio must be positive",
        });
    }

    let residuals = |p: &Vector3<f64>| -> Vec<f64> {
        freqs
            .iter()
            .zip(&mags)
            .zip(&weights)
            .map(|((&f, &m), &w)| w * (model_magnitude(p[0], p[1], p[2], f) - m))
            .collect()
    };
    let cost = |r: &[f64]| r.iter().map(|v| v * v).sum::<f64>();

    let jacobian = |p: &Vector3<f64>| -> Vec<[f64; 3]> {
        let (f0, z, a) = (p[0], p[1], p[2]);
        freqs
            .iter()
            .zip(&weights)
            .map(|(&f, &w)| {
                let u = f0 * f0 - f * f;
                let v = 2.0 * z * f0 * f;
                let d2 = u * u + v * v;
                let d = d2.sqrt();
                let dd_df0 = (u * 2.0 * f0 + v * 2.0 * z * f) / d;
                let dd_dz = v * 2.0 * f0 * f / d;
                [
                    -w * a * dd_df0 / d2,
                    -w * a * dd_dz / d2,
                    w / d,
                ]
            })
            .collect()
    };

    let normal_equations = |j: &[[f64; 3]], r: &[f64]| {
        let mut jtj = Matrix3::<f64>::zeros();
        let mut jtr = Vector3::<f64>::zeros();
        for (row, &ri) in j.iter().zip(r) {
            for a in 0..3 {
                jtr[a] += row[a] * ri;
                for b in 0..3 {
                    jtj[(a, b)] += row[a] * row[b];
                }
            }
        }
        (jtj, jtr)
    };

    let mut r = residuals(&p);
    let mut c = cost(&r);
    let mut lambda: f64 = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < FIT_MAX_ITERATIONS {
        iterations += 1;
        let j = jacobian(&p);
        let (jtj, jtr) = normal_equations(&j, &r);
        loop {
            let mut damped = jtj;
            for a in 0..3 {
                damped[(a, a)] += lambda * jtj[(a, a)].max(f64::MIN_POSITIVE);
            }
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                if lambda > 1e30 {
                    break 'outer;
                }
                continue;
            };
            let rel_step = (0..3)
                .map(|a| (step[a] / p[a]).abs())
                .fold(0.0, f64::max);
            let trial = p + step;
            if trial[0] > 0.0 && trial[1] > 0.0 && trial.iter().all(|v| v.is_finite()) {
                let rt = residuals(&trial);
                let ct = cost(&rt);
                if ct <= c {
                    p = trial;
                    r = rt;
                    c = ct;
                    lambda = (lambda / 10.0).max(1e-12);
                    if rel_step < FIT_STEP_RTOL {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
            }
            if rel_step < FIT_STEP_RTOL {
                // Already at the optimum to within the step tolerance.
                converged = true;
                break 'outer;
            }
            lambda *= 10.0;
            if lambda > 1e30 {
                break 'outer;
            }
        }
    }

    let (jtj, _) = normal_equations(&jacobian(&p), &r);
    let dof = (mags.len() as f64 - 3.0).max(1.0);
    let scale = if data.magnitude_sigma.is_some() {
        1.0
    } else {
        c / dof
    };
    let covariance = match jtj.try_inverse() {
        Some(inv) => {
            let mut out = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    out[a][b] = 0.5 * (inv[(a, b)] + inv[(b, a)]) * scale;
                }
            }
            out
        }
        None => {
            let mut out = [[0.0; 3]; 3];
            for (a, row) in out.iter_mut().enumerate() {
                row[a] = f64::INFINITY;
            }
            out
        }
    };

    Ok(ResonanceFit {
        resonant_frequency: p[0],
        damping_ratio: p[1],
        gain: p[2],
        covariance,
        residual_norm: c.sqrt(),
        converged,
        iterations,
    })
}

/// One measured resonance at a known (uncertain) intracavity power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    /// W
    pub power: f64,
    /// 1σ, W
    pub power_sigma: f64,
    pub fit: ResonanceFit,
}

/// Parameter uncertainties propagated into the predicted band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionUncertainty {
    /// Cavity-length half-width, m.
    pub length: f64,
    /// Relative half-width of the intracavity power scale (finesse / reflectivity
    /// calibration).
    pub power_scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandComparison {
    pub power_w: f64,
    pub measured_hz: f64,
    pub measured_sigma_hz: f64,
    pub predicted_hz: f64,
    pub predicted_low_hz: f64,
    pub predicted_high_hz: f64,
    pub contained: bool,
}

/// Compare measured differential-mode frequencies against the single-mirror
/// prediction, evaluated at the corners of the uncertainty box.
pub fn frequency_vs_power_curve(
    system: &CavitySystem,
    points: &[PowerPoint],
    uncertainty: PredictionUncertainty,
) -> Result<Vec<BandComparison>> {
    if points.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    let predict = |length: f64, power: f64| -> Result<f64> {
        let shifted = CavitySystem {
            length,
            ..system.clone()
        };
        let s = StiffnessSystem::from_system(&shifted, power)?;
        Ok(approx_differential_frequency(&s)
            .angular_frequency()
            .map_or(0.0, |w| w / (2.0 * PI)))
    };

    points
        .iter()
        .map(|pt| {
            let nominal = predict(system.length, pt.power)?;
            let (mut lo, mut hi) = (nominal, nominal);
            for dl in [-uncertainty.length, uncertainty.length] {
                for dp in [-pt.power_sigma, pt.power_sigma] {
                    for ds in [-uncertainty.power_scale, uncertainty.power_scale] {
                        let p = ((pt.power + dp) * (1.0 + ds)).max(0.0);
                        let f = predict(system.length + dl, p)?;
                        lo = lo.min(f);
                        hi = hi.max(f);
                    }
                }
            }
            let measured = pt.fit.resonant_frequency;
            Ok(BandComparison {
                power_w: pt.power,
                measured_hz: measured,
                measured_sigma_hz: pt.fit.sigma()[0],
                predicted_hz: nominal,
                predicted_low_hz: lo,
                predicted_high_hz: hi,
                contained: measured >= lo && measured <= hi,
            })
        })
        .collect()
}

/// Read a `freq_hz,mag_db,phase_deg[,mag_sigma_db]` CSV file.
pub fn load_tf_csv(path: impl AsRef<Path>) -> Result<TransferFunctionData> {
    let text = std::fs::read_to_string(path)?;
    parse_tf_csv(&text)
}

pub fn parse_tf_csv(text: &str) -> Result<TransferFunctionData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());

    let headers = reader.headers().map_err(|e| Error::Csv {
        line: 1,
        message: e.to_string(),
    })?;
    let names: Vec<&str> = headers.iter().collect();
    let with_sigma = match names.as_slice() {
        ["freq_hz", "mag_db", "phase_deg"] => false,
        ["freq_hz", "mag_db", "phase_deg", "mag_sigma_db"] => true,
        [] | [""] => return Err(Error::EmptyInput),
        _ => {
            return Err(Error::Csv {
                line: 1,
                message: format!(
                    "expected header freq_hz,mag_db,phase_deg[,mag_sigma_db], got {}",
                    names.join(",")
                ),
            })
        }
    };
    let columns = if with_sigma { 4 } else { 3 };

    let mut rows: Vec<(f64, Complex64, Option<f64>, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != columns {
            return Err(Error::Csv {
                line,
                message: format!("expected {columns} fields, found {}", record.len()),
            });
        }
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Csv {
                    line,
                    message: format!("field {} `{}` is not a finite number", i + 1, &record[i]),
                })
        };
        let (f, mag_db, phase) = (field(0)?, field(1)?, field(2)?);
        let mag = 10f64.powf(mag_db / 20.0);
        let h = Complex64::from_polar(mag, phase.to_radians());
        let sigma = if with_sigma {
            Some(mag * std::f64::consts::LN_10 / 20.0 * field(3)?)
        } else {
            None
        };
        rows.push((f, h, sigma, line));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::DuplicateFrequency {
                frequency: w[1].0,
                line: w[1].3.max(w[0].3),
            });
        }
    }
    let frequencies = rows.iter().map(|r| r.0).collect();
    let response = rows.iter().map(|r| r.1).collect();
    let sigma = with_sigma.then(|| rows.iter().map(|r| r.2.unwrap_or(f64::NAN)).collect());
    TransferFunctionData::new(frequencies, response, sigma)
}

/// Write the CSV schema read by [`load_tf_csv`]. Values use 17 significant
/// digits so that a round trip is lossless to ~1e-15.
pub fn write_tf_csv<W: Write>(data: &TransferFunctionData, mut out: W) -> Result<()> {
    let with_sigma = data.magnitude_sigma.is_some();
    if with_sigma {
        writeln!(out, "freq_hz,mag_db,phase_deg,mag_sigma_db")?;
    } else {
        writeln!(out, "freq_hz,mag_db,phase_deg")?;
    }
    for (i, (f, h)) in data.frequencies.iter().zip(&data.response).enumerate() {
        let mag = h.norm();
        let db = 20.0 * mag.log10();
        let phase = h.arg().to_degrees();
        write!(out, "{f:.16e},{db:.16e},{phase:.16e}")?;
        if let Some(s) = &data.magnitude_sigma {
            let sdb = s[i] * 20.0 / (mag * std::f64::consts::LN_10);
            write!(out, ",{sdb:.16e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}
