#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;

use tsl_core::config::{negative_g_config, positive_g_config, DESIGN_CONFIG};
use tsl_core::{CavitySystem, Curvature, RunConfig};

pub fn design() -> RunConfig {
    RunConfig::parse(DESIGN_CONFIG).unwrap()
}

pub fn negative_g() -> RunConfig {
    RunConfig::parse(&negative_g_config()).unwrap()
}

pub fn positive_g() -> RunConfig {
    RunConfig::parse(&positive_g_config()).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[track_caller]
pub fn assert_rel(actual: f64, expected: f64, tol: f64) {
    let r = rel(actual, expected);
    assert!(r <= tol, "actual {actual:e}, expected {expected:e}, rel {r:e} > {tol:e}");
}

/// g factors of one sign with |g| in [0.05, 0.95], random length, masses and springs.
pub fn random_stable_system(rng: &mut StdRng) -> CavitySystem {
    let mut sys = negative_g().system;
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let length = rng.random_range(0.05..1.0);
    let g1: f64 = sign * rng.random_range(0.05..0.95);
    let g2: f64 = sign * rng.random_range(0.05..0.95);
    sys.length = length;
    sys.mirror1.curvature = Curvature::Radius(length / (1.0 - g1));
    sys.mirror2.curvature = Curvature::Radius(length / (1.0 - g2));
    sys.mirror1.yaw_inertia = Some(10f64.powf(rng.random_range(-12.0..-6.0)));
    sys.mirror2.yaw_inertia = Some(10f64.powf(rng.random_range(-9.0..-5.0)));
    sys
}

use num_complex::Complex64;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use tsl_core::dynamics::StiffnessSystem;
use tsl_core::response::model_response;
use tsl_core::{approx_differential_frequency, fit_resonance, PowerPoint, ResonanceFit, TransferFunctionData};

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

/// One fit of the (2 Hz, ζ = 0.05, A = 1) resonance with 1% Gaussian magnitude
/// noise; returns (fitted f0, 1σ).
pub fn noisy_fit_trial(seed: u64) -> (f64, f64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let freqs = log_spaced(0.2, 20.0, 200);
    let clean = model_response(2.0, 0.05, 1.0, &freqs).unwrap();
    let sigma: Vec<f64> = clean.response.iter().map(|h| 0.01 * h.norm()).collect();
    let noisy: Vec<Complex64> = clean
        .response
        .iter()
        .map(|h| h * (1.0 + noise.sample(&mut rng)))
        .collect();
    let data = TransferFunctionData::new(freqs, noisy, Some(sigma)).unwrap();
    let fit = fit_resonance(&data, None).unwrap();
    (fit.resonant_frequency, fit.sigma()[0])
}

/// Single-mirror differential frequency in Hz at a given length and power.
pub fn single_mirror_frequency(sys: &CavitySystem, length: f64, power: f64) -> f64 {
    let shifted = CavitySystem { length, ..sys.clone() };
    let s = StiffnessSystem::from_system(&shifted, power).unwrap();
    approx_differential_frequency(&s).angular_frequency().unwrap() / (2.0 * std::f64::consts::PI)
}

/// A resonance "measurement" at `power` produced by a cavity whose true length
/// and power calibration are drawn inside the stated uncertainties.
pub fn synthetic_point(sys: &CavitySystem, rng: &mut StdRng, power: f64, power_sigma: f64, length_sigma: f64, scale_sigma: f64) -> PowerPoint {
    let length = sys.length + rng.random_range(-length_sigma..=length_sigma);
    let true_power = (power + rng.random_range(-power_sigma..=power_sigma)) * (1.0 + rng.random_range(-scale_sigma..=scale_sigma));
    let f = single_mirror_frequency(sys, length, true_power);
    PowerPoint {
        power,
        power_sigma,
        fit: ResonanceFit {
            resonant_frequency: f,
            damping_ratio: 0.05,
            gain: 1.0,
            covariance: [[0.0; 3]; 3],
            residual_norm: 0.0,
            converged: true,
            iterations: 0,
        },
    }
}
