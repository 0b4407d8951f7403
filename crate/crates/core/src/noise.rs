//! Displacement noise budget of the test mass and the band where quantum
//! radiation-pressure noise (QRPN) exceeds the classical sum.
//!
//! All curves are single-sided amplitude spectral densities referred to
//! test-mass longitudinal displacement, m/√Hz. The budget is computed on
//! resonance. Laser intensity noise is taken to be shot-noise limited and has
//! no separate curve.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constants::{BOLTZMANN, HBAR, NITROGEN_MOLECULAR_MASS, SPEED_OF_LIGHT};
use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{cavity_pole, quarter_wave_stack, CavitySystem, MaterialProps, MirrorIndex, MirrorSpec, StackSummary};

/// Formula identifiers carried in output metadata.
pub mod formula {
    pub const QRPN: &str = "qrpn-buildup-2F/pi-single-pole";
    pub const SHOT: &str = "shot-ideal-uncertainty-product";
    pub const SUSPENSION: &str = "suspension-structural-fdt";
    pub const SUBSTRATE: &str = "substrate-brownian-levin-half-space";
    pub const COATING: &str = "coating-brownian-isotropic-weighted-loss";
    pub const SEISMIC: &str = "seismic-1/f2-with-1/f4-isolation";
    pub const GAS: &str = "residual-gas-free-molecular-damping";
    pub const FREQUENCY: &str = "laser-frequency-10Hz/f";
}

/// Free-running laser frequency noise coefficient, Hz·Hz/√Hz (10 Hz/f).
pub const FREQUENCY_NOISE_COEFFICIENT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpec {
    /// K
    pub temperature: f64,
    /// Pa
    pub air_pressure: f64,
    /// Ground motion coefficient of the level/f² law, m·Hz^{3/2}.
    pub seismic_level: f64,
    /// Corner above which isolation suppresses ground motion as 1/f⁴, Hz.
    pub isolation_corner: f64,
    /// kg
    pub gas_molecular_mass: f64,
}

impl Default for EnvSpec {
    fn default() -> Self {
        EnvSpec {
            temperature: 300.0,
            air_pressure: 1e-4,
            seismic_level: 1e-7,
            isolation_corner: 1.0,
            gas_molecular_mass: NITROGEN_MOLECULAR_MASS,
        }
    }
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("temperature", self.temperature)?;
        ensure_positive("air_pressure", self.air_pressure)?;
        ensure_positive("seismic_level", self.seismic_level)?;
        ensure_positive("isolation_corner", self.isolation_corner)?;
        ensure_positive("gas_molecular_mass", self.gas_molecular_mass)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCurve {
    pub label: String,
    pub formula_id: &'static str,
    /// Hz
    pub frequencies: Vec<f64>,
    /// m/√Hz
    pub asd: Vec<f64>,
}

/// Mechanical susceptibility 1/(m(ω_p²(1 + i/Q) − Ω²)), m/N.
pub fn mech_susceptibility(mass: f64, pendulum_frequency: f64, quality_factor: f64, omega: f64) -> Complex64 {
    let wp2 = pendulum_frequency * pendulum_frequency;
    1.0 / (mass * Complex64::new(wp2 - omega * omega, wp2 / quality_factor))
}

/// QRPN force ASD on one mirror, N/√Hz:
/// S_F = (8ħω₀P/c²)(2F/π) / (1 + (Ω/γ)²).
pub fn qrpn_force_asd(intracavity_power: f64, finesse: f64, length: f64, wavelength: f64, omega: f64) -> f64 {
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / wavelength;
    let gamma = cavity_pole(length, finesse);
    let x = omega / gamma;
    let s = 8.0 * HBAR * omega0 * intracavity_power / (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
        * (2.0 * finesse / PI)
        / (1.0 + x * x);
    s.sqrt()
}

/// Shot-noise displacement ASD from the ideal uncertainty product: ħ/√S_F.
pub fn shot_noise_displacement_asd(intracavity_power: f64, finesse: f64, length: f64, wavelength: f64, omega: f64) -> f64 {
    HBAR / qrpn_force_asd(intracavity_power, finesse, length, wavelength, omega)
}

/// Suspension thermal noise with structural damping.
pub fn suspension_thermal_asd(mass: f64, pendulum_frequency: f64, quality_factor: f64, temperature: f64, omega: f64) -> f64 {
    let wp2 = pendulum_frequency * pendulum_frequency;
    let detune = wp2 - omega * omega;
    let s = 4.0 * BOLTZMANN * temperature / omega * (wp2 / quality_factor)
        / (mass * (detune * detune + wp2 * wp2 / (quality_factor * quality_factor)));
    s.sqrt()
}

/// Substrate Brownian noise for a Gaussian beam on a half-infinite substrate.
pub fn substrate_brownian_asd(material: &MaterialProps, beam_radius: f64, temperature: f64, frequency: f64) -> f64 {
    let s = 4.0 * BOLTZMANN * temperature / (2.0 * PI * frequency)
        * (1.0 - material.poisson_ratio * material.poisson_ratio)
        * material.loss_angle
        / (PI.sqrt() * material.young_modulus * beam_radius);
    s.sqrt()
}

/// Coating Brownian noise, thin isotropic layer with the stack's weighted loss angle.
pub fn coating_brownian_asd(stack: &StackSummary, substrate: &MaterialProps, beam_radius: f64, temperature: f64, frequency: f64) -> f64 {
    let sigma = substrate.poisson_ratio;
    let s = 4.0 * BOLTZMANN * temperature / (2.0 * PI * frequency)
        * (stack.total_physical_thickness * stack.effective_loss_angle / (PI * beam_radius * beam_radius))
        * ((1.0 + sigma) * (1.0 - 2.0 * sigma) / substrate.young_modulus);
    s.sqrt()
}

/// Ground motion level/f² with 1/f⁴ isolation above the corner.
pub fn seismic_asd(env: &EnvSpec, frequency: f64) -> f64 {
    let suppression = (env.isolation_corner / frequency).powi(4).min(1.0);
    env.seismic_level / (frequency * frequency) * suppression
}

/// Free-molecular gas damping coefficient p·A·√(8m₀/(πk_BT)), kg/s, with both
/// faces of the mirror counted.
pub fn gas_damping(env: &EnvSpec, mirror: &MirrorSpec) -> f64 {
    let area = 2.0 * mirror.face_area();
    env.air_pressure
        * area
        * (8.0 * env.gas_molecular_mass / (PI * BOLTZMANN * env.temperature)).sqrt()
}

/// Residual-gas force noise S_F = 4k_BTβ_gas filtered by the pendulum.
pub fn residual_gas_asd(env: &EnvSpec, mirror: &MirrorSpec, pendulum_frequency: f64, quality_factor: f64, omega: f64) -> f64 {
    let force = (4.0 * BOLTZMANN * env.temperature * gas_damping(env, mirror)).sqrt();
    force * mech_susceptibility(mirror.mass, pendulum_frequency, quality_factor, omega).norm()
}

/// Laser frequency noise converted to cavity-length noise, (L/ν₀)(10/f).
pub fn laser_frequency_noise_asd(system: &CavitySystem, frequency: f64) -> f64 {
    let nu0 = SPEED_OF_LIGHT / system.wavelength;
    system.length / nu0 * (FREQUENCY_NOISE_COEFFICIENT / frequency)
}

/// Cavity and environment reduced to the parameters every source needs.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub env: EnvSpec,
    pub mirror: MirrorSpec,
    pub pendulum_frequency: f64,
    pub quality_factor: f64,
    pub intracavity_power: f64,
    pub finesse: f64,
    pub length: f64,
    pub wavelength: f64,
    pub beam_radius: f64,
    pub stack: StackSummary,
    system: CavitySystem,
}

/// Labels of the classical sources in budget order.
pub const CLASSICAL_SOURCES: [&str; 6] = [
    "seismic",
    "suspension_thermal",
    "residual_gas",
    "substrate_brownian",
    "coating_brownian",
    "laser_frequency",
];

impl NoiseModel {
    pub fn new(system: &CavitySystem, env: &EnvSpec) -> Result<Self> {
        system.validate()?;
        env.validate()?;
        let mirror = system.mirror1.clone();
        let stack = quarter_wave_stack(
            1.0 - mirror.power_reflectivity,
            &mirror.coat_low,
            &mirror.coat_high,
            mirror.substrate.refractive_index,
            system.wavelength,
        )?;
        Ok(NoiseModel {
            env: *env,
            pendulum_frequency: system.suspension1.pendulum_frequency,
            quality_factor: system.suspension1.quality_factor,
            intracavity_power: system.intracavity_power()?,
            finesse: system.finesse()?,
            length: system.length,
            wavelength: system.wavelength,
            beam_radius: system.beam_radius(MirrorIndex::First)?,
            stack,
            mirror,
            system: system.clone(),
        })
    }

    pub fn formula_id(label: &str) -> &'static str {
        match label {
            "seismic" => formula::SEISMIC,
            "suspension_thermal" => formula::SUSPENSION,
            "residual_gas" => formula::GAS,
            "substrate_brownian" => formula::SUBSTRATE,
            "coating_brownian" => formula::COATING,
            "laser_frequency" => formula::FREQUENCY,
            "shot_noise" => formula::SHOT,
            "qrpn" => formula::QRPN,
            _ => "unknown",
        }
    }

    /// Classical source ASDs at one frequency, in [`CLASSICAL_SOURCES`] order.
    pub fn classical_asd(&self, frequency: f64) -> [f64; 6] {
        let omega = 2.0 * PI * frequency;
        let t = self.env.temperature;
        [
            seismic_asd(&self.env, frequency),
            suspension_thermal_asd(self.mirror.mass, self.pendulum_frequency, self.quality_factor, t, omega),
            residual_gas_asd(&self.env, &self.mirror, self.pendulum_frequency, self.quality_factor, omega),
            substrate_brownian_asd(&self.mirror.substrate, self.beam_radius, t, frequency),
            coating_brownian_asd(&self.stack, &self.mirror.substrate, self.beam_radius, t, frequency),
            laser_frequency_noise_asd(&self.system, frequency),
        ]
    }

    pub fn classical_total_asd(&self, frequency: f64) -> f64 {
        self.classical_asd(frequency).iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn qrpn_force(&self, frequency: f64) -> f64 {
        qrpn_force_asd(self.intracavity_power, self.finesse, self.length, self.wavelength, 2.0 * PI * frequency)
    }

    /// QRPN force times |χ|, m/√Hz.
    pub fn qrpn_displacement_asd(&self, frequency: f64) -> f64 {
        let omega = 2.0 * PI * frequency;
        self.qrpn_force(frequency)
            * mech_susceptibility(self.mirror.mass, self.pendulum_frequency, self.quality_factor, omega).norm()
    }

    pub fn shot_noise_asd(&self, frequency: f64) -> f64 {
        shot_noise_displacement_asd(self.intracavity_power, self.finesse, self.length, self.wavelength, 2.0 * PI * frequency)
    }

    /// QRPN / classical total − 1.
    fn excess(&self, frequency: f64) -> f64 {
        self.qrpn_displacement_asd(frequency) / self.classical_total_asd(frequency) - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBudget {
    pub frequencies: Vec<f64>,
    pub sources: Vec<NoiseCurve>,
    pub shot_noise: NoiseCurve,
    pub classical_total: NoiseCurve,
    pub qrpn: NoiseCurve,
    pub model: NoiseModel,
}

impl NoiseBudget {
    /// The budget with one classical source removed and the total recomputed.
    pub fn without(&self, label: &str) -> Result<NoiseBudget> {
        let sources: Vec<NoiseCurve> = self.sources.iter().filter(|c| c.label != label).cloned().collect();
        let classical_total = quadrature_sum(&sources, &self.frequencies)?;
        Ok(NoiseBudget {
            sources,
            classical_total,
            ..self.clone()
        })
    }

    /// Budget export rows: freq, each source, shot noise, classical total, qrpn.
    pub fn csv_header(&self) -> String {
        let mut cols = vec!["freq_hz".to_string()];
        cols.extend(self.sources.iter().map(|c| c.label.clone()));
        cols.push(self.shot_noise.label.clone());
        cols.push("classical_total".into());
        cols.push("qrpn".into());
        cols.join(",")
    }
}

/// √(Σ S_x) over curves sharing `grid`.
pub fn quadrature_sum(curves: &[NoiseCurve], grid: &[f64]) -> Result<NoiseCurve> {
    if curves.iter().any(|c| c.frequencies != grid || c.asd.len() != grid.len()) {
        return Err(Error::GridMismatch);
    }
    let asd = (0..grid.len())
        .map(|i| curves.iter().map(|c| c.asd[i] * c.asd[i]).sum::<f64>().sqrt())
        .collect();
    Ok(NoiseCurve {
        label: "classical_total".into(),
        formula_id: "quadrature-sum",
        frequencies: grid.to_vec(),
        asd,
    })
}

/// Every classical curve, their quadrature total, shot noise and the QRPN
/// displacement curve on `frequencies`.
pub fn total_budget(system: &CavitySystem, env: &EnvSpec, frequencies: &[f64]) -> Result<NoiseBudget> {
    if frequencies.is_empty() {
        return Err(Error::EmptyInput);
    }
    if frequencies.iter().any(|f| !(f.is_finite() && *f > 0.0)) || frequencies.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::GridMismatch);
    }
    let model = NoiseModel::new(system, env)?;
    let rows: Vec<([f64; 6], f64, f64)> = frequencies
        .par_iter()
        .map(|&f| (model.classical_asd(f), model.shot_noise_asd(f), model.qrpn_displacement_asd(f)))
        .collect();
    let grid = frequencies.to_vec();
    let curve = |label: &str, asd: Vec<f64>| NoiseCurve {
        label: label.to_string(),
        formula_id: NoiseModel::formula_id(label),
        frequencies: grid.clone(),
        asd,
    };
    let sources: Vec<NoiseCurve> = CLASSICAL_SOURCES
        .iter()
        .enumerate()
        .map(|(k, label)| curve(label, rows.iter().map(|r| r.0[k]).collect()))
        .collect();
    let classical_total = quadrature_sum(&sources, &grid)?;
    Ok(NoiseBudget {
        shot_noise: curve("shot_noise", rows.iter().map(|r| r.1).collect()),
        qrpn: curve("qrpn", rows.iter().map(|r| r.2).collect()),
        frequencies: grid,
        sources,
        classical_total,
        model,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominanceBand {
    pub f_low: f64,
    pub f_high: f64,
}

pub const MIN_POINTS_PER_DECADE: f64 = 50.0;
const BAND_EDGE_RTOL: f64 = 1e-6;

/// Contiguous frequency intervals where QRPN exceeds the classical total.
///
/// Band edges interior to the grid are refined by bisection; a band that
/// touches the end of the grid stops at the grid end.
pub fn dominance_band(budget: &NoiseBudget) -> Result<Vec<DominanceBand>> {
    let f = &budget.frequencies;
    if f.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: f.len() });
    }
    let coarsest = f.windows(2).map(|w| (w[1] / w[0]).log10()).fold(0.0, f64::max);
    if 1.0 / coarsest < MIN_POINTS_PER_DECADE * (1.0 - 1e-9) {
        return Err(Error::InvalidParameter {
            name: "points_per_decade",
            value: 1.0 / coarsest,
            reason: "dominance search needs at least 50 points per decade",
        });
    }
    let model = &budget.model;
    let above: Vec<bool> = f
        .iter()
        .zip(&budget.qrpn.asd)
        .zip(&budget.classical_total.asd)
        .map(|((_, q), c)| q > c)
        .collect();

    let refine = |lo: f64, hi: f64| -> f64 {
        let lo_sign = model.excess(lo) > 0.0;
        let (mut a, mut b) = (lo, hi);
        while b - a > BAND_EDGE_RTOL * b {
            let mid = (a * b).sqrt();
            if (model.excess(mid) > 0.0) == lo_sign {
                a = mid;
            } else {
                b = mid;
            }
        }
        (a * b).sqrt()
    };

    let mut bands = Vec::new();
    let mut start = above[0].then_some(f[0]);
    for i in 1..f.len() {
        match (above[i - 1], above[i]) {
            (false, true) => start = Some(refine(f[i - 1], f[i])),
            (true, false) => {
                let end = refine(f[i - 1], f[i]);
                bands.push(DominanceBand {
                    f_low: start.take().unwrap_or(f[0]),
                    f_high: end,
                });
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        bands.push(DominanceBand {
            f_low: s,
            f_high: *f.last().unwrap(),
        });
    }
    Ok(bands)
}

/// Log-spaced grid from `f_min` to `f_max` with the given density.
pub fn log_grid(f_min: f64, f_max: f64, points_per_decade: usize) -> Result<Vec<f64>> {
    ensure_positive("freq_min", f_min)?;
    ensure_positive("freq_max", f_max)?;
    if f_max <= f_min || points_per_decade == 0 {
        return Err(Error::InvalidParameter {
            name: "freq_max",
            value: f_max,
            reason: "need freq_max > freq_min and a non-zero density",
        });
    }
    let n = ((f_max / f_min).log10() * points_per_decade as f64).round() as usize;
    let n = n.max(1);
    Ok((0..=n)
        .map(|k| f_min * (f_max / f_min).powf(k as f64 / n as f64))
        .collect())
}
