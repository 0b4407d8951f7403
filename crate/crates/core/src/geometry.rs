//! Two-mirror resonator geometry: g factors, finesse, cavity pole, Gaussian
//! spot sizes and quarter-wave coating stacks.
//!
//! Mirror 1 is the light test mass at z = 0, mirror 2 the heavy input mirror
//! at z = L. A positive radius of curvature is concave toward the cavity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::SuspensionSpec;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};

/// Elastic, dissipative and optical constants of one material.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialProps {
    /// Pa
    pub young_modulus: f64,
    pub poisson_ratio: f64,
    pub loss_angle: f64,
    pub refractive_index: f64,
}

impl MaterialProps {
    /// Fused-silica substrate.
    pub const FUSED_SILICA: MaterialProps = MaterialProps {
        young_modulus: 73e9,
        poisson_ratio: 0.17,
        loss_angle: 1e-5,
        refractive_index: 1.45,
    };

    /// SiO₂ low-index coating layer.
    pub const SILICA_COATING: MaterialProps = MaterialProps {
        young_modulus: 73e9,
        poisson_ratio: 0.17,
        loss_angle: 1e-4,
        refractive_index: 1.45,
    };

    /// TiO₂-doped Ta₂O₅ high-index coating layer.
    pub const TITANIA_TANTALA_COATING: MaterialProps = MaterialProps {
        young_modulus: 140e9,
        poisson_ratio: 0.28,
        loss_angle: 4e-4,
        refractive_index: 2.07,
    };

    pub fn validate(&self) -> Result<()> {
        ensure_positive("young_modulus", self.young_modulus)?;
        if !(0.0..0.5).contains(&self.poisson_ratio) {
            return Err(Error::InvalidParameter {
                name: "poisson_ratio",
                value: self.poisson_ratio,
                reason: "must lie in [0, 0.5)",
            });
        }
        ensure_non_negative("loss_angle", self.loss_angle)?;
        if !(self.refractive_index >= 1.0 && self.refractive_index.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "refractive_index",
                value: self.refractive_index,
                reason: "must be >= 1",
            });
        }
        Ok(())
    }
}

/// Mirror surface shape. Flat mirrors have g = 1 exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Curvature {
    Flat,
    /// Radius of curvature in m, positive = concave toward the cavity.
    Radius(f64),
}

impl Curvature {
    /// Inverse radius of curvature, 1/m (zero for a flat mirror).
    pub fn inverse_radius(&self) -> f64 {
        match *self {
            Curvature::Flat => 0.0,
            Curvature::Radius(r) => 1.0 / r,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MirrorSpec {
    /// kg
    pub mass: f64,
    /// Face radius, m.
    pub radius: f64,
    /// m
    pub thickness: f64,
    pub curvature: Curvature,
    pub power_reflectivity: f64,
    pub substrate: MaterialProps,
    pub coat_low: MaterialProps,
    pub coat_high: MaterialProps,
    /// Yaw moment of inertia, kg·m². Overrides the cylinder formula when set.
    pub yaw_inertia: Option<f64>,
    /// Beam radius on this mirror, m. Overrides the resonator-mode value when set.
    pub beam_radius: Option<f64>,
}

impl MirrorSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("mass", self.mass)?;
        ensure_positive("radius", self.radius)?;
        ensure_positive("thickness", self.thickness)?;
        if let Curvature::Radius(r) = self.curvature {
            if r == 0.0 || !r.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "radius_of_curvature",
                    value: r,
                    reason: "must be finite and non-zero (use a flat mirror instead)",
                });
            }
        }
        if !(self.power_reflectivity > 0.0 && self.power_reflectivity <= 1.0) {
            return Err(Error::InvalidParameter {
                name: "power_reflectivity",
                value: self.power_reflectivity,
                reason: "must lie in (0, 1]",
            });
        }
        self.substrate.validate()?;
        self.coat_low.validate()?;
        self.coat_high.validate()?;
        if let Some(i) = self.yaw_inertia {
            ensure_positive("yaw_inertia", i)?;
        }
        if let Some(w) = self.beam_radius {
            ensure_positive("beam_radius", w)?;
        }
        Ok(())
    }

    /// Yaw moment of inertia about the vertical diameter of a cylinder,
    /// m·r²/4 + m·t²/12, unless overridden.
    pub fn yaw_inertia(&self) -> f64 {
        self.yaw_inertia.unwrap_or_else(|| {
            self.mass * self.radius * self.radius / 4.0
                + self.mass * self.thickness * self.thickness / 12.0
        })
    }

    /// Area of one face, m².
    pub fn face_area(&self) -> f64 {
        PI * self.radius * self.radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MirrorIndex {
    /// Light test mass.
    First,
    /// Heavy input mirror.
    Second,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavitySystem {
    pub mirror1: MirrorSpec,
    pub mirror2: MirrorSpec,
    pub suspension1: SuspensionSpec,
    pub suspension2: SuspensionSpec,
    /// m
    pub length: f64,
    /// m
    pub wavelength: f64,
    /// W
    pub input_power: Option<f64>,
    /// W
    pub intracavity_power: Option<f64>,
    /// Measured finesse; replaces the lossless two-mirror value when set.
    pub finesse_override: Option<f64>,
}

impl CavitySystem {
    pub fn validate(&self) -> Result<()> {
        self.mirror1.validate()?;
        self.mirror2.validate()?;
        self.suspension1.validate()?;
        self.suspension2.validate()?;
        ensure_positive("length", self.length)?;
        ensure_positive("wavelength", self.wavelength)?;
        if self.input_power.is_none() && self.intracavity_power.is_none() {
            return Err(Error::InvalidParameter {
                name: "intracavity_power",
                value: f64::NAN,
                reason: "one of input_power / intracavity_power is required",
            });
        }
        if let Some(p) = self.input_power {
            ensure_non_negative("input_power", p)?;
        }
        if let Some(p) = self.intracavity_power {
            ensure_non_negative("intracavity_power", p)?;
        }
        if let Some(f) = self.finesse_override {
            ensure_positive("finesse", f)?;
        }
        Ok(())
    }

    pub fn mirror(&self, which: MirrorIndex) -> &MirrorSpec {
        match which {
            MirrorIndex::First => &self.mirror1,
            MirrorIndex::Second => &self.mirror2,
        }
    }

    pub fn g1(&self) -> f64 {
        mirror_g(self.length, self.mirror1.curvature)
    }

    pub fn g2(&self) -> f64 {
        mirror_g(self.length, self.mirror2.curvature)
    }

    /// Fails unless 0 < g1·g2 < 1.
    pub fn check_stable(&self) -> Result<(f64, f64)> {
        let (g1, g2) = (self.g1(), self.g2());
        if resonator_is_stable(g1, g2) {
            Ok((g1, g2))
        } else {
            Err(Error::UnstableResonator { g1, g2 })
        }
    }

    pub fn inertia(&self) -> [f64; 2] {
        [self.mirror1.yaw_inertia(), self.mirror2.yaw_inertia()]
    }

    /// Mechanical yaw stiffness of both suspensions, N·m/rad.
    pub fn mechanical_stiffness(&self) -> [f64; 2] {
        let [i1, i2] = self.inertia();
        [
            self.suspension1.rotational_stiffness(i1),
            self.suspension2.rotational_stiffness(i2),
        ]
    }

    pub fn finesse(&self) -> Result<f64> {
        match self.finesse_override {
            Some(f) => Ok(f),
            None => finesse_from_reflectivities(
                self.mirror1.power_reflectivity,
                self.mirror2.power_reflectivity,
            ),
        }
    }

    /// Circulating power. The stated intracavity power wins; otherwise it is
    /// derived from the input power with the ideal buildup 2F/π.
    pub fn intracavity_power(&self) -> Result<f64> {
        match (self.intracavity_power, self.input_power) {
            (Some(p), _) => Ok(p),
            (None, Some(pin)) => Ok(pin * 2.0 * self.finesse()? / PI),
            (None, None) => Err(Error::InvalidParameter {
                name: "intracavity_power",
                value: f64::NAN,
                reason: "no power given",
            }),
        }
    }

    /// Ratio of the stated intracavity power to the ideal buildup of the
    /// stated input power, when both are given.
    pub fn mode_matching_efficiency(&self) -> Option<f64> {
        let pc = self.intracavity_power?;
        let pin = self.input_power?;
        let f = self.finesse().ok()?;
        (pin > 0.0).then(|| pc / (pin * 2.0 * f / PI))
    }

    /// Beam radius on a mirror: the override if present, else the resonator mode.
    pub fn beam_radius(&self, which: MirrorIndex) -> Result<f64> {
        match self.mirror(which).beam_radius {
            Some(w) => Ok(w),
            None => spot_size_on_mirror(self, which),
        }
    }

    pub fn with_intracavity_power(&self, power: f64) -> CavitySystem {
        CavitySystem {
            intracavity_power: Some(power),
            ..self.clone()
        }
    }
}

fn mirror_g(length: f64, curvature: Curvature) -> f64 {
    match curvature {
        Curvature::Flat => 1.0,
        Curvature::Radius(r) => g_factor(length, r),
    }
}

/// g = 1 − L/R.
pub fn g_factor(length: f64, radius_of_curvature: f64) -> f64 {
    1.0 - length / radius_of_curvature
}

/// True iff 0 < g1·g2 < 1 (both boundaries excluded).
pub fn resonator_is_stable(g1: f64, g2: f64) -> bool {
    let p = g1 * g2;
    p > 0.0 && p < 1.0
}

/// Lossless two-mirror finesse π(R1R2)^¼ / (1 − √(R1R2)).
pub fn finesse_from_reflectivities(r1: f64, r2: f64) -> Result<f64> {
    for (name, r) in [("R1", r1), ("R2", r2)] {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("{name} = {r} must be positive")));
        }
    }
    let product = r1 * r2;
    if product >= 1.0 {
        return Err(Error::Domain(format!(
            "R1*R2 = {product} >= 1; finesse diverges"
        )));
    }
    Ok(PI * product.powf(0.25) / (1.0 - product.sqrt()))
}

/// Half-width at half maximum of the cavity resonance, rad/s.
pub fn cavity_pole(length: f64, finesse: f64) -> f64 {
    PI * SPEED_OF_LIGHT / (2.0 * length * finesse)
}

/// 1/e² intensity radius of the fundamental mode on the selected mirror.
pub fn spot_size_on_mirror(system: &CavitySystem, which: MirrorIndex) -> Result<f64> {
    let (g1, g2) = (system.g1(), system.g2());
    if g1 * g2 < 0.0 {
        return Err(Error::OppositeSignG { g1, g2 });
    }
    system.check_stable()?;
    let (g_here, g_other) = match which {
        MirrorIndex::First => (g1, g2),
        MirrorIndex::Second => (g2, g1),
    };
    let scale = system.length * system.wavelength / PI;
    let w2 = scale * (g_other / (g_here * (1.0 - g1 * g2))).sqrt();
    Ok(w2.sqrt())
}

/// Dielectric layer at normal incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layer {
    pub refractive_index: f64,
    /// m
    pub thickness: f64,
}

/// Power transmission of a lossless multilayer by characteristic matrices.
///
/// `layers` are ordered from the incident side toward the substrate.
pub fn stack_transmission(
    layers: &[Layer],
    n_incident: f64,
    n_substrate: f64,
    wavelength: f64,
) -> f64 {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[one, zero], [zero, one]];
    for layer in layers {
        let delta = 2.0 * PI * layer.refractive_index * layer.thickness / wavelength;
        let (s, c) = delta.sin_cos();
        let n = layer.refractive_index;
        let l = [
            [Complex64::new(c, 0.0), Complex64::new(0.0, s / n)],
            [Complex64::new(0.0, s * n), Complex64::new(c, 0.0)],
        ];
        m = [
            [
                m[0][0] * l[0][0] + m[0][1] * l[1][0],
                m[0][0] * l[0][1] + m[0][1] * l[1][1],
            ],
            [
                m[1][0] * l[0][0] + m[1][1] * l[1][0],
                m[1][0] * l[0][1] + m[1][1] * l[1][1],
            ],
        ];
    }
    let b = m[0][0] + m[0][1] * n_substrate;
    let c = m[1][0] + m[1][1] * n_substrate;
    let denom = (b * n_incident + c).norm_sqr();
    4.0 * n_incident * n_substrate / denom
}

/// Closed-form transmission of `doublets` quarter-wave (high, low) pairs facing
/// vacuum: Y = n_s(n_H/n_L)^{2N}, T = 4Y/(1+Y)².
pub fn quarter_wave_doublet_transmission(
    doublets: usize,
    n_low: f64,
    n_high: f64,
    n_substrate: f64,
) -> f64 {
    let y = n_substrate * (n_high / n_low).powi(2 * doublets as i32);
    4.0 * y / ((1.0 + y) * (1.0 + y))
}

pub const MAX_DOUBLETS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StackSummary {
    pub doublet_count: usize,
    /// m
    pub total_physical_thickness: f64,
    /// Thickness-weighted mean loss angle of the two materials.
    pub effective_loss_angle: f64,
    pub transmission: f64,
}

/// Layers of `doublets` quarter-wave (high, low) pairs, incident side first.
pub fn quarter_wave_layers(
    doublets: usize,
    n_low: f64,
    n_high: f64,
    wavelength: f64,
) -> Vec<Layer> {
    let high = Layer {
        refractive_index: n_high,
        thickness: wavelength / (4.0 * n_high),
    };
    let low = Layer {
        refractive_index: n_low,
        thickness: wavelength / (4.0 * n_low),
    };
    (0..doublets).flat_map(|_| [high, low]).collect()
}

/// Smallest quarter-wave stack whose transmission is at or below `target`.
pub fn quarter_wave_stack(
    target_transmission: f64,
    low: &MaterialProps,
    high: &MaterialProps,
    n_substrate: f64,
    wavelength: f64,
) -> Result<StackSummary> {
    let (n_low, n_high) = (low.refractive_index, high.refractive_index);
    if !(n_high > n_low && n_low >= 1.0) {
        return Err(Error::InvalidParameter {
            name: "n_high",
            value: n_high,
            reason: "need n_high > n_low >= 1",
        });
    }
    if !(target_transmission > 0.0 && target_transmission < 1.0) {
        return Err(Error::InvalidParameter {
            name: "target_transmission",
            value: target_transmission,
            reason: "must lie in (0, 1)",
        });
    }
    ensure_positive("wavelength", wavelength)?;

    for doublets in 0..=MAX_DOUBLETS {
        let layers = quarter_wave_layers(doublets, n_low, n_high, wavelength);
        let t = stack_transmission(&layers, 1.0, n_substrate, wavelength);
        if t <= target_transmission {
            let d_low = doublets as f64 * wavelength / (4.0 * n_low);
            let d_high = doublets as f64 * wavelength / (4.0 * n_high);
            let total = d_low + d_high;
            let phi = if total > 0.0 {
                (d_low * low.loss_angle + d_high * high.loss_angle) / total
            } else {
                0.0
            };
            return Ok(StackSummary {
                doublet_count: doublets,
                total_physical_thickness: total,
                effective_loss_angle: phi,
                transmission: t,
            });
        }
    }
    Err(Error::StackUnreachable {
        target: target_transmission,
        max_doublets: MAX_DOUBLETS,
    })
}
