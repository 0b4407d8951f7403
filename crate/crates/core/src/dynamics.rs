//! Coupled yaw dynamics of the two suspended mirrors under radiation-pressure
//! torque.
//!
//! The equation of motion is `(K_opt + K_mech − I ω²) α = T`, where the
//! optical torsional stiffness
//!
//! ```text
//! K_opt = 2P / (c (R1 + R2 − L)) · | R1(L − R2)   R1 R2      |
//!                                  | R1 R2        R2(L − R1) |
//! ```
//!
//! can equivalently be written `β · [[−g2, 1], [1, −g1]]` with
//! `β = 2PL / (c (1 − g1 g2))`. Angles are measured about a common vertical
//! axis, so a mode whose components share sign has both mirrors turning the
//! same way.

use rayon::prelude::*;
use serde::Serialize;

use crate::constants::SPEED_OF_LIGHT;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::geometry::CavitySystem;

pub type Mat2 = [[f64; 2]; 2];

/// How the mechanical yaw restoring torque is specified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum YawSpring {
    /// N·m/rad
    Stiffness(f64),
    /// Free yaw resonance, rad/s; K = I ω².
    Frequency(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuspensionSpec {
    pub yaw: YawSpring,
    pub quality_factor: f64,
    /// Longitudinal pendulum resonance, rad/s.
    pub pendulum_frequency: f64,
}

impl SuspensionSpec {
    pub fn validate(&self) -> Result<()> {
        match self.yaw {
            YawSpring::Stiffness(k) => ensure_positive("yaw_stiffness", k)?,
            YawSpring::Frequency(w) => ensure_positive("yaw_frequency", w)?,
        }
        ensure_positive("quality_factor", self.quality_factor)?;
        ensure_positive("pendulum_frequency", self.pendulum_frequency)
    }

    pub fn rotational_stiffness(&self, inertia: f64) -> f64 {
        match self.yaw {
            YawSpring::Stiffness(k) => k,
            YawSpring::Frequency(w) => inertia * w * w,
        }
    }
}

/// Everything the eigenproblem needs at one intracavity power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StiffnessSystem {
    pub k_opt: Mat2,
    /// Diagonal of the mechanical stiffness matrix.
    pub k_mech: [f64; 2],
    /// Diagonal of the inertia matrix.
    pub inertia: [f64; 2],
    pub beta: f64,
    pub g1: f64,
    pub g2: f64,
}

impl StiffnessSystem {
    pub fn from_system(system: &CavitySystem, intracavity_power: f64) -> Result<Self> {
        let (g1, g2) = system.check_stable()?;
        Ok(StiffnessSystem {
            k_opt: optical_stiffness(system, intracavity_power)?,
            k_mech: system.mechanical_stiffness(),
            inertia: system.inertia(),
            beta: beta(system, intracavity_power)?,
            g1,
            g2,
        })
    }

    pub fn total_stiffness(&self) -> Mat2 {
        let mut k = self.k_opt;
        k[0][0] += self.k_mech[0];
        k[1][1] += self.k_mech[1];
        k
    }

    fn check(&self) -> Result<()> {
        let finite = self
            .k_opt
            .iter()
            .flatten()
            .chain(&self.k_mech)
            .chain(&self.inertia)
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("stiffness system"));
        }
        if self.inertia.iter().any(|&i| i <= 0.0) {
            return Err(Error::InvalidParameter {
                name: "inertia",
                value: self.inertia[0].min(self.inertia[1]),
                reason: "must be positive",
            });
        }
        Ok(())
    }
}

/// Optical torsional stiffness matrix, N·m/rad.
///
/// Evaluated in inverse-curvature form (numerator and denominator multiplied
/// by 1/(R1 R2)) so that flat mirrors need no special case.
pub fn optical_stiffness(system: &CavitySystem, intracavity_power: f64) -> Result<Mat2> {
    ensure_non_negative("intracavity_power", intracavity_power)?;
    system.check_stable()?;
    let l = system.length;
    let rho1 = system.mirror1.curvature.inverse_radius();
    let rho2 = system.mirror2.curvature.inverse_radius();
    let denom = rho1 + rho2 - l * rho1 * rho2;
    if denom == 0.0 {
        return Err(Error::DegenerateGeometry("R1 + R2 = L"));
    }
    let scale = 2.0 * intracavity_power / (SPEED_OF_LIGHT * denom);
    Ok([
        [scale * (l * rho2 - 1.0), scale],
        [scale, scale * (l * rho1 - 1.0)],
    ])
}

/// β = 2PL / [c (1 − g1 g2)], N·m/rad.
pub fn beta(system: &CavitySystem, intracavity_power: f64) -> Result<f64> {
    let (g1, g2) = system.check_stable()?;
    Ok(2.0 * intracavity_power * system.length / (SPEED_OF_LIGHT * (1.0 - g1 * g2)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeLabel {
    Differential,
    Common,
}

impl std::fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ModeLabel::Differential => "differential",
            ModeLabel::Common => "common",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// rad²/s²; negative when the mode is unstable.
    pub squared_angular_frequency: f64,
    /// Unit Euclidean norm, sign chosen so the inertia-dominant component is positive.
    pub eigenvector: [f64; 2],
    pub label: ModeLabel,
}

impl Mode {
    pub fn stable(&self) -> bool {
        self.squared_angular_frequency > 0.0
    }

    /// rad/s, only for non-negative ω².
    pub fn angular_frequency(&self) -> Option<f64> {
        (self.squared_angular_frequency >= 0.0).then(|| self.squared_angular_frequency.sqrt())
    }

    /// ±√|ω²| / 2π in Hz, negative for an unstable mode.
    pub fn signed_frequency_hz(&self) -> f64 {
        let w = self.squared_angular_frequency.abs().sqrt() / (2.0 * std::f64::consts::PI);
        if self.squared_angular_frequency < 0.0 {
            -w
        } else {
            w
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub differential: Mode,
    pub common: Mode,
}

impl ModeSolution {
    pub fn mode(&self, label: ModeLabel) -> &Mode {
        match label {
            ModeLabel::Differential => &self.differential,
            ModeLabel::Common => &self.common,
        }
    }

    pub fn all_stable(&self) -> bool {
        self.differential.stable() && self.common.stable()
    }

    /// Eigenvalues sorted ascending.
    pub fn sorted_squared_frequencies(&self) -> [f64; 2] {
        let (a, b) = (
            self.differential.squared_angular_frequency,
            self.common.squared_angular_frequency,
        );
        if a <= b {
            [a, b]
        } else {
            [b, a]
        }
    }
}

/// Relative tolerance under which the inertia-weighted participation of the two
/// mirrors is treated as equal and the sign rule decides the label.
const LABEL_TIE_TOLERANCE: f64 = 1e-9;

/// Solve det(K_total − ω² I) = 0 for the symmetric pencil.
///
/// The pencil is reduced to `A = I^{-1/2} K I^{-1/2}` and diagonalised by a
/// single Jacobi rotation, so the eigenvectors come out I-orthogonal.
pub fn solve_modes(stiffness: &StiffnessSystem) -> Result<ModeSolution> {
    stiffness.check()?;
    let k = stiffness.total_stiffness();
    let s = [stiffness.inertia[0].sqrt(), stiffness.inertia[1].sqrt()];
    let a = k[0][0] / (s[0] * s[0]);
    let d = k[1][1] / (s[1] * s[1]);
    let b = 0.5 * (k[0][1] + k[1][0]) / (s[0] * s[1]);

    let theta = 0.5 * (2.0 * b).atan2(a - d);
    let (sn, cs) = theta.sin_cos();
    let lam1 = a * cs * cs + 2.0 * b * sn * cs + d * sn * sn;
    let lam2 = a * sn * sn - 2.0 * b * sn * cs + d * cs * cs;
    if !(lam1.is_finite() && lam2.is_finite()) {
        return Err(Error::NonFinite("eigenvalues"));
    }
    // Reduced-coordinate eigenvectors.
    let u1 = [cs, sn];
    let u2 = [-sn, cs];

    let physical = |u: [f64; 2]| {
        let v = [u[0] / s[0], u[1] / s[1]];
        let n = v[0].hypot(v[1]);
        let v = [v[0] / n, v[1] / n];
        // Orient along whichever mirror carries more of the reduced norm.
        let dominant = if u[0].abs() >= u[1].abs() { v[0] } else { v[1] };
        if dominant < 0.0 {
            [-v[0], -v[1]]
        } else {
            v
        }
    };

    let share_sign = |u: [f64; 2]| u[0] * u[1] > 0.0;
    let first_is_differential = {
        let (w1, w2) = (u1[0].abs(), u2[0].abs());
        if (w1 - w2).abs() > LABEL_TIE_TOLERANCE * w1.max(w2) {
            w1 > w2
        } else if share_sign(u1) != share_sign(u2) {
            share_sign(u1)
        } else {
            true
        }
    };

    let mode1 = |label| Mode {
        squared_angular_frequency: lam1,
        eigenvector: physical(u1),
        label,
    };
    let mode2 = |label| Mode {
        squared_angular_frequency: lam2,
        eigenvector: physical(u2),
        label,
    };
    Ok(if first_is_differential {
        ModeSolution {
            differential: mode1(ModeLabel::Differential),
            common: mode2(ModeLabel::Common),
        }
    } else {
        ModeSolution {
            differential: mode2(ModeLabel::Differential),
            common: mode1(ModeLabel::Common),
        }
    })
}

/// Result of the closed-form single-mirror approximations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxFrequency {
    /// rad/s
    Stable(f64),
    /// The radicand ω² (rad²/s²), negative.
    Unstable(f64),
}

impl ApproxFrequency {
    fn from_radicand(w2: f64) -> Self {
        if w2 > 0.0 {
            ApproxFrequency::Stable(w2.sqrt())
        } else {
            ApproxFrequency::Unstable(w2)
        }
    }

    pub fn squared(&self) -> f64 {
        match *self {
            ApproxFrequency::Stable(w) => w * w,
            ApproxFrequency::Unstable(w2) => w2,
        }
    }

    pub fn angular_frequency(&self) -> Option<f64> {
        match *self {
            ApproxFrequency::Stable(w) => Some(w),
            ApproxFrequency::Unstable(_) => None,
        }
    }
}

/// ω_diff ≃ √((K1 − β g2) / I1), valid when I1 ≪ I2 and K1 ≪ K2.
pub fn approx_differential_frequency(stiffness: &StiffnessSystem) -> ApproxFrequency {
    let radicand =
        (stiffness.k_mech[0] - stiffness.beta * stiffness.g2) / stiffness.inertia[0];
    ApproxFrequency::from_radicand(radicand)
}

/// ω_com ≃ √((K2 + β(1 − g²)/g) / I2) for identical mirror curvatures.
pub fn approx_common_frequency(stiffness: &StiffnessSystem) -> Result<ApproxFrequency> {
    let (g1, g2) = (stiffness.g1, stiffness.g2);
    if (g1 - g2).abs() > 1e-12 * g1.abs().max(g2.abs()).max(1e-300) {
        return Err(Error::AsymmetricCurvature { g1, g2 });
    }
    let g = g1;
    if g == 0.0 {
        return Err(Error::DegenerateGeometry("g = 0"));
    }
    let radicand =
        (stiffness.k_mech[1] + stiffness.beta * (1.0 - g * g) / g) / stiffness.inertia[1];
    Ok(ApproxFrequency::from_radicand(radicand))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub power: f64,
    pub modes: Result<ModeSolution>,
}

/// Exact mode solution at each power. Points fail independently.
pub fn power_sweep(system: &CavitySystem, powers: &[f64]) -> Vec<SweepPoint> {
    powers
        .par_iter()
        .map(|&power| SweepPoint {
            power,
            modes: StiffnessSystem::from_system(system, power).and_then(|s| solve_modes(&s)),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPower {
    /// W
    pub power: f64,
    pub mode: ModeLabel,
}

/// Log-spaced bracketing density for [`critical_powers`].
pub const CRITICAL_GRID_POINTS_PER_DECADE: usize = 200;
const CRITICAL_GRID_START: f64 = 1e-3;
const CRITICAL_POWER_RTOL: f64 = 1e-10;

/// Powers in (0, p_max] where a mode's squared frequency crosses zero.
pub fn critical_powers(system: &CavitySystem, p_max: f64) -> Result<Vec<CriticalPower>> {
    critical_powers_with_grid(system, p_max, CRITICAL_GRID_POINTS_PER_DECADE)
}

pub fn critical_powers_with_grid(
    system: &CavitySystem,
    p_max: f64,
    points_per_decade: usize,
) -> Result<Vec<CriticalPower>> {
    ensure_positive("p_max", p_max)?;
    if points_per_decade == 0 {
        return Err(Error::InvalidParameter {
            name: "points_per_decade",
            value: 0.0,
            reason: "must be at least 1",
        });
    }
    system.check_stable()?;

    let eigen_at = |p: f64| -> Result<[f64; 2]> {
        let s = StiffnessSystem::from_system(system, p)?;
        Ok(solve_modes(&s)?.sorted_squared_frequencies())
    };

    let grid = bracketing_grid(p_max, points_per_decade);
    let values = grid
        .iter()
        .map(|&p| eigen_at(p))
        .collect::<Result<Vec<_>>>()?;

    let mut found = Vec::new();
    for w in 0..grid.len() - 1 {
        for branch in 0..2 {
            let (v0, v1) = (values[w][branch], values[w + 1][branch]);
            if (v0 > 0.0) == (v1 > 0.0) {
                continue;
            }
            let (mut lo, mut hi) = (grid[w], grid[w + 1]);
            let lo_positive = v0 > 0.0;
            while hi - lo > CRITICAL_POWER_RTOL * hi {
                let mid = 0.5 * (lo + hi);
                let v = eigen_at(mid)?[branch];
                if (v > 0.0) == lo_positive {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let power = 0.5 * (lo + hi);
            let modes = solve_modes(&StiffnessSystem::from_system(system, power)?)?;
            let mode = if modes.differential.squared_angular_frequency.abs()
                <= modes.common.squared_angular_frequency.abs()
            {
                ModeLabel::Differential
            } else {
                ModeLabel::Common
            };
            found.push(CriticalPower { power, mode });
        }
    }
    found.sort_by(|a, b| a.power.total_cmp(&b.power));
    Ok(found)
}

/// 0, then log-spaced points from 1 mW up to and including `p_max`.
fn bracketing_grid(p_max: f64, points_per_decade: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if p_max > CRITICAL_GRID_START {
        let decades = (p_max / CRITICAL_GRID_START).log10();
        let n = (decades * points_per_decade as f64).ceil() as usize;
        for k in 0..n {
            let p = CRITICAL_GRID_START * 10f64.powf(k as f64 / points_per_decade as f64);
            if p < p_max {
                grid.push(p);
            }
        }
    }
    grid.push(p_max);
    grid
}
