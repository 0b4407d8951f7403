//! Cavity-axis shift under mirror yaw and the torques it produces.
//!
//! Positive angles turn a mirror counterclockwise seen from above, about the
//! same vertical axis for both mirrors. Spot displacements are measured along
//! one common transverse axis. With these conventions radiation pressure
//! pushes mirror 1 toward −z and mirror 2 toward +z, so `T1 = +F·spot1` and
//! `T2 = −F·spot2` with `F = 2P/c`, and `−∂T/∂α` is exactly the optical
//! stiffness matrix.

use num_complex::Complex64;

use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::Mat2;
use crate::error::{ensure_non_negative, Error, Result};
use crate::geometry::CavitySystem;

/// Central-difference step for [`stiffness_from_geometry`], rad.
pub const FINITE_DIFFERENCE_STEP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpotState {
    /// Beam-spot displacement on mirror 1, m.
    pub spot1: f64,
    /// Beam-spot displacement on mirror 2, m.
    pub spot2: f64,
    /// Slope of the optical axis, rad.
    pub axis_tilt: f64,
    /// Axis displacement in the mirror-1 reference plane, m.
    pub axis_offset: f64,
}

impl SpotState {
    /// True if either spot sits further than half the mirror radius from the
    /// centre (clipping is not modeled beyond this warning).
    pub fn exceeds_clearance(&self, system: &CavitySystem) -> bool {
        self.spot1.abs() > 0.5 * system.mirror1.radius
            || self.spot2.abs() > 0.5 * system.mirror2.radius
    }
}

/// Linearised spot positions for small mirror angles.
///
/// The optical axis is the line through both centres of curvature. Writing it
/// as `x(z) = x0 + t·z` and requiring it to pass through each (displaced)
/// centre of curvature gives, in inverse-curvature form,
///
/// ```text
/// ρ1·x0 + t            =  α1
/// ρ2·x0 + (Lρ2 − 1)·t  = −α2
/// ```
pub fn spots_from_angles(system: &CavitySystem, alpha1: f64, alpha2: f64) -> Result<SpotState> {
    system.check_stable()?;
    if !(alpha1.is_finite() && alpha2.is_finite()) {
        return Err(Error::NonFinite("mirror angles"));
    }
    let l = system.length;
    let rho1 = system.mirror1.curvature.inverse_radius();
    let rho2 = system.mirror2.curvature.inverse_radius();
    let det = rho1 * (l * rho2 - 1.0) - rho2;
    if det == 0.0 {
        return Err(Error::DegenerateGeometry("R1 + R2 = L"));
    }
    let x0 = (alpha1 * (l * rho2 - 1.0) + alpha2) / det;
    let t = (-alpha2 * rho1 - rho2 * alpha1) / det;
    Ok(SpotState {
        spot1: x0,
        spot2: x0 + t * l,
        axis_tilt: t,
        axis_offset: x0,
    })
}

/// Radiation-pressure yaw torques (T1, T2) in N·m.
pub fn torques_from_spots(intracavity_power: f64, spots: &SpotState) -> Result<(f64, f64)> {
    ensure_non_negative("intracavity_power", intracavity_power)?;
    let force = 2.0 * intracavity_power / SPEED_OF_LIGHT;
    Ok((force * spots.spot1, -force * spots.spot2))
}

fn torques_at(system: &CavitySystem, power: f64, a1: f64, a2: f64) -> Result<(f64, f64)> {
    torques_from_spots(power, &spots_from_angles(system, a1, a2)?)
}

/// Optical stiffness regenerated as the central-difference Jacobian −∂T/∂α of
/// the spot-then-torque map.
pub fn stiffness_from_geometry(system: &CavitySystem, intracavity_power: f64) -> Result<Mat2> {
    let h = FINITE_DIFFERENCE_STEP;
    let mut k = [[0.0; 2]; 2];
    for j in 0..2 {
        let (mut plus, mut minus) = ([0.0; 2], [0.0; 2]);
        plus[j] = h;
        minus[j] = -h;
        let tp = torques_at(system, intracavity_power, plus[0], plus[1])?;
        let tm = torques_at(system, intracavity_power, minus[0], minus[1])?;
        k[0][j] = -(tp.0 - tm.0) / (2.0 * h);
        k[1][j] = -(tp.1 - tm.1) / (2.0 * h);
    }
    Ok(k)
}

/// Spot on mirror 1 for complex (phasor) angles, using linearity of the map.
pub(crate) fn spot1_phasor(system: &CavitySystem, alpha: [Complex64; 2]) -> Result<Complex64> {
    let re = spots_from_angles(system, alpha[0].re, alpha[1].re)?;
    let im = spots_from_angles(system, alpha[0].im, alpha[1].im)?;
    Ok(Complex64::new(re.spot1, im.spot1))
}
