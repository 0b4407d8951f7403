mod common;

use common::{assert_rel, negative_g, positive_g, random_stable_system, rel};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;

use tsl_core::dynamics::beta;
use tsl_core::{
    approx_common_frequency, approx_differential_frequency, critical_powers, optical_stiffness,
    power_sweep, solve_modes, stiffness_from_geometry, ApproxFrequency, Curvature, Error, ModeLabel,
    StiffnessSystem,
};

/// Roots of det(K − ω² I) = 0 as a quadratic in ω².
fn quadratic_eigenvalues(s: &StiffnessSystem) -> [f64; 2] {
    let k = s.total_stiffness();
    let [i1, i2] = s.inertia;
    let a = i1 * i2;
    let b = -(k[0][0] * i2 + k[1][1] * i1);
    let c = k[0][0] * k[1][1] - k[0][1] * k[1][0];
    let disc = (b * b - 4.0 * a * c).sqrt();
    // Stable form of the two roots.
    let q = -0.5 * (b + b.signum() * disc);
    let (r1, r2) = (q / a, c / q);
    if r1 <= r2 {
        [r1, r2]
    } else {
        [r2, r1]
    }
}

#[test]
fn eigenvalues_match_characteristic_polynomial() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..200 {
        let sys = random_stable_system(&mut rng);
        let p = 10f64.powf(rng.random_range(-3.0..5.0));
        let s = StiffnessSystem::from_system(&sys, p).unwrap();
        let got = solve_modes(&s).unwrap().sorted_squared_frequencies();
        let want = quadratic_eigenvalues(&s);
        let scale = want[0].abs().max(want[1].abs());
        for i in 0..2 {
            assert!((got[i] - want[i]).abs() <= 1e-10 * scale, "{got:?} vs {want:?}");
        }
    }
}

#[test]
fn eigenvectors_are_inertia_orthogonal() {
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..100 {
        let sys = random_stable_system(&mut rng);
        let s = StiffnessSystem::from_system(&sys, rng.random_range(0.0..1e4)).unwrap();
        let m = solve_modes(&s).unwrap();
        let (u, v) = (m.differential.eigenvector, m.common.eigenvector);
        let dot = s.inertia[0] * u[0] * v[0] + s.inertia[1] * u[1] * v[1];
        let norm = (s.inertia[0] * u[0] * u[0] + s.inertia[1] * u[1] * u[1]).sqrt()
            * (s.inertia[0] * v[0] * v[0] + s.inertia[1] * v[1] * v[1]).sqrt();
        assert!(dot.abs() <= 1e-10 * norm);
        // K u = ω² I u
        let k = s.total_stiffness();
        for mode in [m.differential, m.common] {
            let w2 = mode.squared_angular_frequency;
            let e = mode.eigenvector;
            for r in 0..2 {
                let lhs = k[r][0] * e[0] + k[r][1] * e[1];
                let rhs = w2 * s.inertia[r] * e[r];
                let scale = k[r][0].abs() * e[0].abs() + k[r][1].abs() * e[1].abs();
                assert!((lhs - rhs).abs() <= 1e-9 * scale.max(1e-300));
            }
        }
    }
}

#[test]
fn zero_power_recovers_mechanical_modes() {
    let s = StiffnessSystem::from_system(&negative_g().system, 0.0).unwrap();
    let m = solve_modes(&s).unwrap();
    assert_rel(m.differential.angular_frequency().unwrap() / (2.0 * PI), 0.5, 1e-9);
    assert_rel(m.common.angular_frequency().unwrap() / (2.0 * PI), 5.0, 1e-9);
}

#[test]
fn optical_stiffness_closed_form() {
    let sys = negative_g().system;
    let b = beta(&sys, 1.0).unwrap();
    assert_rel(b, 7.41235e-10, 1e-5);
    let k = optical_stiffness(&sys, 1.0).unwrap();
    let (g1, g2) = (sys.g1(), sys.g2());
    assert_rel(k[0][0], -b * g2, 1e-12);
    assert_rel(k[1][1], -b * g1, 1e-12);
    assert_rel(k[0][1], b, 1e-12);
    assert_eq!(k[0][1], k[1][0]);
}

#[test]
fn optical_stiffness_matches_geometry_jacobian() {
    let mut rng = StdRng::seed_from_u64(2);
    for _ in 0..100 {
        let sys = random_stable_system(&mut rng);
        let p = 10f64.powf(rng.random_range(-2.0..4.0));
        let k = optical_stiffness(&sys, p).unwrap();
        let j = stiffness_from_geometry(&sys, p).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert!(rel(j[r][c], k[r][c]) < 1e-5, "{j:?} vs {k:?}");
            }
        }
    }
}

#[test]
fn critical_power_positive_g() {
    let c = critical_powers(&positive_g().system, 1e5).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].mode, ModeLabel::Differential);
    assert_rel(c[0].power, 0.7456279629645387, 1e-8);
}

#[test]
fn critical_power_negative_g() {
    let c = critical_powers(&negative_g().system, 1e5).unwrap();
    assert_eq!(c.len(), 1);
    assert_eq!(c[0].mode, ModeLabel::Common);
    assert_rel(c[0].power, 33624.700880711236, 1e-8);
}

#[test]
fn no_threshold_below_search_limit() {
    assert!(critical_powers(&negative_g().system, 1e4).unwrap().is_empty());
}

#[test]
fn negative_g_differential_stiffens() {
    let sys = negative_g().system;
    let powers: Vec<f64> = (0..60).map(|k| 10f64.powf(-3.0 + k as f64 * 0.125)).collect();
    let sweep = power_sweep(&sys, &powers);
    let mut prev = 0.0;
    for pt in sweep {
        let m = pt.modes.unwrap();
        let w2 = m.differential.squared_angular_frequency;
        assert!(w2 > prev);
        prev = w2;
        assert_eq!(m.common.stable(), pt.power < 33624.700880711236);
    }
}

#[test]
fn positive_g_differential_softens() {
    let sys = positive_g().system;
    let sweep = power_sweep(&sys, &[0.5, 0.7, 0.8, 10.0]);
    let stable: Vec<bool> = sweep.iter().map(|p| p.modes.as_ref().unwrap().differential.stable()).collect();
    assert_eq!(stable, vec![true, true, false, false]);
}

#[test]
fn differential_mode_is_test_mass_dominated() {
    let sys = negative_g().system;
    for p in [0.0, 1.0, 1e3, 1e4, 5e4] {
        let m = solve_modes(&StiffnessSystem::from_system(&sys, p).unwrap()).unwrap();
        let v = m.differential.eigenvector;
        let i = sys.inertia();
        assert!(i[0] * v[0] * v[0] > i[1] * v[1] * v[1], "P = {p}: {v:?}");
    }
}

#[test]
fn approximations_at_high_power() {
    let sys = negative_g().system;
    let s = StiffnessSystem::from_system(&sys, 1e3).unwrap();
    let m = solve_modes(&s).unwrap();
    let d = approx_differential_frequency(&s).angular_frequency().unwrap();
    assert!(rel(d, m.differential.angular_frequency().unwrap()) < 1e-2);
    let c = approx_common_frequency(&s).unwrap().angular_frequency().unwrap();
    assert!(rel(c, m.common.angular_frequency().unwrap()) < 1e-2);
}

#[test]
fn approx_common_reports_instability() {
    let s = StiffnessSystem::from_system(&negative_g().system, 1e5).unwrap();
    assert!(matches!(approx_common_frequency(&s).unwrap(), ApproxFrequency::Unstable(w2) if w2 < 0.0));
}

#[test]
fn approx_common_needs_identical_mirrors() {
    let mut sys = negative_g().system;
    sys.mirror2.curvature = Curvature::Radius(0.09);
    let s = StiffnessSystem::from_system(&sys, 1.0).unwrap();
    assert!(matches!(approx_common_frequency(&s), Err(Error::AsymmetricCurvature { .. })));
}

#[test]
fn non_finite_stiffness_rejected() {
    let mut s = StiffnessSystem::from_system(&negative_g().system, 1.0).unwrap();
    s.k_opt[1][1] = f64::INFINITY;
    assert!(solve_modes(&s).is_err());
}

#[test]
fn sweep_points_fail_independently() {
    let sweep = power_sweep(&negative_g().system, &[1.0, -1.0, 2.0]);
    assert!(sweep[0].modes.is_ok());
    assert!(sweep[1].modes.is_err());
    assert!(sweep[2].modes.is_ok());
}

#[test]
fn optical_stiffness_linear_in_power() {
    let sys = negative_g().system;
    let a = optical_stiffness(&sys, 3.0).unwrap();
    let b = optical_stiffness(&sys, 6.0).unwrap();
    for r in 0..2 {
        for c in 0..2 {
            assert!(rel(b[r][c], 2.0 * a[r][c]) < 1e-9);
        }
    }
}
