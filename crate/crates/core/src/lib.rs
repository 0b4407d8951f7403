//! Yaw dynamics of a two-mirror suspended cavity under radiation-pressure
//! torque, the transfer-function fits used to measure it, and the test-mass
//! displacement noise budget.

pub mod beam_spot;
pub mod commands;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod noise;
pub mod response;

pub use beam_spot::{spots_from_angles, stiffness_from_geometry, torques_from_spots, SpotState};
pub use config::RunConfig;
pub use dynamics::{
    approx_common_frequency, approx_differential_frequency, critical_powers, optical_stiffness,
    power_sweep, solve_modes, ApproxFrequency, CriticalPower, Mat2, Mode, ModeLabel, ModeSolution,
    StiffnessSystem, SuspensionSpec, YawSpring,
};
pub use error::{Error, Result};
pub use geometry::{
    cavity_pole, finesse_from_reflectivities, g_factor, quarter_wave_stack, resonator_is_stable,
    spot_size_on_mirror, CavitySystem, Curvature, MaterialProps, MirrorIndex, MirrorSpec,
    StackSummary,
};
pub use noise::{dominance_band, total_budget, DominanceBand, EnvSpec, NoiseBudget, NoiseCurve, NoiseModel};
pub use response::{
    fit_resonance, frequency_vs_power_curve, model_response, synthesize_response, BandComparison,
    PowerPoint, PredictionUncertainty, ResonanceFit, TransferFunctionData,
};
