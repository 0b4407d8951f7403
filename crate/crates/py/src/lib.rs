use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use tsl_core::config::{negative_g_config, positive_g_config, DESIGN_CONFIG};
use tsl_core::noise::log_grid;
use tsl_core::{
    critical_powers, dominance_band, fit_resonance, optical_stiffness, solve_modes, total_budget,
    MirrorIndex, RunConfig, StiffnessSystem, TransferFunctionData,
};

fn err(e: tsl_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A parsed run configuration: cavity, environment and analysis grids.
#[pyclass(name = "Cavity", module = "tsl", skip_from_py_object)]
#[derive(Clone)]
struct Cavity {
    cfg: RunConfig,
}

#[pymethods]
impl Cavity {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        Ok(Cavity {
            cfg: RunConfig::parse(text).map_err(err)?,
        })
    }

    /// Design configuration with the 8 mg test mass.
    #[staticmethod]
    fn design() -> PyResult<Self> {
        Self::new(DESIGN_CONFIG)
    }

    #[staticmethod]
    fn stability(negative_g: bool) -> PyResult<Self> {
        let text = if negative_g {
            negative_g_config()
        } else {
            positive_g_config()
        };
        Self::new(&text)
    }

    fn serialize(&self) -> String {
        self.cfg.serialize()
    }

    #[getter]
    fn g_factors(&self) -> (f64, f64) {
        (self.cfg.system.g1(), self.cfg.system.g2())
    }

    #[getter]
    fn finesse(&self) -> PyResult<f64> {
        self.cfg.system.finesse().map_err(err)
    }

    /// Test-mass beam radius used by the noise budget, m.
    #[getter]
    fn beam_radius(&self) -> PyResult<f64> {
        self.cfg.system.beam_radius(MirrorIndex::First).map_err(err)
    }

    fn optical_stiffness(&self, power: f64) -> PyResult<[[f64; 2]; 2]> {
        optical_stiffness(&self.cfg.system, power).map_err(err)
    }

    /// Signed mode frequencies (differential, common) in Hz; negative means unstable.
    fn mode_frequencies(&self, power: f64) -> PyResult<(f64, f64)> {
        let s = StiffnessSystem::from_system(&self.cfg.system, power).map_err(err)?;
        let m = solve_modes(&s).map_err(err)?;
        Ok((m.differential.signed_frequency_hz(), m.common.signed_frequency_hz()))
    }

    /// (power W, mode label) for every stability threshold up to `p_max`.
    fn critical_powers(&self, p_max: f64) -> PyResult<Vec<(f64, String)>> {
        Ok(critical_powers(&self.cfg.system, p_max)
            .map_err(err)?
            .into_iter()
            .map(|c| (c.power, c.mode.to_string()))
            .collect())
    }

    /// Frequencies, source labels, per-source ASDs, classical total and QRPN.
    #[pyo3(signature = (f_min = 10.0, f_max = 1e4, points_per_decade = 100, power = None))]
    #[allow(clippy::type_complexity)]
    fn noise_budget(
        &self,
        f_min: f64,
        f_max: f64,
        points_per_decade: usize,
        power: Option<f64>,
    ) -> PyResult<(Vec<f64>, Vec<String>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
        let system = match power {
            Some(p) => self.cfg.system.with_intracavity_power(p),
            None => self.cfg.system.clone(),
        };
        let grid = log_grid(f_min, f_max, points_per_decade).map_err(err)?;
        let b = total_budget(&system, &self.cfg.env, &grid).map_err(err)?;
        Ok((
            b.frequencies,
            b.sources.iter().map(|c| c.label.clone()).collect(),
            b.sources.into_iter().map(|c| c.asd).collect(),
            b.classical_total.asd,
            b.qrpn.asd,
        ))
    }

    /// (f_low, f_high) of every band where QRPN exceeds the classical total.
    #[pyo3(signature = (power = None))]
    fn dominance_band(&self, power: Option<f64>) -> PyResult<Vec<(f64, f64)>> {
        let system = match power {
            Some(p) => self.cfg.system.with_intracavity_power(p),
            None => self.cfg.system.clone(),
        };
        let n = &self.cfg.noise;
        let grid = log_grid(n.freq_min, n.freq_max, n.points_per_decade).map_err(err)?;
        let b = total_budget(&system, &self.cfg.env, &grid).map_err(err)?;
        Ok(dominance_band(&b)
            .map_err(err)?
            .into_iter()
            .map(|d| (d.f_low, d.f_high))
            .collect())
    }

    fn __repr__(&self) -> String {
        let (g1, g2) = self.g_factors();
        format!("Cavity(L={} m, g1={g1:.4}, g2={g2:.4})", self.cfg.system.length)
    }
}

/// Complex second-order response A / (f0² − f² + 2iζ f0 f) as (re, im).
#[pyfunction]
fn model_response(f0: f64, zeta: f64, gain: f64, f: f64) -> (f64, f64) {
    let z = gain / Complex64::new(f0 * f0 - f * f, 2.0 * zeta * f0 * f);
    (z.re, z.im)
}

/// Fit a resonance to complex samples; returns (f0, ζ, A), their 1σ and the residual norm.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn fit(freqs: Vec<f64>, re: Vec<f64>, im: Vec<f64>) -> PyResult<((f64, f64, f64), (f64, f64, f64), f64)> {
    if re.len() != freqs.len() || im.len() != freqs.len() {
        return Err(PyValueError::new_err("freqs, re and im must have equal length"));
    }
    let response = re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)).collect();
    let data = TransferFunctionData::new(freqs, response, None).map_err(err)?;
    let f = fit_resonance(&data, None).map_err(err)?;
    let s = f.sigma();
    Ok((
        (f.resonant_frequency, f.damping_ratio, f.gain),
        (s[0], s[1], s[2]),
        f.residual_norm,
    ))
}

#[pymodule]
fn tsl(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Cavity>()?;
    m.add_function(wrap_pyfunction!(model_response, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
