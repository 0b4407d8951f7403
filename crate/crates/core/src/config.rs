//! Run configuration: a flat, sectioned `key = value unit` text format.
//!
//! ```text
//! [cavity]
//! length = 110 mm
//! wavelength = 1064 nm
//! ```
//!
//! Every dimensional value must carry a unit. `#` starts a comment. Unknown
//! sections or keys are rejected so typos surface as errors naming the key.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::constants::ATOMIC_MASS_UNIT;
use crate::dynamics::{SuspensionSpec, YawSpring};
use crate::error::{Error, Result};
use crate::geometry::{CavitySystem, Curvature, MaterialProps, MirrorSpec};
use crate::noise::EnvSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dim {
    Length,
    Mass,
    Power,
    /// Cycles per second.
    Frequency,
    /// rad/s
    AngularFrequency,
    Temperature,
    Pressure,
    Stiffness,
    Inertia,
    SeismicLevel,
    Dimensionless,
}

impl Dim {
    fn factor(self, unit: &str) -> Option<f64> {
        let f = match (self, unit) {
            (Dim::Length, "m") => 1.0,
            (Dim::Length, "cm") => 1e-2,
            (Dim::Length, "mm") => 1e-3,
            (Dim::Length, "um" | "µm") => 1e-6,
            (Dim::Length, "nm") => 1e-9,
            (Dim::Mass, "kg") => 1.0,
            (Dim::Mass, "g") => 1e-3,
            (Dim::Mass, "mg") => 1e-6,
            (Dim::Mass, "u") => ATOMIC_MASS_UNIT,
            (Dim::Power, "W") => 1.0,
            (Dim::Power, "mW") => 1e-3,
            (Dim::Power, "kW") => 1e3,
            (Dim::Power, "MW") => 1e6,
            (Dim::Frequency, "Hz") => 1.0,
            (Dim::Frequency, "mHz") => 1e-3,
            (Dim::Frequency, "kHz") => 1e3,
            (Dim::AngularFrequency, "rad/s") => 1.0,
            (Dim::AngularFrequency, "Hz") => 2.0 * PI,
            (Dim::AngularFrequency, "mHz") => 2.0 * PI * 1e-3,
            (Dim::Temperature, "K") => 1.0,
            (Dim::Pressure, "Pa") => 1.0,
            (Dim::Pressure, "hPa" | "mbar") => 100.0,
            (Dim::Pressure, "MPa") => 1e6,
            (Dim::Pressure, "GPa") => 1e9,
            (Dim::Stiffness, "N*m/rad" | "N·m/rad" | "Nm/rad") => 1.0,
            (Dim::Inertia, "kg*m^2" | "kg·m²" | "kg m^2") => 1.0,
            (Dim::SeismicLevel, "m*Hz^1.5" | "m*Hz^(3/2)") => 1.0,
            (Dim::Dimensionless, "" | "1") => 1.0,
            _ => return None,
        };
        Some(f)
    }

    fn canonical_unit(self) -> &'static str {
        match self {
            Dim::Length => "m",
            Dim::Mass => "kg",
            Dim::Power => "W",
            Dim::Frequency => "Hz",
            Dim::AngularFrequency => "rad/s",
            Dim::Temperature => "K",
            Dim::Pressure => "Pa",
            Dim::Stiffness => "N*m/rad",
            Dim::Inertia => "kg*m^2",
            Dim::SeismicLevel => "m*Hz^1.5",
            Dim::Dimensionless => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Quantity(Dim),
    List(Dim),
    Count,
    Flag,
}

fn schema(section: &str, key: &str) -> Option<Kind> {
    use Dim::*;
    use Kind::*;
    let kind = match (section, key) {
        ("cavity", "length" | "wavelength") => Quantity(Length),
        ("cavity", "intracavity_power" | "input_power") => Quantity(Power),
        ("cavity", "finesse") => Quantity(Dimensionless),
        ("mirror1" | "mirror2", k) => match k {
            "mass" => Quantity(Mass),
            "radius" | "thickness" | "radius_of_curvature" | "beam_radius" => Quantity(Length),
            "reflectivity" => Quantity(Dimensionless),
            "flat" => Flag,
            "yaw_inertia" => Quantity(Inertia),
            _ => return None,
        },
        ("suspension1" | "suspension2", k) => match k {
            "yaw_frequency" | "pendulum_frequency" => Quantity(AngularFrequency),
            "yaw_stiffness" => Quantity(Stiffness),
            "quality_factor" => Quantity(Dimensionless),
            _ => return None,
        },
        ("substrate" | "coating_low" | "coating_high", k) => match k {
            "young_modulus" => Quantity(Pressure),
            "poisson_ratio" | "loss_angle" | "refractive_index" => Quantity(Dimensionless),
            _ => return None,
        },
        ("environment", k) => match k {
            "temperature" => Quantity(Temperature),
            "air_pressure" => Quantity(Pressure),
            "seismic_level" => Quantity(SeismicLevel),
            "isolation_corner" => Quantity(Frequency),
            "gas_molecular_mass" => Quantity(Mass),
            _ => return None,
        },
        ("stability", "power_min" | "power_max") => Quantity(Power),
        ("stability", "points") => Count,
        ("modes", "power") => Quantity(Power),
        ("tf", k) => match k {
            "power" => Quantity(Power),
            "freq_min" | "freq_max" => Quantity(Frequency),
            "points" => Count,
            "length_sigma" => Quantity(Length),
            "power_scale_sigma" => Quantity(Dimensionless),
            "fit_powers" | "fit_power_sigmas" => List(Power),
            _ => return None,
        },
        ("noise", k) => match k {
            "freq_min" | "freq_max" => Quantity(Frequency),
            "points_per_decade" => Count,
            _ => return None,
        },
        _ => return None,
    };
    Some(kind)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityBlock {
    /// W
    pub power_min: f64,
    /// W; also the upper limit of the critical-power search.
    pub power_max: f64,
    /// Log-spaced grid points; zero is a usage error.
    pub points: usize,
}

impl StabilityBlock {
    pub fn grid(&self) -> Vec<f64> {
        match self.points {
            0 => vec![],
            1 => vec![self.power_min],
            n => (0..n)
                .map(|k| self.power_min * (self.power_max / self.power_min).powf(k as f64 / (n - 1) as f64))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModesBlock {
    /// W
    pub power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TfBlock {
    /// W
    pub power: f64,
    /// Hz
    pub freq_min: f64,
    /// Hz
    pub freq_max: f64,
    pub points: usize,
    /// m
    pub length_sigma: f64,
    pub power_scale_sigma: f64,
    /// Intracavity power of each `--fit` file, in order, W.
    pub fit_powers: Vec<f64>,
    pub fit_power_sigmas: Vec<f64>,
}

impl TfBlock {
    pub fn grid(&self) -> Vec<f64> {
        if self.points < 2 {
            return vec![self.freq_min; self.points];
        }
        let n = self.points;
        (0..n)
            .map(|k| self.freq_min * (self.freq_max / self.freq_min).powf(k as f64 / (n - 1) as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBlock {
    /// Hz
    pub freq_min: f64,
    /// Hz
    pub freq_max: f64,
    pub points_per_decade: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: CavitySystem,
    pub env: EnvSpec,
    pub stability: StabilityBlock,
    pub modes: ModesBlock,
    pub tf: TfBlock,
    pub noise: NoiseBlock,
}

#[derive(Debug, Clone)]
enum Value {
    Number(f64),
    List(Vec<f64>),
    Count(usize),
    Flag(bool),
}

struct Entries {
    map: BTreeMap<(String, String), (Value, usize)>,
}

fn config_err(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn parse_number(text: &str, dim: Dim, key: &str, line: usize) -> Result<f64> {
    let text = text.trim();
    let (num, unit) = match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    };
    let value: f64 = num
        .parse()
        .map_err(|_| config_err(key, format!("line {line}: `{num}` is not a number")))?;
    if !value.is_finite() {
        return Err(config_err(key, format!("line {line}: value must be finite")));
    }
    if unit.is_empty() && dim != Dim::Dimensionless {
        return Err(config_err(
            key,
            format!("line {line}: missing unit (expected e.g. `{}`)", dim.canonical_unit()),
        ));
    }
    let factor = dim
        .factor(unit)
        .ok_or_else(|| config_err(key, format!("line {line}: unit `{unit}` not valid here")))?;
    Ok(value * factor)
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(line, format!("line {line_no}: unterminated section header")))?
                    .trim();
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(line, format!("line {line_no}: expected `key = value`")))?;
            let key = key.trim();
            let sec = section
                .as_deref()
                .ok_or_else(|| config_err(key, format!("line {line_no}: key outside any section")))?;
            let full = format!("{sec}.{key}");
            let kind = schema(sec, key).ok_or_else(|| config_err(&full, format!("line {line_no}: unknown key")))?;
            let value = value.trim();
            let parsed = match kind {
                Kind::Quantity(dim) => Value::Number(parse_number(value, dim, &full, line_no)?),
                Kind::List(dim) => {
                    // `1, 2, 3 W`: the unit after the last number applies to all.
                    let parts: Vec<&str> = value.split(',').map(str::trim).collect();
                    let last = parts.last().copied().unwrap_or("");
                    let unit = last.split_once(char::is_whitespace).map_or("", |(_, u)| u.trim());
                    let mut out = Vec::new();
                    for p in parts.iter().filter(|p| !p.is_empty()) {
                        let number = p.split_whitespace().next().unwrap_or("");
                        out.push(parse_number(&format!("{number} {unit}"), dim, &full, line_no)?);
                    }
                    Value::List(out)
                }
                Kind::Count => Value::Count(
                    value
                        .parse()
                        .map_err(|_| config_err(&full, format!("line {line_no}: `{value}` is not a non-negative integer")))?,
                ),
                Kind::Flag => Value::Flag(match value {
                    "true" => true,
                    "false" => false,
                    _ => return Err(config_err(&full, format!("line {line_no}: expected true or false"))),
                }),
            };
            if map
                .insert((sec.to_string(), key.to_string()), (parsed, line_no))
                .is_some()
            {
                return Err(config_err(&full, format!("line {line_no}: duplicate key")));
            }
        }
        Ok(Entries { map })
    }

    fn get(&self, section: &str, key: &str) -> Option<&Value> {
        self.map.get(&(section.to_string(), key.to_string())).map(|(v, _)| v)
    }

    fn number(&self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key) {
            Some(Value::Number(v)) => Some(*v),
            _ => None,
        }
    }

    fn required(&self, section: &str, key: &str) -> Result<f64> {
        self.number(section, key)
            .ok_or_else(|| config_err(format!("{section}.{key}"), "required key missing"))
    }

    fn number_or(&self, section: &str, key: &str, default: f64) -> f64 {
        self.number(section, key).unwrap_or(default)
    }

    fn count_or(&self, section: &str, key: &str, default: usize) -> usize {
        match self.get(section, key) {
            Some(Value::Count(v)) => *v,
            _ => default,
        }
    }

    fn list(&self, section: &str, key: &str) -> Vec<f64> {
        match self.get(section, key) {
            Some(Value::List(v)) => v.clone(),
            _ => vec![],
        }
    }

    fn flag(&self, section: &str, key: &str) -> bool {
        matches!(self.get(section, key), Some(Value::Flag(true)))
    }
}

fn material(e: &Entries, section: &str, default: MaterialProps) -> MaterialProps {
    MaterialProps {
        young_modulus: e.number_or(section, "young_modulus", default.young_modulus),
        poisson_ratio: e.number_or(section, "poisson_ratio", default.poisson_ratio),
        loss_angle: e.number_or(section, "loss_angle", default.loss_angle),
        refractive_index: e.number_or(section, "refractive_index", default.refractive_index),
    }
}

fn mirror(e: &Entries, section: &str, materials: [MaterialProps; 3]) -> Result<MirrorSpec> {
    let curvature = match (e.flag(section, "flat"), e.number(section, "radius_of_curvature")) {
        (true, None) => Curvature::Flat,
        (false, Some(r)) => Curvature::Radius(r),
        (true, Some(_)) => {
            return Err(config_err(
                format!("{section}.radius_of_curvature"),
                "give either flat = true or a radius of curvature, not both",
            ))
        }
        (false, None) => return Err(config_err(format!("{section}.radius_of_curvature"), "required key missing")),
    };
    Ok(MirrorSpec {
        mass: e.required(section, "mass")?,
        radius: e.required(section, "radius")?,
        thickness: e.required(section, "thickness")?,
        curvature,
        power_reflectivity: e.required(section, "reflectivity")?,
        substrate: materials[0],
        coat_low: materials[1],
        coat_high: materials[2],
        yaw_inertia: e.number(section, "yaw_inertia"),
        beam_radius: e.number(section, "beam_radius"),
    })
}

fn suspension(e: &Entries, section: &str) -> Result<SuspensionSpec> {
    let yaw = match (e.number(section, "yaw_frequency"), e.number(section, "yaw_stiffness")) {
        (Some(w), None) => YawSpring::Frequency(w),
        (None, Some(k)) => YawSpring::Stiffness(k),
        _ => {
            return Err(config_err(
                format!("{section}.yaw_frequency"),
                "exactly one of yaw_frequency / yaw_stiffness is required",
            ))
        }
    };
    Ok(SuspensionSpec {
        yaw,
        quality_factor: e.required(section, "quality_factor")?,
        pendulum_frequency: e.required(section, "pendulum_frequency")?,
    })
}

/// Map a validation failure onto the config key that caused it.
fn keyed(section: &str, err: Error) -> Error {
    match err {
        Error::InvalidParameter { name, value, reason } => {
            let key = match name {
                "power_reflectivity" => "reflectivity",
                other => other,
            };
            config_err(format!("{section}.{key}"), format!("{value}: {reason}"))
        }
        other => other,
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;
        let materials = [
            material(&e, "substrate", MaterialProps::FUSED_SILICA),
            material(&e, "coating_low", MaterialProps::SILICA_COATING),
            material(&e, "coating_high", MaterialProps::TITANIA_TANTALA_COATING),
        ];
        let system = CavitySystem {
            mirror1: mirror(&e, "mirror1", materials)?,
            mirror2: mirror(&e, "mirror2", materials)?,
            suspension1: suspension(&e, "suspension1")?,
            suspension2: suspension(&e, "suspension2")?,
            length: e.required("cavity", "length")?,
            wavelength: e.required("cavity", "wavelength")?,
            input_power: e.number("cavity", "input_power"),
            intracavity_power: e.number("cavity", "intracavity_power"),
            finesse_override: e.number("cavity", "finesse"),
        };
        let d = EnvSpec::default();
        let env = EnvSpec {
            temperature: e.number_or("environment", "temperature", d.temperature),
            air_pressure: e.number_or("environment", "air_pressure", d.air_pressure),
            seismic_level: e.number_or("environment", "seismic_level", d.seismic_level),
            isolation_corner: e.number_or("environment", "isolation_corner", d.isolation_corner),
            gas_molecular_mass: e.number_or("environment", "gas_molecular_mass", d.gas_molecular_mass),
        };
        let stability = StabilityBlock {
            power_min: e.number_or("stability", "power_min", 1e-3),
            power_max: e.number_or("stability", "power_max", 1e5),
            points: e.count_or("stability", "points", 801),
        };
        let modes = ModesBlock {
            power: e.number_or("modes", "power", 1e3),
        };
        let tf = TfBlock {
            power: e.number_or("tf", "power", 100.0),
            freq_min: e.number_or("tf", "freq_min", 0.1),
            freq_max: e.number_or("tf", "freq_max", 100.0),
            points: e.count_or("tf", "points", 400),
            length_sigma: e.number_or("tf", "length_sigma", 3e-3),
            power_scale_sigma: e.number_or("tf", "power_scale_sigma", 0.1),
            fit_powers: e.list("tf", "fit_powers"),
            fit_power_sigmas: e.list("tf", "fit_power_sigmas"),
        };
        let noise = NoiseBlock {
            freq_min: e.number_or("noise", "freq_min", 10.0),
            freq_max: e.number_or("noise", "freq_max", 1e4),
            points_per_decade: e.count_or("noise", "points_per_decade", 100),
        };
        let cfg = RunConfig {
            system,
            env,
            stability,
            modes,
            tf,
            noise,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Check every module precondition that can be checked before running.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        s.mirror1.substrate.validate().map_err(|e| keyed("substrate", e))?;
        s.mirror1.coat_low.validate().map_err(|e| keyed("coating_low", e))?;
        s.mirror1.coat_high.validate().map_err(|e| keyed("coating_high", e))?;
        s.mirror1.validate().map_err(|e| keyed("mirror1", e))?;
        s.mirror2.validate().map_err(|e| keyed("mirror2", e))?;
        s.suspension1.validate().map_err(|e| keyed("suspension1", e))?;
        s.suspension2.validate().map_err(|e| keyed("suspension2", e))?;
        s.validate().map_err(|e| keyed("cavity", e))?;
        self.env.validate().map_err(|e| keyed("environment", e))?;
        if let Err(Error::UnstableResonator { g1, g2 }) = s.check_stable() {
            return Err(config_err(
                "mirror1.radius_of_curvature",
                format!("resonator is optically unstable (g1 = {g1}, g2 = {g2})"),
            ));
        }
        let st = &self.stability;
        if st.points == 0 {
            return Err(config_err("stability.points", "power grid is empty"));
        }
        if !(st.power_min > 0.0 && st.power_max >= st.power_min) {
            return Err(config_err("stability.power_max", "need 0 < power_min <= power_max"));
        }
        if self.modes.power < 0.0 {
            return Err(config_err("modes.power", "must be non-negative"));
        }
        let tf = &self.tf;
        if tf.points < 4 {
            return Err(config_err("tf.points", "need at least 4 frequencies"));
        }
        if !(tf.freq_min > 0.0 && tf.freq_max > tf.freq_min) {
            return Err(config_err("tf.freq_max", "need 0 < freq_min < freq_max"));
        }
        if tf.power < 0.0 || tf.length_sigma < 0.0 || tf.power_scale_sigma < 0.0 {
            return Err(config_err("tf.power", "power and uncertainties must be non-negative"));
        }
        if !tf.fit_power_sigmas.is_empty() && tf.fit_power_sigmas.len() != tf.fit_powers.len() {
            return Err(config_err("tf.fit_power_sigmas", "must match the length of fit_powers"));
        }
        let n = &self.noise;
        if !(n.freq_min > 0.0 && n.freq_max > n.freq_min) {
            return Err(config_err("noise.freq_max", "need 0 < freq_min < freq_max"));
        }
        if (n.points_per_decade as f64) < crate::noise::MIN_POINTS_PER_DECADE {
            return Err(config_err("noise.points_per_decade", "need at least 50 points per decade"));
        }
        Ok(())
    }

    /// Canonical text form in SI units. Parsing it yields an identical config.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let q = |out: &mut String, key: &str, v: f64, dim: Dim| {
            let unit = dim.canonical_unit();
            if unit.is_empty() {
                let _ = writeln!(out, "{key} = {v:e}");
            } else {
                let _ = writeln!(out, "{key} = {v:e} {unit}");
            }
        };
        let s = &self.system;

        out.push_str("[cavity]\n");
        q(&mut out, "length", s.length, Dim::Length);
        q(&mut out, "wavelength", s.wavelength, Dim::Length);
        if let Some(p) = s.intracavity_power {
            q(&mut out, "intracavity_power", p, Dim::Power);
        }
        if let Some(p) = s.input_power {
            q(&mut out, "input_power", p, Dim::Power);
        }
        if let Some(f) = s.finesse_override {
            q(&mut out, "finesse", f, Dim::Dimensionless);
        }

        for (name, m) in [("mirror1", &s.mirror1), ("mirror2", &s.mirror2)] {
            let _ = writeln!(out, "\n[{name}]");
            q(&mut out, "mass", m.mass, Dim::Mass);
            q(&mut out, "radius", m.radius, Dim::Length);
            q(&mut out, "thickness", m.thickness, Dim::Length);
            match m.curvature {
                Curvature::Flat => out.push_str("flat = true\n"),
                Curvature::Radius(r) => q(&mut out, "radius_of_curvature", r, Dim::Length),
            }
            q(&mut out, "reflectivity", m.power_reflectivity, Dim::Dimensionless);
            if let Some(i) = m.yaw_inertia {
                q(&mut out, "yaw_inertia", i, Dim::Inertia);
            }
            if let Some(w) = m.beam_radius {
                q(&mut out, "beam_radius", w, Dim::Length);
            }
        }

        for (name, sus) in [("suspension1", &s.suspension1), ("suspension2", &s.suspension2)] {
            let _ = writeln!(out, "\n[{name}]");
            match sus.yaw {
                YawSpring::Frequency(w) => q(&mut out, "yaw_frequency", w, Dim::AngularFrequency),
                YawSpring::Stiffness(k) => q(&mut out, "yaw_stiffness", k, Dim::Stiffness),
            }
            q(&mut out, "quality_factor", sus.quality_factor, Dim::Dimensionless);
            q(&mut out, "pendulum_frequency", sus.pendulum_frequency, Dim::AngularFrequency);
        }

        for (name, mat) in [
            ("substrate", &s.mirror1.substrate),
            ("coating_low", &s.mirror1.coat_low),
            ("coating_high", &s.mirror1.coat_high),
        ] {
            let _ = writeln!(out, "\n[{name}]");
            q(&mut out, "young_modulus", mat.young_modulus, Dim::Pressure);
            q(&mut out, "poisson_ratio", mat.poisson_ratio, Dim::Dimensionless);
            q(&mut out, "loss_angle", mat.loss_angle, Dim::Dimensionless);
            q(&mut out, "refractive_index", mat.refractive_index, Dim::Dimensionless);
        }

        let env = &self.env;
        out.push_str("\n[environment]\n");
        q(&mut out, "temperature", env.temperature, Dim::Temperature);
        q(&mut out, "air_pressure", env.air_pressure, Dim::Pressure);
        q(&mut out, "seismic_level", env.seismic_level, Dim::SeismicLevel);
        q(&mut out, "isolation_corner", env.isolation_corner, Dim::Frequency);
        q(&mut out, "gas_molecular_mass", env.gas_molecular_mass, Dim::Mass);

        out.push_str("\n[stability]\n");
        q(&mut out, "power_min", self.stability.power_min, Dim::Power);
        q(&mut out, "power_max", self.stability.power_max, Dim::Power);
        let _ = writeln!(out, "points = {}", self.stability.points);

        out.push_str("\n[modes]\n");
        q(&mut out, "power", self.modes.power, Dim::Power);

        let tf = &self.tf;
        out.push_str("\n[tf]\n");
        q(&mut out, "power", tf.power, Dim::Power);
        q(&mut out, "freq_min", tf.freq_min, Dim::Frequency);
        q(&mut out, "freq_max", tf.freq_max, Dim::Frequency);
        let _ = writeln!(out, "points = {}", tf.points);
        q(&mut out, "length_sigma", tf.length_sigma, Dim::Length);
        q(&mut out, "power_scale_sigma", tf.power_scale_sigma, Dim::Dimensionless);
        for (key, list) in [("fit_powers", &tf.fit_powers), ("fit_power_sigmas", &tf.fit_power_sigmas)] {
            if !list.is_empty() {
                let joined: Vec<String> = list.iter().map(|v| format!("{v:e}")).collect();
                let _ = writeln!(out, "{key} = {} W", joined.join(", "));
            }
        }

        out.push_str("\n[noise]\n");
        q(&mut out, "freq_min", self.noise.freq_min, Dim::Frequency);
        q(&mut out, "freq_max", self.noise.freq_max, Dim::Frequency);
        let _ = writeln!(out, "points_per_decade = {}", self.noise.points_per_decade);
        out
    }
}

/// Test-mass cavity of the noise-budget design (8 mg mirror, 14 W circulating).
pub const DESIGN_CONFIG: &str = "\
# Design configuration for observing quantum radiation pressure noise.
[cavity]
length = 110 mm
wavelength = 1064 nm
finesse = 5000
intracavity_power = 14 W
input_power = 10 mW

[mirror1]               # test mass
mass = 8 mg
radius = 1.5 mm         # 3 mm diameter
thickness = 0.5 mm
radius_of_curvature = 100 mm
reflectivity = 0.9999
beam_radius = 0.21 mm

[mirror2]               # input mirror
mass = 60 g
radius = 12.7 mm        # not specified; only enters the yaw block
thickness = 50 mm       # not specified; only enters the yaw block
radius_of_curvature = 100 mm
reflectivity = 0.999

[suspension1]
yaw_frequency = 0.5 Hz
quality_factor = 1e5
pendulum_frequency = 3 Hz

[suspension2]
yaw_frequency = 5 Hz
quality_factor = 1e5
pendulum_frequency = 1 Hz

[substrate]
young_modulus = 73 GPa
poisson_ratio = 0.17
loss_angle = 1e-5
refractive_index = 1.45

[coating_low]           # SiO2
young_modulus = 73 GPa
poisson_ratio = 0.17
loss_angle = 1e-4
refractive_index = 1.45

[coating_high]          # TiO2:Ta2O5
young_modulus = 140 GPa
poisson_ratio = 0.28
loss_angle = 4e-4
refractive_index = 2.07

[environment]
temperature = 300 K
air_pressure = 1e-4 Pa
seismic_level = 1e-7 m*Hz^1.5
isolation_corner = 1 Hz
gas_molecular_mass = 28.0134 u

[stability]
power_min = 1 mW
power_max = 100 kW
points = 801

[modes]
power = 1 kW

[tf]
power = 100 W
freq_min = 0.1 Hz
freq_max = 100 Hz
points = 400
length_sigma = 3 mm
power_scale_sigma = 0.1

[noise]
freq_min = 10 Hz
freq_max = 10 kHz
points_per_decade = 100
";

fn stability_config(header: &str, radius_of_curvature: &str) -> String {
    format!(
        "\
# {header}
[cavity]
length = 110 mm
wavelength = 1064 nm
intracavity_power = 1 W

[mirror1]               # test mass
mass = 10 mg
radius = 1.5 mm
thickness = 0.5 mm
radius_of_curvature = {radius_of_curvature}
reflectivity = 0.9999
yaw_inertia = 5.6e-12 kg*m^2

[mirror2]               # input mirror
mass = 10 g
radius = 10 mm
thickness = 10 mm
radius_of_curvature = {radius_of_curvature}
reflectivity = 0.999
yaw_inertia = 2.5e-7 kg*m^2

[suspension1]
yaw_frequency = 0.5 Hz
quality_factor = 1e5
pendulum_frequency = 3 Hz

[suspension2]
yaw_frequency = 5 Hz
quality_factor = 1e5
pendulum_frequency = 1 Hz

[stability]
power_min = 1 mW
power_max = 100 kW
points = 801

[modes]
power = 1 kW

[tf]
power = 100 W
freq_min = 0.1 Hz
freq_max = 100 Hz
points = 400
"
    )
}

/// Power-dependence study with g1 = g2 = −0.1 (L = 1.1 R).
pub fn negative_g_config() -> String {
    stability_config("Yaw stability, negative-g cavity (g1 = g2 = -0.1).", "100 mm")
}

/// Same masses and length with g1 = g2 = +0.1 (R = L / 0.9).
pub fn positive_g_config() -> String {
    stability_config(
        "Yaw stability, positive-g cavity (g1 = g2 = +0.1).",
        "0.12222222222222223 m",
    )
}
