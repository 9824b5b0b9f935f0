use serde::{Deserialize, Serialize};

use crate::dynamics::ScenarioKind;
use crate::error::{Error, Result};
use crate::quantize::{Interpolation, Polarization};

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_SAMPLES: usize = 200;

/// Which batch job a configuration file describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Dynamics,
    Gravity,
    Quantize,
    Invariants,
}

impl JobKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "dynamics" => Some(Self::Dynamics),
            "gravity" => Some(Self::Gravity),
            "quantize" => Some(Self::Quantize),
            "invariants" => Some(Self::Invariants),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Dynamics => "dynamics",
            Self::Gravity => "gravity",
            Self::Quantize => "quantize",
            Self::Invariants => "invariants",
        }
    }
}

fn default_step() -> f64 {
    DEFAULT_STEP
}
fn default_hbar() -> f64 {
    DEFAULT_HBAR
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_e: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grad_b: Option<Vec<f64>>,
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<f64>,
    #[serde(default)]
    pub s0: f64,
    pub span: f64,
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryName {
    Flat,
    KerrNewman,
    FlatWithT,
    FlatWithSources,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GravityConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub geometry: GeometryName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub o2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega2: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    pub polarization: Polarization,
    pub m: f64,
    #[serde(default = "default_hbar")]
    pub hbar: f64,
    /// Grid is `[-grid_half, grid_half]^dim` with `grid_n` samples per axis.
    pub grid_half: f64,
    pub grid_n: usize,
    #[serde(default = "default_dim")]
    pub dim: usize,
    pub center: Vec<f64>,
    pub width: f64,
    /// Rotation angle (dim 2) or rotation vector (dim 3).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boost: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub translation: Option<Vec<f64>>,
    #[serde(default)]
    pub time_shift: f64,
    #[serde(default = "default_c_values")]
    pub c_values: Vec<f64>,
    #[serde(default = "default_s_samples")]
    pub s_samples: Vec<f64>,
    #[serde(default)]
    pub interpolation: Interpolation,
}

fn default_dim() -> usize {
    2
}
fn default_c_values() -> Vec<f64> {
    vec![10.0, 100.0, 1000.0]
}
fn default_s_samples() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

/// A validated configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "job", rename_all = "snake_case")]
pub enum RunConfig {
    Dynamics(DynamicsConfig),
    Gravity(GravityConfig),
    Quantize(QuantizeConfig),
    Invariants(InvariantsConfig),
}

const COMMON: &[&str] = &["job", "name", "output_dir", "seed"];

/// `(required, optional)` keys beyond the common ones.
fn dynamics_schema(kind: ScenarioKind) -> (Vec<&'static str>, Vec<&'static str>) {
    let mut req = vec!["scenario", "x0", "v0", "span"];
    let mut opt = vec!["s0", "step"];
    let field = ["e", "b"];
    let grads = ["grad_e", "grad_b"];
    match kind {
        ScenarioKind::Free3D => req.push("m"),
        ScenarioKind::FreeSpin3D => req.extend(["m", "spin", "u0"]),
        ScenarioKind::EM3DSpinless => {
            req.extend(["m", "q"]);
            req.extend(field);
            opt.extend(grads);
        }
        ScenarioKind::EM3DSpin => {
            req.extend(["m", "spin", "q", "mu", "u0"]);
            req.extend(field);
            opt.extend(grads);
        }
        ScenarioKind::Free2DExt => {
            req.extend(["m", "q1", "q2"]);
            opt.extend(["theta", "w0", "z0"]);
        }
        ScenarioKind::EM2DExt => {
            req.extend(["m", "q", "q1", "q2"]);
            req.extend(field);
            opt.extend(["mu", "theta", "w0", "z0"]);
            opt.extend(grads);
        }
        ScenarioKind::Photon2D => {
            req.extend(["q1", "q2"]);
            req.extend(field);
            // m and q are accepted only so that the photon constraint can be reported
            opt.extend(["m", "q", "mu", "theta", "w0", "z0"]);
            opt.extend(grads);
        }
    }
    (req, opt)
}

fn gravity_schema(geom: GeometryName, table: &toml::Table) -> (Vec<&'static str>, Vec<&'static str>) {
    let particle = ["m", "q1", "q2", "x0", "v0", "span"];
    let mut req = vec!["geometry"];
    let opt = vec!["step"];
    match geom {
        GeometryName::Flat => req.extend(particle),
        GeometryName::FlatWithT => {
            req.extend(particle);
            req.extend(["t1", "t2"]);
        }
        GeometryName::FlatWithSources => {
            req.extend(particle);
            req.extend(["o1", "o2", "omega1", "omega2"]);
        }
        GeometryName::KerrNewman => {
            req.extend(["mass", "a", "charge"]);
            // a trajectory on the horizon is optional, but all-or-nothing
            if particle.iter().any(|k| table.contains_key(*k)) {
                req.extend(particle);
            }
        }
    }
    (req, opt)
}

fn quantize_schema() -> (Vec<&'static str>, Vec<&'static str>) {
    (
        vec!["polarization", "m", "grid_half", "grid_n", "center", "width"],
        vec![
            "hbar",
            "dim",
            "rotation",
            "boost",
            "translation",
            "time_shift",
            "c_values",
            "s_samples",
            "interpolation",
        ],
    )
}

fn cfg_err(job: &str, message: impl Into<String>) -> Error {
    Error::Config {
        job: job.to_string(),
        message: message.into(),
    }
}

fn check_keys(job: JobKind, context: &str, table: &toml::Table, req: &[&str], opt: &[&str]) -> Result<()> {
    let job_s = job.as_str();
    for key in req {
        if !table.contains_key(*key) {
            return Err(cfg_err(job_s, format!("missing required key `{key}`{context}")));
        }
    }
    for key in table.keys() {
        let k = key.as_str();
        if !(COMMON.contains(&k) || req.contains(&k) || opt.contains(&k)) {
            return Err(cfg_err(job_s, format!("unknown key `{k}`{context}")));
        }
    }
    Ok(())
}

fn tag_of<'a>(job: JobKind, table: &'a toml::Table, key: &str) -> Result<&'a str> {
    table
        .get(key)
        .ok_or_else(|| cfg_err(job.as_str(), format!("missing required key `{key}`")))?
        .as_str()
        .ok_or_else(|| cfg_err(job.as_str(), format!("key `{key}` must be a string")))
}

fn scenario_tag(s: &str) -> Option<ScenarioKind> {
    ScenarioKind::ALL.into_iter().find(|k| format!("{k:?}") == s)
}

fn geometry_tag(s: &str) -> Option<GeometryName> {
    match s {
        "flat" => Some(GeometryName::Flat),
        "kerr_newman" => Some(GeometryName::KerrNewman),
        "flat_with_t" => Some(GeometryName::FlatWithT),
        "flat_with_sources" => Some(GeometryName::FlatWithSources),
        _ => None,
    }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| cfg_err("?", format!("malformed config: {}", e.message())))?;
    let job_s = table
        .get("job")
        .ok_or_else(|| cfg_err("?", "missing required key `job`"))?
        .as_str()
        .ok_or_else(|| cfg_err("?", "key `job` must be a string"))?
        .to_string();
    let job_s = job_s.as_str();
    let job = JobKind::parse(job_s).ok_or_else(|| {
        cfg_err(
            job_s,
            format!("unknown job kind `{job_s}` (expected dynamics, gravity, quantize or invariants)"),
        )
    })?;
    match job {
        JobKind::Dynamics => {
            let tag = tag_of(job, &table, "scenario")?;
            let kind = scenario_tag(tag).ok_or_else(|| {
                let known: Vec<String> = ScenarioKind::ALL.iter().map(|k| format!("{k:?}")).collect();
                cfg_err(
                    job_s,
                    format!("unknown scenario `{tag}` (expected one of {})", known.join(", ")),
                )
            })?;
            let (req, opt) = dynamics_schema(kind);
            check_keys(job, &format!(" (scenario {tag})"), &table, &req, &opt)?;
        }
        JobKind::Gravity => {
            let tag = tag_of(job, &table, "geometry")?;
            let geom = geometry_tag(tag).ok_or_else(|| {
                cfg_err(
                    job_s,
                    format!("unknown geometry `{tag}` (expected flat, kerr_newman, flat_with_t or flat_with_sources)"),
                )
            })?;
            let (req, opt) = gravity_schema(geom, &table);
            check_keys(job, &format!(" (geometry {tag})"), &table, &req, &opt)?;
        }
        JobKind::Quantize => {
            let (req, opt) = quantize_schema();
            check_keys(job, "", &table, &req, &opt)?;
        }
        JobKind::Invariants => check_keys(job, "", &table, &[], &["samples"])?,
    }
    let mut cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| cfg_err(job_s, e.message().to_string()))?;
    cfg.apply_defaults();
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    pub fn job(&self) -> JobKind {
        match self {
            RunConfig::Dynamics(_) => JobKind::Dynamics,
            RunConfig::Gravity(_) => JobKind::Gravity,
            RunConfig::Quantize(_) => JobKind::Quantize,
            RunConfig::Invariants(_) => JobKind::Invariants,
        }
    }

    pub fn name(&self) -> Option<&str> {
        match self {
            RunConfig::Dynamics(c) => c.name.as_deref(),
            RunConfig::Gravity(c) => c.name.as_deref(),
            RunConfig::Quantize(c) => c.name.as_deref(),
            RunConfig::Invariants(c) => c.name.as_deref(),
        }
    }

    pub fn output_dir(&self) -> Option<&str> {
        match self {
            RunConfig::Dynamics(c) => c.output_dir.as_deref(),
            RunConfig::Gravity(c) => c.output_dir.as_deref(),
            RunConfig::Quantize(c) => c.output_dir.as_deref(),
            RunConfig::Invariants(c) => c.output_dir.as_deref(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            RunConfig::Dynamics(c) => c.seed,
            RunConfig::Gravity(c) => c.seed,
            RunConfig::Quantize(c) => c.seed,
            RunConfig::Invariants(c) => c.seed,
        }
    }

    fn apply_defaults(&mut self) {
        if let RunConfig::Dynamics(c) = self {
            if c.scenario.is_planar() {
                c.theta.get_or_insert(0.0);
                c.w0.get_or_insert(0.0);
                c.z0.get_or_insert(0.0);
            }
            if matches!(c.scenario, ScenarioKind::EM2DExt | ScenarioKind::Photon2D) {
                c.mu.get_or_insert(0.0);
            }
        }
    }

    /// Checks value constraints that the key schema cannot express.
    pub fn validate(&self) -> Result<()> {
        let job = self.job().as_str();
        let positive = |what: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(cfg_err(job, format!("`{what}` must be positive and finite, got {v}")))
            }
        };
        let len = |what: &str, v: &[f64], n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(cfg_err(
                    job,
                    format!("`{what}` must have {n} components, got {}", v.len()),
                ))
            }
        };
        match self {
            RunConfig::Dynamics(c) => {
                positive("step", c.step)?;
                positive("span", c.span)?;
                let d = c.scenario.spatial_dim();
                len("x0", &c.x0, d)?;
                len("v0", &c.v0, d)?;
                if let Some(u) = &c.u0 {
                    len("u0", u, 3)?;
                }
                if let Some(e) = &c.e {
                    len("e", e, d)?;
                }
                if let Some(b) = &c.b {
                    len("b", b, d * (d - 1) / 2)?;
                }
                if let Some(g) = &c.grad_e {
                    len("grad_e", g, d * d)?;
                }
                if let Some(g) = &c.grad_b {
                    len("grad_b", g, d * d * (d - 1) / 2)?;
                }
                if c.scenario == ScenarioKind::Photon2D && (c.m.unwrap_or(0.0) != 0.0 || c.q.unwrap_or(0.0) != 0.0) {
                    return Err(cfg_err(job, "scenario Photon2D requires m = 0 and q = 0"));
                }
            }
            RunConfig::Gravity(c) => {
                positive("step", c.step)?;
                if let Some(span) = c.span {
                    positive("span", span)?;
                }
                if let Some(x) = &c.x0 {
                    len("x0", x, 3)?;
                }
                if let Some(v) = &c.v0 {
                    len("v0", v, 3)?;
                }
                if let Some(w) = &c.omega1 {
                    len("omega1", w, 2)?;
                }
                if let Some(w) = &c.omega2 {
                    len("omega2", w, 2)?;
                }
            }
            RunConfig::Quantize(c) => {
                positive("hbar", c.hbar)?;
                positive("grid_half", c.grid_half)?;
                positive("width", c.width)?;
                if !(c.dim == 2 || c.dim == 3) {
                    return Err(cfg_err(job, format!("`dim` must be 2 or 3, got {}", c.dim)));
                }
                if c.grid_n < 2 {
                    return Err(cfg_err(job, format!("`grid_n` must be at least 2, got {}", c.grid_n)));
                }
                len("center", &c.center, c.dim)?;
                if let Some(r) = &c.rotation {
                    len("rotation", r, if c.dim == 2 { 1 } else { 3 })?;
                }
                if let Some(b) = &c.boost {
                    len("boost", b, c.dim)?;
                }
                if let Some(t) = &c.translation {
                    len("translation", t, c.dim)?;
                }
                if c.c_values.windows(2).any(|w| w[1] <= w[0]) || c.c_values.iter().any(|v| *v <= 0.0) {
                    return Err(cfg_err(job, "`c_values` must be positive and strictly increasing"));
                }
            }
            RunConfig::Invariants(c) => {
                if c.samples == 0 {
                    return Err(cfg_err(job, "`samples` must be at least 1"));
                }
            }
        }
        Ok(())
    }

    /// TOML text that parses back to an equal configuration.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| cfg_err(self.job().as_str(), e.to_string()))
    }
}
