//! JSON scenario files.
//!
//! Every section and field is optional; omitted values fall back to the
//! reference station-keeping scenario. Unknown keys are rejected. Angles
//! are given in degrees, either as a bare number or as a string such as
//! `"10 deg"` or `"0.17 rad"`, and stored in radians.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;
use thiserror::Error;

use super::metrics::MetricsSpec;
use crate::approximators::{RbfGridSpec, DEFAULT_MAX_NODES};
use crate::control::{AdaptationLaw, BackstepGains, ErrorFrame, PidGains, SaturationLimits};
use crate::disturbance::{ConstantDisturbance, Disturbance, MarkovBias};
use crate::error::DpError;
use crate::vessel::{BodyVelocity, Pose, VesselParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid scenario: {0}")]
    Validation(String),
}

impl From<DpError> for ConfigError {
    fn from(e: DpError) -> Self {
        ConfigError::Validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
pub enum ControllerKind {
    #[serde(rename = "pid")]
    Pid,
    #[default]
    #[serde(rename = "adaptive-nn")]
    AdaptiveNn,
    #[serde(rename = "nn-fixed")]
    NnFixed,
}

impl ControllerKind {
    pub const ALL: [ControllerKind; 3] = [Self::Pid, Self::AdaptiveNn, Self::NnFixed];

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::Pid => "pid",
            ControllerKind::AdaptiveNn => "adaptive-nn",
            ControllerKind::NnFixed => "nn-fixed",
        }
    }

    pub fn uses_network(self) -> bool {
        self != ControllerKind::Pid
    }
}

impl fmt::Display for ControllerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown controller `{s}` (expected pid, adaptive-nn or nn-fixed)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerSpec {
    pub kind: ControllerKind,
    pub backstep: BackstepGains,
    pub law: AdaptationLaw,
    pub pid: PidGains,
    pub pid_frame: ErrorFrame,
    pub saturation: SaturationLimits,
}

impl Default for ControllerSpec {
    fn default() -> Self {
        Self {
            kind: ControllerKind::AdaptiveNn,
            backstep: BackstepGains::reference(),
            law: AdaptationLaw::default(),
            pid: PidGains::reference(),
            pid_frame: ErrorFrame::Body,
            saturation: SaturationLimits::disabled(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DisturbanceSpec {
    Constant(ConstantDisturbance),
    Markov {
        b0: Vector3<f64>,
        time_constants: Vector3<f64>,
        amplitude: Vector3<f64>,
        seed: u64,
    },
}

impl DisturbanceSpec {
    pub fn reference_markov(seed: u64) -> Self {
        DisturbanceSpec::Markov {
            b0: Vector3::zeros(),
            time_constants: Vector3::repeat(1000.0),
            amplitude: Vector3::repeat(1000.0),
            seed,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DisturbanceSpec::Constant(_) => "constant",
            DisturbanceSpec::Markov { .. } => "markov",
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            DisturbanceSpec::Constant(_) => None,
            DisturbanceSpec::Markov { seed, .. } => Some(*seed),
        }
    }

    pub fn instantiate(&self) -> Result<Disturbance, DpError> {
        Ok(match *self {
            DisturbanceSpec::Constant(c) => Disturbance::Constant(c),
            DisturbanceSpec::Markov {
                b0,
                time_constants,
                amplitude,
                seed,
            } => Disturbance::Markov(MarkovBias::new(b0, time_constants, amplitude, seed)?),
        })
    }
}

impl Default for DisturbanceSpec {
    fn default() -> Self {
        DisturbanceSpec::Constant(ConstantDisturbance::default())
    }
}

/// Fully validated scenario, SI units throughout.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub plant: VesselParams,
    pub controller: ControllerSpec,
    pub disturbance: DisturbanceSpec,
    pub target: Pose,
    pub initial_pose: Pose,
    pub initial_velocity: BodyVelocity,
    pub dt: f64,
    pub duration: f64,
    pub rbf: RbfGridSpec,
    pub weight_seed: u64,
    pub decimate: usize,
    pub metrics: MetricsSpec,
    /// Non-fatal findings from validation.
    pub warnings: Vec<String>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            plant: VesselParams::supply_vessel(),
            controller: ControllerSpec::default(),
            disturbance: DisturbanceSpec::default(),
            target: Pose::default(),
            initial_pose: Pose::new(10.0, 10.0, 10f64.to_radians()),
            initial_velocity: BodyVelocity::default(),
            dt: 0.1,
            duration: 400.0,
            rbf: RbfGridSpec::default(),
            weight_seed: 0,
            decimate: 1,
            metrics: MetricsSpec::default(),
            warnings: Vec::new(),
        }
    }
}

impl ScenarioConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let file: ScenarioFile = if text.trim().is_empty() {
            ScenarioFile::default()
        } else {
            serde_json::from_str(text).map_err(|e| ConfigError::Parse {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            })?
        };
        let mut cfg = file.into_config()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Number of integration steps over the horizon.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Checks every invariant and refreshes `warnings`.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Validation(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return bad(format!("duration must be at least dt, got {}", self.duration));
        }
        let n = self.steps() as f64;
        if (n * self.dt - self.duration).abs() > 1e-9 * self.duration.max(1.0) {
            return bad(format!(
                "duration {} is not a whole number of dt = {} steps",
                self.duration, self.dt
            ));
        }
        if self.decimate == 0 {
            return bad("log decimation must be at least 1".into());
        }
        for (name, p) in [("target", self.target), ("initial pose", self.initial_pose)] {
            if ![p.x, p.y, p.psi].iter().all(|v| v.is_finite()) {
                return bad(format!("{name} must be finite"));
            }
        }
        let v = self.initial_velocity;
        if ![v.u, v.v, v.r].iter().all(|x| x.is_finite()) {
            return bad("initial velocity must be finite".into());
        }
        self.plant = VesselParams::new(self.plant.M, self.plant.D)?;

        self.warnings.clear();
        let c = &self.controller;
        if c.kind.uses_network() {
            self.warnings.extend(c.backstep.validate()?);
            if self.rbf.ranges.len() != 9 {
                return bad(format!(
                    "the controller network needs 9 input ranges, got {}",
                    self.rbf.ranges.len()
                ));
            }
            if !(self.rbf.width > 0.0 && self.rbf.width.is_finite()) {
                return bad("RBF width must be positive".into());
            }
            if self.rbf.points_per_dim < 2 {
                return bad("RBF points_per_dim must be at least 2".into());
            }
            let requested = (self.rbf.points_per_dim as u128).saturating_pow(9);
            if requested > self.rbf.max_nodes as u128 {
                return Err(DpError::Capacity {
                    requested,
                    ceiling: self.rbf.max_nodes,
                }
                .into());
            }
            if c.law == AdaptationLaw::PositiveLeakage && c.kind == ControllerKind::AdaptiveNn {
                self.warnings
                    .push("positive-leakage adaptation law grows the weights exponentially".into());
            }
        } else if c.pid.kp.iter().chain(c.pid.ki.iter()).chain(c.pid.kd.iter()).any(|v| !v.is_finite()) {
            return bad("PID gains must be finite".into());
        }
        self.disturbance.instantiate()?;
        self.metrics.validate()?;
        Ok(())
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ScenarioConfig::from_json_str(&text)
}

// ---- file schema ----

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum MatrixSpec {
    Diagonal([f64; 3]),
    Full([[f64; 3]; 3]),
}

impl MatrixSpec {
    fn to_matrix(&self) -> Matrix3<f64> {
        match self {
            MatrixSpec::Diagonal(d) => Matrix3::from_diagonal(&Vector3::from(*d)),
            MatrixSpec::Full(rows) => Matrix3::from_fn(|i, j| rows[i][j]),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PerAxis {
    Scalar(f64),
    Axes([f64; 3]),
}

impl PerAxis {
    fn to_array(&self) -> [f64; 3] {
        match *self {
            PerAxis::Scalar(v) => [v; 3],
            PerAxis::Axes(a) => a,
        }
    }
}

/// Degrees when numeric; `"<value> deg"` or `"<value> rad"` when text.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum AngleSpec {
    Degrees(f64),
    Text(String),
}

impl AngleSpec {
    fn radians(&self) -> Result<f64, ConfigError> {
        match self {
            AngleSpec::Degrees(d) => Ok(d.to_radians()),
            AngleSpec::Text(s) => parse_angle(s),
        }
    }
}

fn parse_angle(s: &str) -> Result<f64, ConfigError> {
    let t = s.trim();
    let (num, unit) = match t.find(|c: char| c.is_alphabetic() || c == '°') {
        Some(i) => (t[..i].trim(), t[i..].trim()),
        None => (t, "deg"),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| ConfigError::Validation(format!("cannot parse angle `{s}`")))?;
    match unit {
        "deg" | "degree" | "degrees" | "°" => Ok(v.to_radians()),
        "rad" | "radian" | "radians" => Ok(v),
        _ => Err(ConfigError::Validation(format!("unknown angle unit in `{s}`"))),
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ScenarioFile {
    plant: PlantFile,
    controller: ControllerFile,
    disturbance: Option<DisturbanceFile>,
    target: PoseFile,
    initial_pose: Option<PoseFile>,
    initial_velocity: Option<[f64; 3]>,
    dt: Option<f64>,
    duration: Option<f64>,
    rbf: RbfFile,
    log: LogFile,
    metrics: MetricsFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PlantFile {
    mass: Option<MatrixSpec>,
    damping: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
enum LawTag {
    #[default]
    #[serde(rename = "lyapunov")]
    Lyapunov,
    #[serde(rename = "sigma-modification")]
    SigmaModification,
    #[serde(rename = "positive-leakage")]
    PositiveLeakage,
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
enum FrameTag {
    #[default]
    #[serde(rename = "body")]
    Body,
    #[serde(rename = "earth")]
    Earth,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ControllerFile {
    #[serde(rename = "type")]
    kind: ControllerKind,
    k1: Option<MatrixSpec>,
    k2: Option<MatrixSpec>,
    gamma: Option<PerAxis>,
    sigma: Option<PerAxis>,
    adaptation_law: LawTag,
    kp: Option<MatrixSpec>,
    ki: Option<MatrixSpec>,
    kd: Option<MatrixSpec>,
    pid_frame: FrameTag,
    /// Per-axis limits; omitted or null disables saturation.
    saturation: Option<[f64; 3]>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum DisturbanceFile {
    #[serde(rename = "constant")]
    Constant { delta: Option<[f64; 3]> },
    #[serde(rename = "markov")]
    Markov {
        time_constants: Option<PerAxis>,
        amplitude: Option<PerAxis>,
        b0: Option<[f64; 3]>,
        seed: Option<u64>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct PoseFile {
    x: f64,
    y: f64,
    psi: Option<AngleSpec>,
}

impl PoseFile {
    fn to_pose(&self) -> Result<Pose, ConfigError> {
        let psi = match &self.psi {
            Some(a) => a.radians()?,
            None => 0.0,
        };
        Ok(Pose::new(self.x, self.y, psi))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RbfFile {
    points_per_dim: Option<usize>,
    ranges: Option<Vec<[f64; 2]>>,
    width: Option<f64>,
    weight_seed: Option<u64>,
    max_nodes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct LogFile {
    decimate: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MetricsFile {
    pos_band: Option<f64>,
    psi_band: Option<AngleSpec>,
    tail_window: Option<f64>,
}

impl ScenarioFile {
    fn into_config(self) -> Result<ScenarioConfig, ConfigError> {
        let mut cfg = ScenarioConfig::default();

        if let Some(m) = &self.plant.mass {
            cfg.plant.M = m.to_matrix();
        }
        if let Some(d) = &self.plant.damping {
            cfg.plant.D = d.to_matrix();
        }

        let c = &self.controller;
        let ctl = &mut cfg.controller;
        ctl.kind = c.kind;
        if let Some(m) = &c.k1 {
            ctl.backstep.k1 = m.to_matrix();
        }
        if let Some(m) = &c.k2 {
            ctl.backstep.k2 = m.to_matrix();
        }
        if let Some(g) = &c.gamma {
            ctl.backstep.gamma = g.to_array();
        }
        if let Some(s) = &c.sigma {
            ctl.backstep.sigma = s.to_array();
        }
        ctl.law = match c.adaptation_law {
            LawTag::Lyapunov => AdaptationLaw::Lyapunov,
            LawTag::SigmaModification => AdaptationLaw::SigmaModification,
            LawTag::PositiveLeakage => AdaptationLaw::PositiveLeakage,
        };
        if let Some(m) = &c.kp {
            ctl.pid.kp = m.to_matrix();
        }
        if let Some(m) = &c.ki {
            ctl.pid.ki = m.to_matrix();
        }
        if let Some(m) = &c.kd {
            ctl.pid.kd = m.to_matrix();
        }
        ctl.pid_frame = match c.pid_frame {
            FrameTag::Body => ErrorFrame::Body,
            FrameTag::Earth => ErrorFrame::Earth,
        };
        if let Some(lim) = c.saturation {
            ctl.saturation = SaturationLimits::new(Vector3::from(lim))?;
        }

        if let Some(d) = self.disturbance {
            cfg.disturbance = match d {
                DisturbanceFile::Constant { delta } => DisturbanceSpec::Constant(ConstantDisturbance {
                    delta: delta.map(Vector3::from).unwrap_or_else(|| ConstantDisturbance::default().delta),
                }),
                DisturbanceFile::Markov {
                    time_constants,
                    amplitude,
                    b0,
                    seed,
                } => DisturbanceSpec::Markov {
                    b0: b0.map(Vector3::from).unwrap_or_else(Vector3::zeros),
                    time_constants: Vector3::from(time_constants.map_or([1000.0; 3], |t| t.to_array())),
                    amplitude: Vector3::from(amplitude.map_or([1000.0; 3], |t| t.to_array())),
                    seed: seed.unwrap_or(0),
                },
            };
        }

        cfg.target = self.target.to_pose()?;
        if let Some(p) = &self.initial_pose {
            cfg.initial_pose = p.to_pose()?;
        }
        if let Some(v) = self.initial_velocity {
            cfg.initial_velocity = BodyVelocity::new(v[0], v[1], v[2]);
        }
        if let Some(dt) = self.dt {
            cfg.dt = dt;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }

        let r = &self.rbf;
        if let Some(p) = r.points_per_dim {
            cfg.rbf.points_per_dim = p;
        }
        if let Some(ranges) = &r.ranges {
            cfg.rbf.ranges = ranges.iter().map(|&[lo, hi]| (lo, hi)).collect();
        }
        if let Some(w) = r.width {
            cfg.rbf.width = w;
        }
        cfg.rbf.max_nodes = r.max_nodes.unwrap_or(DEFAULT_MAX_NODES);
        if let Some(s) = r.weight_seed {
            cfg.weight_seed = s;
        }
        if let Some(d) = self.log.decimate {
            cfg.decimate = d;
        }

        let m = &self.metrics;
        if let Some(b) = m.pos_band {
            cfg.metrics.pos_band = b;
        }
        if let Some(a) = &m.psi_band {
            cfg.metrics.psi_band = a.radians()?;
        }
        if let Some(w) = m.tail_window {
            cfg.metrics.tail_window = w;
        }
        Ok(cfg)
    }
}
