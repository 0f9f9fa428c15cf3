//! JSON run configuration.
//!
//! Every section and key is optional; omitted values take the airframe,
//! cascade-gain and LQR-weight defaults. Unknown keys are rejected.
//!
//! ```json
//! {
//!   "params": {"m": 1.0, "l": 0.225, "kf": 9.8e-6, "km": 1.6e-7,
//!              "ixx": 0.0035, "iyy": 0.0035, "izz": 0.005, "jr": 0.0, "g": 9.81},
//!   "sim":    {"dt": 1e-4, "t_final": 15.0, "plant": "nonlinear"},
//!   "pid":    {"thrust": {"kp": 9.09, "ki": 1.94, "kd": 10.41}, "outer_decimation": 10},
//!   "lqr":    {"q_diag": [12 values], "r_diag": [4 values]},
//!   "case":   {"id": 1, "z_ref": 1.0, "psi_ref": 0.0, "x0": [12 values]},
//!   "mixer":  {"include_arm_length": true}
//! }
//! ```

use serde::Deserialize;
use thiserror::Error;

use crate::model::{Mixer, QuadrotorParams, State12, INPUT_DIM, STATE_DIM};
use crate::pid::{CascadeConfig, PidError};
use crate::riccati::{LqrWeights, DEFAULT_Q_DIAGONAL, DEFAULT_R_DIAGONAL};
use crate::sim::{self, PlantMode, Scenario, ScenarioOverrides, SimError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    /// Malformed JSON, wrong type or unknown key.
    #[error("schema error at {path}: {message}")]
    SchemaError { path: String, message: String },
    /// Well-formed value that violates a constraint.
    #[error("invalid value at {path}: {value} ({constraint})")]
    ValueError {
        path: String,
        value: String,
        constraint: String,
    },
}

impl ConfigError {
    pub fn path(&self) -> &str {
        match self {
            ConfigError::SchemaError { path, .. } | ConfigError::ValueError { path, .. } => path,
        }
    }

    fn value(path: &str, value: impl ToString, constraint: impl Into<String>) -> Self {
        ConfigError::ValueError {
            path: path.to_string(),
            value: value.to_string(),
            constraint: constraint.into(),
        }
    }
}

/// Validated inputs for every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: QuadrotorParams,
    pub pid: CascadeConfig,
    pub lqr: LqrWeights,
    pub scenario: Scenario,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("{}").expect("defaults are valid")
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    params: RawParams,
    sim: RawSim,
    pid: CascadeConfig,
    lqr: RawLqr,
    case: RawCase,
    mixer: Mixer,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawParams {
    m: f64,
    l: f64,
    kf: f64,
    km: f64,
    ixx: f64,
    iyy: f64,
    izz: f64,
    jr: f64,
    g: f64,
}

impl Default for RawParams {
    fn default() -> Self {
        let p = QuadrotorParams::default();
        Self {
            m: p.mass,
            l: p.arm_length,
            kf: p.thrust_factor,
            km: p.drag_factor,
            ixx: p.inertia_xx,
            iyy: p.inertia_yy,
            izz: p.inertia_zz,
            jr: p.rotor_inertia,
            g: p.gravity,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSim {
    dt: f64,
    t_final: f64,
    plant: PlantMode,
}

impl Default for RawSim {
    fn default() -> Self {
        Self {
            dt: sim::DEFAULT_DT,
            t_final: sim::DEFAULT_DURATION,
            plant: PlantMode::Nonlinear,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawLqr {
    q_diag: Vec<f64>,
    r_diag: Vec<f64>,
}

impl Default for RawLqr {
    fn default() -> Self {
        Self {
            q_diag: DEFAULT_Q_DIAGONAL.to_vec(),
            r_diag: DEFAULT_R_DIAGONAL.to_vec(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawCase {
    id: u32,
    x_ref: Option<f64>,
    y_ref: Option<f64>,
    z_ref: Option<f64>,
    psi_ref: Option<f64>,
    x0: Option<Vec<f64>>,
    setpoint_step: Option<bool>,
}

impl Default for RawCase {
    fn default() -> Self {
        Self {
            id: 1,
            x_ref: None,
            y_ref: None,
            z_ref: None,
            psi_ref: None,
            x0: None,
            setpoint_step: None,
        }
    }
}

/// Parses and validates a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::SchemaError {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let p = &raw.params;
    let params = QuadrotorParams {
        mass: p.m,
        arm_length: p.l,
        thrust_factor: p.kf,
        drag_factor: p.km,
        inertia_xx: p.ixx,
        inertia_yy: p.iyy,
        inertia_zz: p.izz,
        rotor_inertia: p.jr,
        gravity: p.g,
        mixer: raw.mixer,
    };
    let positive = [
        ("params.m", p.m),
        ("params.l", p.l),
        ("params.kf", p.kf),
        ("params.km", p.km),
        ("params.ixx", p.ixx),
        ("params.iyy", p.iyy),
        ("params.izz", p.izz),
        ("params.g", p.g),
        ("sim.dt", raw.sim.dt),
        ("sim.t_final", raw.sim.t_final),
    ];
    for (path, value) in positive {
        if !(value.is_finite() && value > 0.0) {
            return Err(ConfigError::value(path, value, "must be finite and > 0"));
        }
    }
    if !(p.jr.is_finite() && p.jr >= 0.0) {
        return Err(ConfigError::value("params.jr", p.jr, "must be finite and >= 0"));
    }
    if raw.sim.dt > raw.sim.t_final / 100.0 {
        return Err(ConfigError::value("sim.dt", raw.sim.dt, "must be <= sim.t_final / 100"));
    }

    raw.pid.validate().map_err(|e| match e {
        PidError::InvalidConfig { name, reason } => ConfigError::value(&format!("pid.{name}"), "", reason),
        other => ConfigError::value("pid", "", other.to_string()),
    })?;

    let lqr = lqr_weights(&raw.lqr)?;

    let c = &raw.case;
    let initial_state = match &c.x0 {
        None => None,
        Some(v) if v.len() != STATE_DIM => {
            return Err(ConfigError::value("case.x0", format!("{} values", v.len()), "expected 12 values"))
        }
        Some(v) => {
            if let Some(i) = v.iter().position(|x| !x.is_finite()) {
                return Err(ConfigError::value(&format!("case.x0[{i}]"), v[i], "must be finite"));
            }
            Some(State12::from_array(std::array::from_fn(|i| v[i])))
        }
    };
    let refs = [("case.x_ref", c.x_ref), ("case.y_ref", c.y_ref), ("case.z_ref", c.z_ref), ("case.psi_ref", c.psi_ref)];
    for (path, value) in refs {
        if let Some(v) = value.filter(|v| !v.is_finite()) {
            return Err(ConfigError::value(path, v, "must be finite"));
        }
    }
    let overrides = ScenarioOverrides {
        initial_state,
        x_ref: c.x_ref,
        y_ref: c.y_ref,
        z_ref: c.z_ref,
        psi_ref: c.psi_ref,
        duration: Some(raw.sim.t_final),
        dt: Some(raw.sim.dt),
        plant_mode: Some(raw.sim.plant),
        setpoint_step: c.setpoint_step,
    };
    let scenario = sim::scenario_case(c.id, &overrides).map_err(|e| match e {
        SimError::UnknownCase(id) => ConfigError::value("case.id", id, "expected 1, 2 or 3"),
        other => ConfigError::value("case", "", other.to_string()),
    })?;

    Ok(RunConfig {
        params,
        pid: raw.pid,
        lqr,
        scenario,
    })
}

fn lqr_weights(raw: &RawLqr) -> Result<LqrWeights, ConfigError> {
    let checks = [("lqr.q_diag", &raw.q_diag, STATE_DIM, true), ("lqr.r_diag", &raw.r_diag, INPUT_DIM, false)];
    for (path, diag, len, allow_zero) in checks {
        if diag.len() != len {
            return Err(ConfigError::value(path, format!("{} values", diag.len()), format!("expected {len} values")));
        }
        for (i, &v) in diag.iter().enumerate() {
            let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
            if !ok {
                let constraint = if allow_zero { "must be finite and >= 0" } else { "must be finite and > 0" };
                return Err(ConfigError::value(&format!("{path}[{i}]"), v, constraint));
            }
        }
    }
    LqrWeights::from_diagonals(&raw.q_diag, &raw.r_diag).map_err(|e| ConfigError::value("lqr", "", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pid::PidGains;

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c.params, QuadrotorParams::default());
        assert_eq!(c.pid, CascadeConfig::default());
        assert_eq!(c.lqr, LqrWeights::hover_default());
        assert_eq!(c.lqr.r[(1, 1)], 0.001);
        assert_eq!(c.scenario.case_id, 1);
        assert_eq!(c.scenario.dt, sim::DEFAULT_DT);
        assert_eq!(c.scenario.duration, 15.0);
    }

    #[test]
    fn negative_mass_is_value_error() {
        let err = parse_config(r#"{"params":{"m":-1}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::ValueError { .. }), "{err:?}");
        assert_eq!(err.path(), "params.m");
    }

    #[test]
    fn overrides_merge_over_defaults() {
        let c = parse_config(r#"{"sim":{"dt":0.01,"t_final":5}}"#).unwrap();
        assert_eq!((c.scenario.dt, c.scenario.duration), (0.01, 5.0));
        assert_eq!(c.params, QuadrotorParams::default());
        assert_eq!(c.scenario.plant_mode, PlantMode::Nonlinear);
    }

    #[test]
    fn unknown_keys_are_schema_errors_with_path() {
        let err = parse_config(r#"{"params":{"mass":1}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::SchemaError { .. }), "{err:?}");
        assert!(err.path().starts_with("params"), "{}", err.path());

        let err = parse_config(r#"{"pid":{"yaw":{"kp":1,"kx":2}}}"#).unwrap_err();
        assert!(err.path().starts_with("pid.yaw"), "{}", err.path());

        let err = parse_config(r#"{"extra":1}"#).unwrap_err();
        assert!(matches!(err, ConfigError::SchemaError { .. }));
    }

    #[test]
    fn type_errors_are_schema_errors() {
        let err = parse_config(r#"{"sim":{"dt":"fast"}}"#).unwrap_err();
        assert_eq!(err.path(), "sim.dt");
        let err = parse_config(r#"{"sim":{"plant":"quantum"}}"#).unwrap_err();
        assert_eq!(err.path(), "sim.plant");
        assert!(matches!(parse_config("not json"), Err(ConfigError::SchemaError { .. })));
    }

    #[test]
    fn full_document() {
        let text = r#"{
            "params": {"m": 1.2, "l": 0.2, "kf": 1e-5, "km": 2e-7, "ixx": 0.004, "iyy": 0.004, "izz": 0.006, "jr": 1e-5, "g": 9.8},
            "sim": {"dt": 0.001, "t_final": 4, "plant": "linear"},
            "pid": {"yaw": {"kp": 1, "ki": 0, "kd": 0.5}, "outer_decimation": 5, "gravity_feedforward": false},
            "lqr": {"q_diag": [1,1,1,1,1,1,1,1,1,1,1,1], "r_diag": [1,1,1,1]},
            "case": {"id": 3, "z_ref": 2, "psi_ref": 0.25, "x0": [0,0,0.5,0,0,0,0,0,0,0,0,0]},
            "mixer": {"include_arm_length": false}
        }"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.params.mass, 1.2);
        assert_eq!(c.params.rotor_inertia, 1e-5);
        assert!(!c.params.mixer.include_arm_length);
        assert_eq!(c.scenario.plant_mode, PlantMode::Linear);
        assert_eq!(c.pid.yaw, PidGains::new(1.0, 0.0, 0.5));
        assert_eq!(c.pid.thrust, CascadeConfig::default().thrust);
        assert_eq!(c.pid.outer_decimation, 5);
        assert!(!c.pid.gravity_feedforward);
        assert_eq!(c.scenario.case_id, 3);
        assert_eq!((c.scenario.references.z, c.scenario.references.psi), (2.0, 0.25));
        assert_eq!(c.scenario.initial_state[2], 0.5);
        assert_eq!(c.lqr.q, nalgebra::DMatrix::identity(12, 12));
    }

    #[test]
    fn value_constraints() {
        let cases = [
            (r#"{"lqr":{"q_diag":[1,2,3]}}"#, "lqr.q_diag"),
            (r#"{"lqr":{"r_diag":[1,0,1,1]}}"#, "lqr.r_diag[1]"),
            (r#"{"lqr":{"q_diag":[1,1,1,1,1,1,1,1,1,1,1,-1]}}"#, "lqr.q_diag[11]"),
            (r#"{"case":{"id":7}}"#, "case.id"),
            (r#"{"case":{"x0":[1,2]}}"#, "case.x0"),
            (r#"{"pid":{"outer_decimation":0}}"#, "pid.outer_decimation"),
            (r#"{"sim":{"dt":1,"t_final":5}}"#, "sim.dt"),
            (r#"{"params":{"jr":-1}}"#, "params.jr"),
        ];
        for (text, path) in cases {
            let err = parse_config(text).unwrap_err();
            assert!(matches!(err, ConfigError::ValueError { .. }), "{text}: {err:?}");
            assert_eq!(err.path(), path, "{text}");
        }
    }

    #[test]
    fn zero_q_is_accepted() {
        let c = parse_config(r#"{"lqr":{"q_diag":[0,0,0,0,0,0,0,0,0,0,0,0]}}"#).unwrap();
        assert_eq!(c.lqr.q.norm(), 0.0);
    }
}
