//! Fixed-step closed-loop simulation, test scenarios and step-response
//! metrics.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linearize::{self, StateSpace};
use crate::model::{self, idx, wrap_to_pi, ControlInput, QuadrotorParams, State12, INPUT_DIM, STATE_DIM};
use crate::pid::{cascade_step, CascadeConfig, CascadeMemory, References};
use crate::riccati::{self, CareSolution, GainMatrix, LqrWeights, RiccatiError};

/// Default integration and controller step, s.
///
/// The LQR rate loops close with poles near -6000 rad/s, so a zero-order
/// hold at 1 ms would be unstable; 0.1 ms keeps the sampled loop well inside
/// its stability region.
pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_DURATION: f64 = 15.0;
/// Pitch magnitude at which the Euler-angle model is treated as singular.
pub const THETA_LIMIT: f64 = FRAC_PI_2 - 1e-6;
/// Settling band as a fraction of the step size.
pub const DEFAULT_BAND: f64 = 0.02;
/// Absolute band used for channels regulated to zero.
pub const REGULATION_BAND_FLOOR: f64 = 0.02;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("state became non-finite{}", at_time(.time))]
    NonFiniteState { time: Option<f64> },
    #[error("pitch reached the singular bound at t = {time} s (theta = {theta})")]
    ThetaOutOfRange { time: f64, theta: f64 },
    #[error("unknown scenario case {0} (expected 1, 2 or 3)")]
    UnknownCase(u32),
    #[error("unknown channel {0:?}")]
    ChannelUnknown(String),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("settling band must be in (0, 0.2], got {0}")]
    InvalidBand(f64),
    #[error(transparent)]
    Riccati(#[from] RiccatiError),
}

fn at_time(time: &Option<f64>) -> String {
    time.map(|t| format!(" at t = {t} s")).unwrap_or_default()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlantMode {
    /// Full rigid-body equations.
    #[default]
    Nonlinear,
    /// Hover-linearized model `x_dot = A x + B (u - u_hover)`.
    Linear,
}

impl fmt::Display for PlantMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlantMode::Nonlinear => "nonlinear",
            PlantMode::Linear => "linear",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub case_id: u32,
    pub initial_state: State12,
    pub references: References,
    pub duration: f64,
    pub dt: f64,
    pub plant_mode: PlantMode,
    /// References are applied as a step at t = 0 to a PID cascade that was
    /// holding the initial state with zero setpoints (derivative terms see
    /// the jump). When false, each loop starts without a previous error.
    pub setpoint_step: bool,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(SimError::InvalidScenario(format!("duration must be > 0, got {}", self.duration)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(SimError::InvalidScenario(format!("dt must be > 0, got {}", self.dt)));
        }
        if self.dt > self.duration / 100.0 {
            return Err(SimError::InvalidScenario(format!(
                "dt = {} exceeds duration/100 = {}",
                self.dt,
                self.duration / 100.0
            )));
        }
        if !self.initial_state.is_finite() {
            return Err(SimError::InvalidScenario("initial state must be finite".into()));
        }
        if self.initial_state[idx::THETA].abs() >= THETA_LIMIT {
            return Err(SimError::InvalidScenario("initial pitch at the singular bound".into()));
        }
        let r = &self.references;
        if ![r.x, r.y, r.z, r.psi].iter().all(|v| v.is_finite()) {
            return Err(SimError::InvalidScenario("references must be finite".into()));
        }
        Ok(())
    }

    /// Number of integration steps; the trajectory has one more sample.
    pub fn steps(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }

    /// Full reference state (zero velocities and rates).
    pub fn reference_state(&self) -> State12 {
        reference_state(&self.references)
    }
}

pub fn reference_state(refs: &References) -> State12 {
    let mut x = State12::zeros();
    x[idx::X] = refs.x;
    x[idx::Y] = refs.y;
    x[idx::Z] = refs.z;
    x[idx::PSI] = refs.psi;
    x
}

/// Fields of a scenario that callers may override.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScenarioOverrides {
    pub initial_state: Option<State12>,
    pub x_ref: Option<f64>,
    pub y_ref: Option<f64>,
    pub z_ref: Option<f64>,
    pub psi_ref: Option<f64>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub plant_mode: Option<PlantMode>,
    pub setpoint_step: Option<bool>,
}

/// Initial state of the non-zero-initial-condition case.
pub const CASE2_INITIAL_STATE: [f64; STATE_DIM] = [1.0, 1.0, 0.2, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];

/// The three comparison cases:
///
/// 1. climb to `z = 1` from rest,
/// 2. regulate every state to zero from [`CASE2_INITIAL_STATE`],
/// 3. climb to `z = 1` while turning to `psi = 0.5` rad.
pub fn scenario_case(case_id: u32, overrides: &ScenarioOverrides) -> Result<Scenario, SimError> {
    let (initial_state, references) = match case_id {
        1 => (State12::zeros(), References { z: 1.0, ..Default::default() }),
        2 => (State12::from_array(CASE2_INITIAL_STATE), References::default()),
        3 => (State12::zeros(), References { z: 1.0, psi: 0.5, ..Default::default() }),
        other => return Err(SimError::UnknownCase(other)),
    };
    let o = overrides;
    let scenario = Scenario {
        case_id,
        initial_state: o.initial_state.unwrap_or(initial_state),
        references: References {
            x: o.x_ref.unwrap_or(references.x),
            y: o.y_ref.unwrap_or(references.y),
            z: o.z_ref.unwrap_or(references.z),
            psi: o.psi_ref.unwrap_or(references.psi),
        },
        duration: o.duration.unwrap_or(DEFAULT_DURATION),
        dt: o.dt.unwrap_or(DEFAULT_DT),
        plant_mode: o.plant_mode.unwrap_or_default(),
        setpoint_step: o.setpoint_step.unwrap_or(true),
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Sampled closed-loop response. `controls[k]` is the input applied over
/// `[times[k], times[k+1])`; the last entry is the controller output at the
/// final state.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State12>,
    pub controls: Vec<ControlInput>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channel(&self, channel: Channel) -> Vec<f64> {
        self.states.iter().map(|x| x[channel.index()]).collect()
    }

    pub fn final_state(&self) -> Option<&State12> {
        self.states.last()
    }
}

/// State components addressable by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    X,
    Y,
    Z,
    Phi,
    Theta,
    Psi,
    #[serde(rename = "xdot")]
    XDot,
    #[serde(rename = "ydot")]
    YDot,
    #[serde(rename = "zdot")]
    ZDot,
    P,
    Q,
    R,
}

impl Channel {
    pub const ALL: [Channel; STATE_DIM] = [
        Channel::X,
        Channel::Y,
        Channel::Z,
        Channel::Phi,
        Channel::Theta,
        Channel::Psi,
        Channel::XDot,
        Channel::YDot,
        Channel::ZDot,
        Channel::P,
        Channel::Q,
        Channel::R,
    ];
    pub const POSE: [Channel; 6] = [
        Channel::X,
        Channel::Y,
        Channel::Z,
        Channel::Phi,
        Channel::Theta,
        Channel::Psi,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Channel::X => "x",
            Channel::Y => "y",
            Channel::Z => "z",
            Channel::Phi => "phi",
            Channel::Theta => "theta",
            Channel::Psi => "psi",
            Channel::XDot => "xdot",
            Channel::YDot => "ydot",
            Channel::ZDot => "zdot",
            Channel::P => "p",
            Channel::Q => "q",
            Channel::R => "r",
        }
    }

    /// Setpoint of this channel under `refs`.
    pub fn reference(self, refs: &References) -> f64 {
        match self {
            Channel::X => refs.x,
            Channel::Y => refs.y,
            Channel::Z => refs.z,
            Channel::Psi => refs.psi,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Channel {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        Channel::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| SimError::ChannelUnknown(s.to_string()))
    }
}

/// Step-response summary of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(skip)]
    pub channel: Channel,
    #[serde(rename = "steady_state")]
    pub steady_state_value: f64,
    /// Peak excursion past the steady state in the step direction, as a
    /// fraction of the step.
    pub overshoot: f64,
    /// Time after which the signal stays inside the band, s.
    pub settling_time: f64,
    /// Excursions of `|y - y_ss|` beyond the band after first entering it.
    #[serde(rename = "peak_count")]
    pub overshoot_peak_count: usize,
    pub settled: bool,
}

/// Step-response metrics of `channel`.
///
/// The steady state is the mean of the final 5% of samples and the step is
/// measured from the first sample to it. The band is `band * |step|`, with
/// an absolute floor of 0.02 when `reference` is zero. Times are relative to
/// the first sample.
pub fn compute_metrics(traj: &Trajectory, channel: Channel, reference: f64, band: f64) -> Result<Metrics, SimError> {
    if !(band > 0.0 && band <= 0.2) {
        return Err(SimError::InvalidBand(band));
    }
    if traj.is_empty() {
        return Err(SimError::InvalidScenario("empty trajectory".into()));
    }
    let signal = traj.channel(channel);
    Ok(signal_metrics(&traj.times, &signal, channel, reference, band))
}

/// [`compute_metrics`] with the channel given by name.
pub fn compute_metrics_by_name(traj: &Trajectory, channel: &str, reference: f64, band: f64) -> Result<Metrics, SimError> {
    compute_metrics(traj, channel.parse()?, reference, band)
}

fn signal_metrics(times: &[f64], signal: &[f64], channel: Channel, reference: f64, band: f64) -> Metrics {
    let n = signal.len();
    let window = ((n as f64) * 0.05).ceil().max(1.0) as usize;
    let steady = signal[n - window..].iter().sum::<f64>() / window as f64;
    let step = steady - signal[0];

    let mut tolerance = band * step.abs();
    if reference == 0.0 {
        tolerance = tolerance.max(REGULATION_BAND_FLOOR);
    }

    let deviation: Vec<f64> = signal.iter().map(|y| (y - steady).abs()).collect();
    let t0 = times[0];
    let last_outside = deviation.iter().rposition(|&d| d > tolerance);
    let (settling_time, settled) = match last_outside {
        None => (0.0, true),
        Some(i) if i + 1 < n => (times[i + 1] - t0, true),
        Some(_) => (times[n - 1] - t0, false),
    };

    // a step no larger than the band is noise; overshoot relative to it is
    // meaningless
    let overshoot = if step.abs() > tolerance {
        let direction = step.signum();
        let beyond = signal
            .iter()
            .map(|y| (y - steady) * direction)
            .fold(0.0_f64, f64::max);
        beyond / step.abs()
    } else {
        0.0
    };

    let mut peaks = 0;
    if let Some(entry) = deviation.iter().position(|&d| d <= tolerance) {
        let mut outside = false;
        for &d in &deviation[entry..] {
            if d > tolerance && !outside {
                peaks += 1;
            }
            outside = d > tolerance;
        }
    }

    // adding +0.0 turns -0.0 into +0.0 so reports never show a signed zero
    Metrics {
        channel,
        steady_state_value: steady + 0.0,
        overshoot: overshoot + 0.0,
        settling_time: settling_time + 0.0,
        overshoot_peak_count: peaks,
        settled,
    }
}

/// Metrics for every state channel, each against its own setpoint.
pub fn scenario_metrics(traj: &Trajectory, refs: &References, band: f64) -> Result<Vec<Metrics>, SimError> {
    Channel::ALL
        .into_iter()
        .map(|c| compute_metrics(traj, c, c.reference(refs), band))
        .collect()
}

/// Classical fourth-order Runge–Kutta step with `u` held over the step.
pub fn rk4_step<F>(derivative: F, state: &State12, u: &ControlInput, dt: f64) -> Result<State12, SimError>
where
    F: Fn(&State12, &ControlInput) -> State12,
{
    let x = state.0;
    let k1 = derivative(state, u).0;
    let k2 = derivative(&State12(x + k1 * (0.5 * dt)), u).0;
    let k3 = derivative(&State12(x + k2 * (0.5 * dt)), u).0;
    let k4 = derivative(&State12(x + k3 * dt), u).0;
    let next = State12(x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0));
    if next.is_finite() {
        Ok(next)
    } else {
        Err(SimError::NonFiniteState { time: None })
    }
}

/// Full-state feedback about hover.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrController {
    pub gain: SMatrix<f64, INPUT_DIM, STATE_DIM>,
    pub u_equilibrium: ControlInput,
}

impl LqrController {
    /// Solves the Riccati equation for the hover model of `params`.
    pub fn design(params: &QuadrotorParams, weights: &LqrWeights) -> Result<(Self, CareSolution), SimError> {
        let ss = linearize::hover_jacobians(params);
        let (gain, solution) = riccati::lqr(&ss.a_dyn(), &ss.b_dyn(), weights)?;
        Ok((Self::from_gain(&gain, params)?, solution))
    }

    pub fn from_gain(gain: &GainMatrix, params: &QuadrotorParams) -> Result<Self, SimError> {
        let gain = gain
            .to_hover_gain()
            .ok_or_else(|| RiccatiError::Dimension(format!("gain is {:?}, expected (4, 12)", gain.k.shape())))?;
        let (_, u_equilibrium, _) = model::hover_equilibrium(params);
        Ok(Self { gain, u_equilibrium })
    }

    pub fn control(&self, state: &State12, reference: &State12) -> ControlInput {
        let mut error = state.0 - reference.0;
        error[idx::PSI] = wrap_to_pi(error[idx::PSI]);
        ControlInput(self.u_equilibrium.0 - self.gain * error)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Controller {
    Pid(CascadeConfig),
    Lqr(LqrController),
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Pid(_) => "pid",
            Controller::Lqr(_) => "lqr",
        }
    }
}

enum ControllerState<'a> {
    Pid {
        config: &'a CascadeConfig,
        memory: CascadeMemory,
    },
    Lqr {
        lqr: &'a LqrController,
        reference: State12,
    },
}

impl ControllerState<'_> {
    fn update(&mut self, params: &QuadrotorParams, refs: &References, state: &State12, dt: f64) -> ControlInput {
        match self {
            ControllerState::Pid { config, memory } => {
                let (u, next) = cascade_step(config, params, state, refs, memory, dt);
                *memory = next;
                u
            }
            ControllerState::Lqr { lqr, reference } => lqr.control(state, reference),
        }
    }
}

/// Simulates `controller` on the plant selected by `scenario.plant_mode`.
///
/// The controller runs once per step and its output is held through the
/// RK4 stages. In nonlinear mode roll and yaw are wrapped after every step
/// and reaching the pitch singularity aborts the run.
pub fn run_closed_loop(scenario: &Scenario, controller: &Controller, params: &QuadrotorParams) -> Result<Trajectory, SimError> {
    scenario.validate()?;
    params
        .validate()
        .map_err(|e| SimError::InvalidScenario(e.to_string()))?;

    let steps = scenario.steps();
    let dt = scenario.dt;
    let refs = scenario.references;
    let mut ctrl = match controller {
        Controller::Pid(config) => ControllerState::Pid {
            config,
            memory: if scenario.setpoint_step {
                CascadeMemory::primed(&scenario.initial_state)
            } else {
                CascadeMemory::default()
            },
        },
        Controller::Lqr(lqr) => ControllerState::Lqr {
            lqr,
            reference: scenario.reference_state(),
        },
    };

    let linear: Option<StateSpace> =
        (scenario.plant_mode == PlantMode::Linear).then(|| linearize::hover_jacobians(params));
    let u_hover = model::hover_equilibrium(params).1;
    let derivative = |x: &State12, u: &ControlInput| match &linear {
        Some(ss) => State12(ss.a * x.0 + ss.b * (u.0 - u_hover.0)),
        None => model::dynamics(x, u, params),
    };

    let mut traj = Trajectory {
        times: Vec::with_capacity(steps + 1),
        states: Vec::with_capacity(steps + 1),
        controls: Vec::with_capacity(steps + 1),
    };
    let mut x = scenario.initial_state;
    for k in 0..=steps {
        let t = k as f64 * dt;
        let u = ctrl.update(params, &refs, &x, dt);
        traj.times.push(t);
        traj.states.push(x);
        traj.controls.push(u);
        if k == steps {
            break;
        }
        x = rk4_step(derivative, &x, &u, dt).map_err(|_| SimError::NonFiniteState { time: Some(t + dt) })?;
        if linear.is_none() {
            x.wrap_angles();
            if x[idx::THETA].abs() >= THETA_LIMIT {
                return Err(SimError::ThetaOutOfRange {
                    time: t + dt,
                    theta: x[idx::THETA],
                });
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn synthetic(f: impl Fn(f64) -> f64, duration: f64, dt: f64) -> Trajectory {
        let n = (duration / dt).round() as usize;
        let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
        let states = times
            .iter()
            .map(|&t| {
                let mut x = State12::zeros();
                x[idx::Z] = f(t);
                x
            })
            .collect();
        let controls = vec![ControlInput::zeros(); n + 1];
        Trajectory { times, states, controls }
    }

    #[test]
    fn rk4_zero_derivative() {
        let x = State12::from_array([1.5; 12]);
        let next = rk4_step(|_, _| State12::zeros(), &x, &ControlInput::zeros(), 0.1).unwrap();
        assert_eq!(next, x);
    }

    #[test]
    fn rk4_free_fall() {
        let p = QuadrotorParams::default();
        let mut x = State12::zeros();
        for _ in 0..1000 {
            x = rk4_step(|s, u| model::dynamics(s, u, &p), &x, &ControlInput::zeros(), 0.001).unwrap();
        }
        assert!((x[idx::Z] + 4.905).abs() < 1e-9);
    }

    #[test]
    fn rk4_exponential_decay() {
        let mut x = State12::zeros();
        x[0] = 1.0;
        let decay = |s: &State12, _: &ControlInput| {
            let mut d = State12::zeros();
            d[0] = -s[0];
            d
        };
        for _ in 0..100 {
            x = rk4_step(decay, &x, &ControlInput::zeros(), 0.01).unwrap();
        }
        assert!((x[0] - (-1f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn rk4_reports_non_finite() {
        let blow_up = |_: &State12, _: &ControlInput| State12::from_array([f64::INFINITY; 12]);
        assert_eq!(
            rk4_step(blow_up, &State12::zeros(), &ControlInput::zeros(), 0.1),
            Err(SimError::NonFiniteState { time: None })
        );
    }

    #[test]
    fn scenario_cases() {
        let none = ScenarioOverrides::default();
        let c1 = scenario_case(1, &none).unwrap();
        assert_eq!(c1.initial_state, State12::zeros());
        assert_eq!(c1.references.z, 1.0);
        let c2 = scenario_case(2, &none).unwrap();
        assert_eq!(c2.initial_state.to_array(), [1.0, 1.0, 0.2, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]);
        assert_eq!(c2.references, References::default());
        let c3 = scenario_case(3, &none).unwrap();
        assert!(c3.references.psi != 0.0);
        assert_eq!((c3.references.x, c3.references.y), (0.0, 0.0));
        assert_eq!((c3.duration, c3.dt, c3.plant_mode), (15.0, 1e-4, PlantMode::Nonlinear));
        assert_eq!(scenario_case(4, &none), Err(SimError::UnknownCase(4)));
    }

    #[test]
    fn scenario_overrides_and_validation() {
        let o = ScenarioOverrides {
            z_ref: Some(2.0),
            duration: Some(5.0),
            dt: Some(0.01),
            plant_mode: Some(PlantMode::Linear),
            ..Default::default()
        };
        let s = scenario_case(1, &o).unwrap();
        assert_eq!((s.references.z, s.duration, s.dt, s.plant_mode), (2.0, 5.0, 0.01, PlantMode::Linear));
        assert_eq!(s.steps(), 500);
        let bad = ScenarioOverrides { dt: Some(0.1), duration: Some(5.0), ..Default::default() };
        assert!(matches!(scenario_case(1, &bad), Err(SimError::InvalidScenario(_))));
    }

    #[test]
    fn channel_names_round_trip() {
        for c in Channel::ALL {
            assert_eq!(c.name().parse::<Channel>().unwrap(), c);
        }
        assert!(matches!("yaw".parse::<Channel>(), Err(SimError::ChannelUnknown(_))));
    }

    #[test]
    fn metrics_of_constant_signal() {
        let traj = synthetic(|_| 1.0, 10.0, 0.01);
        let m = compute_metrics(&traj, Channel::Z, 1.0, 0.02).unwrap();
        assert_eq!((m.overshoot, m.settling_time, m.overshoot_peak_count), (0.0, 0.0, 0));
        assert!(m.settled);
    }

    #[test]
    fn metrics_of_first_order_rise() {
        let dt = 1e-3;
        let traj = synthetic(|t| 1.0 - (-t).exp(), 25.0, dt);
        let m = compute_metrics(&traj, Channel::Z, 1.0, 0.02).unwrap();
        assert!((m.settling_time - 50f64.ln()).abs() <= dt, "{}", m.settling_time);
        // the tail mean sits a hair below the final samples
        assert!(m.overshoot < 1e-9);
        assert_eq!(m.overshoot_peak_count, 0);
    }

    #[test]
    fn metrics_of_damped_oscillation() {
        let y = |t: f64| 1.0 - (-t).exp() * ((3.0 * t).cos() + (3.0 * t).sin() / 3.0);
        let traj = synthetic(y, 20.0, 1e-3);
        let m = compute_metrics(&traj, Channel::Z, 1.0, 0.02).unwrap();
        // dense brute-force peak search
        let peak = (0..=200_000)
            .map(|i| y(i as f64 * 1e-5))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((m.overshoot - (peak - 1.0)).abs() < 1e-3, "{} vs {}", m.overshoot, peak - 1.0);
        assert!(m.overshoot_peak_count >= 1);
    }

    #[test]
    fn metrics_time_shift_invariant() {
        let y = |t: f64| 1.0 - (-t).exp() * (2.0 * t).cos();
        let base = synthetic(y, 10.0, 1e-3);
        let mut shifted = base.clone();
        for t in &mut shifted.times {
            *t += 3.25;
        }
        let a = compute_metrics(&base, Channel::Z, 1.0, 0.02).unwrap();
        let b = compute_metrics(&shifted, Channel::Z, 1.0, 0.02).unwrap();
        assert_eq!(a.overshoot, b.overshoot);
        assert_eq!(a.overshoot_peak_count, b.overshoot_peak_count);
        assert_relative_eq!(a.settling_time, b.settling_time, epsilon = 1e-9);
    }

    #[test]
    fn metrics_errors() {
        let traj = synthetic(|_| 0.0, 1.0, 0.01);
        assert_eq!(compute_metrics(&traj, Channel::Z, 0.0, 0.0), Err(SimError::InvalidBand(0.0)));
        assert_eq!(compute_metrics(&traj, Channel::Z, 0.0, 0.3), Err(SimError::InvalidBand(0.3)));
        assert!(matches!(
            compute_metrics_by_name(&traj, "altitude", 0.0, 0.02),
            Err(SimError::ChannelUnknown(_))
        ));
    }

    #[test]
    fn zero_gain_cascade_holds_hover() {
        let p = QuadrotorParams::default();
        let scenario = scenario_case(
            1,
            &ScenarioOverrides {
                z_ref: Some(0.0),
                duration: Some(2.0),
                ..Default::default()
            },
        )
        .unwrap();
        let traj = run_closed_loop(&scenario, &Controller::Pid(CascadeConfig::zero_gains()), &p).unwrap();
        assert_eq!(traj.len(), 20_001);
        for x in &traj.states {
            assert!(x.norm() < 1e-12);
        }
    }

    #[test]
    fn unstable_pid_hits_pitch_bound() {
        let p = QuadrotorParams::default();
        let mut config = CascadeConfig::default();
        config.pitch_inner.kp = -config.pitch_inner.kp;
        config.pitch_inner.kd = -config.pitch_inner.kd;
        let scenario = scenario_case(2, &ScenarioOverrides { duration: Some(5.0), ..Default::default() }).unwrap();
        let err = run_closed_loop(&scenario, &Controller::Pid(config), &p).unwrap_err();
        assert!(matches!(err, SimError::ThetaOutOfRange { .. }), "{err:?}");
    }

    #[test]
    fn lqr_linear_mode_is_deterministic() {
        let p = QuadrotorParams::default();
        let (lqr, _) = LqrController::design(&p, &LqrWeights::hover_default()).unwrap();
        let scenario = scenario_case(
            2,
            &ScenarioOverrides {
                duration: Some(1.0),
                plant_mode: Some(PlantMode::Linear),
                ..Default::default()
            },
        )
        .unwrap();
        let controller = Controller::Lqr(lqr);
        let a = run_closed_loop(&scenario, &controller, &p).unwrap();
        let b = run_closed_loop(&scenario, &controller, &p).unwrap();
        assert_eq!(a, b);
    }
}
