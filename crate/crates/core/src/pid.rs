//! Discrete PID and the cascaded position/attitude controller.
//!
//! Six loops in a 1-2-2-1 arrangement: altitude drives thrust; lateral
//! position errors drive outer loops that produce roll and pitch setpoints
//! for fast inner attitude loops; heading drives yaw torque. Errors are
//! always `setpoint - measurement`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{idx, wrap_to_pi, ControlInput, QuadrotorParams, State12};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PidError {
    #[error("integral time must be non-zero")]
    ZeroIntegralTime,
    #[error("invalid cascade setting {name}: {reason}")]
    InvalidConfig { name: &'static str, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    pub fn is_finite(&self) -> bool {
        self.kp.is_finite() && self.ki.is_finite() && self.kd.is_finite()
    }
}

/// Parallel gains from proportional gain and integral/derivative times:
/// `ki = kp / ti`, `kd = kp * td`.
pub fn gains_from_time_constants(kp: f64, ti: f64, td: f64) -> Result<PidGains, PidError> {
    if ti == 0.0 {
        return Err(PidError::ZeroIntegralTime);
    }
    Ok(PidGains::new(kp, kp / ti, kp * td))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PidState {
    pub integral: f64,
    pub previous_error: f64,
    /// Set once a previous error exists; the derivative is zero before that.
    pub initialized: bool,
}

impl PidState {
    /// State of a loop that has already been observing `error`.
    pub fn primed(error: f64) -> Self {
        Self {
            integral: 0.0,
            previous_error: error,
            initialized: true,
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }
}

/// One controller update: rectangle-rule integral and backward-difference
/// derivative on the error.
pub fn pid_step(gains: &PidGains, state: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    pid_step_clamped(gains, state, error, dt, None)
}

/// [`pid_step`] with the integral accumulator limited to `±limit`.
pub fn pid_step_clamped(
    gains: &PidGains,
    state: &PidState,
    error: f64,
    dt: f64,
    limit: Option<f64>,
) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    // without integral action the accumulator is left untouched
    let mut integral = if gains.ki == 0.0 {
        state.integral
    } else {
        state.integral + error * dt
    };
    if let Some(limit) = limit {
        integral = integral.clamp(-limit, limit);
    }
    let derivative = if state.initialized {
        (error - state.previous_error) / dt
    } else {
        0.0
    };
    let output = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    (
        output,
        PidState {
            integral,
            previous_error: error,
            initialized: true,
        },
    )
}

/// Gains and structure of the cascaded controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CascadeConfig {
    pub thrust: PidGains,
    pub roll_inner: PidGains,
    pub roll_outer: PidGains,
    pub pitch_inner: PidGains,
    pub pitch_outer: PidGains,
    pub yaw: PidGains,
    /// Inner steps per outer-loop update.
    pub outer_decimation: u32,
    /// Adds `m g` to the thrust command.
    pub gravity_feedforward: bool,
    /// Clamp on the roll/pitch setpoints produced by the outer loops, rad.
    pub angle_limit: f64,
    /// Optional bound on every integral accumulator.
    pub integral_clamp: Option<f64>,
}

impl Default for CascadeConfig {
    fn default() -> Self {
        let attitude_inner = PidGains::new(4.04, 10.03, 0.33);
        let attitude_outer = PidGains::new(-2.92, -0.032, -4.68);
        Self {
            thrust: PidGains::new(9.09, 1.94, 10.41),
            roll_inner: attitude_inner,
            roll_outer: attitude_outer,
            pitch_inner: attitude_inner,
            pitch_outer: attitude_outer,
            yaw: PidGains::new(1.3e-2, 7.6e-4, 4.9e-2),
            outer_decimation: 10,
            gravity_feedforward: true,
            angle_limit: 0.5,
            integral_clamp: None,
        }
    }
}

impl CascadeConfig {
    /// Every gain set to zero, structure unchanged.
    pub fn zero_gains() -> Self {
        let zero = PidGains::default();
        Self {
            thrust: zero,
            roll_inner: zero,
            roll_outer: zero,
            pitch_inner: zero,
            pitch_outer: zero,
            yaw: zero,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PidError> {
        let loops = [
            ("thrust", self.thrust),
            ("roll_inner", self.roll_inner),
            ("roll_outer", self.roll_outer),
            ("pitch_inner", self.pitch_inner),
            ("pitch_outer", self.pitch_outer),
            ("yaw", self.yaw),
        ];
        for (name, gains) in loops {
            if !gains.is_finite() {
                return Err(PidError::InvalidConfig {
                    name,
                    reason: "gains must be finite".into(),
                });
            }
        }
        if self.outer_decimation < 1 {
            return Err(PidError::InvalidConfig {
                name: "outer_decimation",
                reason: "must be >= 1".into(),
            });
        }
        if !(self.angle_limit > 0.0 && self.angle_limit.is_finite()) {
            return Err(PidError::InvalidConfig {
                name: "angle_limit",
                reason: format!("must be finite and > 0, got {}", self.angle_limit),
            });
        }
        if let Some(limit) = self.integral_clamp {
            if !(limit > 0.0) {
                return Err(PidError::InvalidConfig {
                    name: "integral_clamp",
                    reason: format!("must be > 0, got {limit}"),
                });
            }
        }
        Ok(())
    }
}

/// Setpoints tracked by the cascade.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct References {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub psi: f64,
}

/// Controller memory threaded through [`cascade_step`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CascadeMemory {
    pub thrust: PidState,
    pub roll_inner: PidState,
    pub roll_outer: PidState,
    pub pitch_inner: PidState,
    pub pitch_outer: PidState,
    pub yaw: PidState,
    /// Roll and pitch setpoints held between outer updates.
    pub phi_ref: f64,
    pub theta_ref: f64,
    pub steps: u64,
}

/// Position error rotated into the heading frame: `(forward, lateral)`.
fn heading_frame_error(state: &State12, refs: &References) -> (f64, f64) {
    let ex = refs.x - state[idx::X];
    let ey = refs.y - state[idx::Y];
    let (s, c) = state[idx::PSI].sin_cos();
    (c * ex + s * ey, -s * ex + c * ey)
}

impl CascadeMemory {
    /// Memory of a controller that has been holding `state` against zero
    /// setpoints. Stepping it with non-zero references then behaves as a
    /// setpoint step at t = 0, so derivative terms see the jump.
    pub fn primed(state: &State12) -> Self {
        let rest = References::default();
        let (forward, lateral) = heading_frame_error(state, &rest);
        Self {
            thrust: PidState::primed(-state[idx::Z]),
            roll_inner: PidState::primed(-state[idx::PHI]),
            roll_outer: PidState::primed(lateral),
            pitch_inner: PidState::primed(-state[idx::THETA]),
            pitch_outer: PidState::primed(forward),
            yaw: PidState::primed(wrap_to_pi(-state[idx::PSI])),
            phi_ref: 0.0,
            theta_ref: 0.0,
            steps: 0,
        }
    }
}

/// Clears every loop; equivalent to a freshly constructed memory.
pub fn cascade_reset(_memory: &CascadeMemory) -> CascadeMemory {
    CascadeMemory::default()
}

/// One update of the cascaded controller.
///
/// Outer loops run every `outer_decimation` calls with period
/// `outer_decimation * dt`. The pitch setpoint takes the negated outer
/// output because forward acceleration follows `+g theta` while lateral
/// acceleration follows `-g phi`; both outer loops share the sign convention
/// of their (negative) gains.
pub fn cascade_step(
    config: &CascadeConfig,
    params: &QuadrotorParams,
    state: &State12,
    refs: &References,
    memory: &CascadeMemory,
    dt: f64,
) -> (ControlInput, CascadeMemory) {
    let clamp = config.integral_clamp;
    let mut next = *memory;

    let decimation = u64::from(config.outer_decimation.max(1));
    if memory.steps.is_multiple_of(decimation) {
        let outer_dt = dt * decimation as f64;
        let (forward, lateral) = heading_frame_error(state, refs);
        let (roll_cmd, roll_outer) =
            pid_step_clamped(&config.roll_outer, &memory.roll_outer, lateral, outer_dt, clamp);
        let (pitch_cmd, pitch_outer) =
            pid_step_clamped(&config.pitch_outer, &memory.pitch_outer, forward, outer_dt, clamp);
        next.roll_outer = roll_outer;
        next.pitch_outer = pitch_outer;
        next.phi_ref = roll_cmd.clamp(-config.angle_limit, config.angle_limit);
        next.theta_ref = (-pitch_cmd).clamp(-config.angle_limit, config.angle_limit);
    }

    let (thrust_cmd, thrust) =
        pid_step_clamped(&config.thrust, &memory.thrust, refs.z - state[idx::Z], dt, clamp);
    let (roll_torque, roll_inner) = pid_step_clamped(
        &config.roll_inner,
        &memory.roll_inner,
        next.phi_ref - state[idx::PHI],
        dt,
        clamp,
    );
    let (pitch_torque, pitch_inner) = pid_step_clamped(
        &config.pitch_inner,
        &memory.pitch_inner,
        next.theta_ref - state[idx::THETA],
        dt,
        clamp,
    );
    let (yaw_torque, yaw) = pid_step_clamped(
        &config.yaw,
        &memory.yaw,
        wrap_to_pi(refs.psi - state[idx::PSI]),
        dt,
        clamp,
    );

    next.thrust = thrust;
    next.roll_inner = roll_inner;
    next.pitch_inner = pitch_inner;
    next.yaw = yaw;
    next.steps = memory.steps + 1;

    let feedforward = if config.gravity_feedforward {
        params.hover_thrust()
    } else {
        0.0
    };
    (
        ControlInput::new(feedforward + thrust_cmd, roll_torque, pitch_torque, yaw_torque),
        next,
    )
}
