//! Nonlinear quadrotor plant, rotor mixing and hover trim.
//!
//! The state is the 12-vector `[x, y, z, phi, theta, psi, x_dot, y_dot,
//! z_dot, p, q, r]` expressed in the inertial frame for translation and as
//! Z-Y-X Euler angles plus body rates for attitude. Angle rates are taken
//! equal to body rates (`phi_dot = p`, `theta_dot = q`, `psi_dot = r`),
//! which is exact at hover and matches the linear model.

use std::f64::consts::PI;
use std::ops::{Index, IndexMut};

use nalgebra::{SVector, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of state components.
pub const STATE_DIM: usize = 12;
/// Number of generalized inputs.
pub const INPUT_DIM: usize = 4;

/// Standard gravity used when a parameter set does not override it.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Index of each state component inside [`State12`].
pub mod idx {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const Z: usize = 2;
    pub const PHI: usize = 3;
    pub const THETA: usize = 4;
    pub const PSI: usize = 5;
    pub const X_DOT: usize = 6;
    pub const Y_DOT: usize = 7;
    pub const Z_DOT: usize = 8;
    pub const P: usize = 9;
    pub const Q: usize = 10;
    pub const R: usize = 11;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    /// The commanded inputs need a negative squared rotor speed.
    #[error("infeasible mix: rotor {rotor} would need omega^2 = {omega_sq:.6e}")]
    InfeasibleMix { rotor: usize, omega_sq: f64 },
    #[error("invalid parameter {name} = {value}: {constraint}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        constraint: &'static str,
    },
}

/// Physical constants of the airframe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrotorParams {
    /// kg
    pub mass: f64,
    /// m, rotor hub to centre of mass
    pub arm_length: f64,
    /// N s^2/rad^2
    pub thrust_factor: f64,
    /// N m s^2/rad^2
    pub drag_factor: f64,
    /// kg m^2
    pub inertia_xx: f64,
    pub inertia_yy: f64,
    pub inertia_zz: f64,
    /// kg m^2, zero disables gyroscopic coupling
    pub rotor_inertia: f64,
    /// m/s^2
    pub gravity: f64,
    /// Convention used to recover rotor speeds for the gyroscopic term.
    pub mixer: Mixer,
}

impl Default for QuadrotorParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            arm_length: 0.225,
            thrust_factor: 9.8e-6,
            drag_factor: 1.6e-7,
            inertia_xx: 0.0035,
            inertia_yy: 0.0035,
            inertia_zz: 0.005,
            rotor_inertia: 0.0,
            gravity: STANDARD_GRAVITY,
            mixer: Mixer::default(),
        }
    }
}

impl QuadrotorParams {
    /// Checks positivity of every field (rotor inertia may be zero).
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("mass", self.mass),
            ("arm_length", self.arm_length),
            ("thrust_factor", self.thrust_factor),
            ("drag_factor", self.drag_factor),
            ("inertia_xx", self.inertia_xx),
            ("inertia_yy", self.inertia_yy),
            ("inertia_zz", self.inertia_zz),
            ("gravity", self.gravity),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParameter {
                    name,
                    value,
                    constraint: "must be finite and > 0",
                });
            }
        }
        if !(self.rotor_inertia.is_finite() && self.rotor_inertia >= 0.0) {
            return Err(ModelError::InvalidParameter {
                name: "rotor_inertia",
                value: self.rotor_inertia,
                constraint: "must be finite and >= 0",
            });
        }
        Ok(())
    }

    /// Thrust that balances gravity.
    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }
}

/// The 12-component state vector.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State12(pub SVector<f64, STATE_DIM>);

impl State12 {
    pub fn zeros() -> Self {
        Self(SVector::zeros())
    }

    pub fn from_array(values: [f64; STATE_DIM]) -> Self {
        Self(SVector::from(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn to_array(&self) -> [f64; STATE_DIM] {
        self.0.into()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Wraps roll and yaw into `[-pi, pi)`. Pitch is left alone; callers
    /// treat a pitch at the singular bound as an error instead.
    pub fn wrap_angles(&mut self) {
        self.0[idx::PHI] = wrap_to_pi(self.0[idx::PHI]);
        self.0[idx::PSI] = wrap_to_pi(self.0[idx::PSI]);
    }
}

impl Index<usize> for State12 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for State12 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Maps an angle into `[-pi, pi)`.
pub fn wrap_to_pi(angle: f64) -> f64 {
    if (-PI..PI).contains(&angle) {
        return angle;
    }
    (angle + PI).rem_euclid(2.0 * PI) - PI
}

/// Generalized inputs: total thrust `u1` (N) and body torques `u2..u4` (N m).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlInput(pub Vector4<f64>);

impl ControlInput {
    pub fn new(thrust: f64, roll_torque: f64, pitch_torque: f64, yaw_torque: f64) -> Self {
        Self(Vector4::new(thrust, roll_torque, pitch_torque, yaw_torque))
    }

    pub fn zeros() -> Self {
        Self(Vector4::zeros())
    }

    pub fn thrust(&self) -> f64 {
        self.0[0]
    }

    pub fn roll_torque(&self) -> f64 {
        self.0[1]
    }

    pub fn pitch_torque(&self) -> f64 {
        self.0[2]
    }

    pub fn yaw_torque(&self) -> f64 {
        self.0[3]
    }

    pub fn to_array(&self) -> [f64; INPUT_DIM] {
        self.0.into()
    }
}

/// Rotor angular speeds in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RotorSpeeds(pub [f64; 4]);

impl RotorSpeeds {
    /// Signed sum `omega1 - omega2 + omega3 - omega4` driving gyroscopic
    /// coupling.
    pub fn residual(&self) -> f64 {
        let [w1, w2, w3, w4] = self.0;
        w1 - w2 + w3 - w4
    }
}

/// Rotor-speed to generalized-input map.
///
/// `include_arm_length = true` scales the roll and pitch rows by the arm
/// length so they carry torque units; `false` gives the bare thrust-factor
/// differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mixer {
    pub include_arm_length: bool,
}

impl Default for Mixer {
    fn default() -> Self {
        Self {
            include_arm_length: true,
        }
    }
}

impl Mixer {
    fn torque_scale(&self, params: &QuadrotorParams) -> f64 {
        if self.include_arm_length {
            params.arm_length * params.thrust_factor
        } else {
            params.thrust_factor
        }
    }

    pub fn mix(&self, omega: &RotorSpeeds, params: &QuadrotorParams) -> ControlInput {
        let [s1, s2, s3, s4] = omega.0.map(|w| w * w);
        let kf = params.thrust_factor;
        let lk = self.torque_scale(params);
        ControlInput::new(
            kf * (s1 + s2 + s3 + s4),
            lk * (s4 - s2),
            lk * (s1 - s3),
            params.drag_factor * (s1 - s2 + s3 - s4),
        )
    }

    /// Squared rotor speeds solving the mixer equations, plus the magnitude
    /// of the scaled inputs for rounding tolerances.
    fn squared_speeds(&self, u: &ControlInput, params: &QuadrotorParams) -> ([f64; 4], f64) {
        let total = u.thrust() / params.thrust_factor;
        let lk = self.torque_scale(params);
        let roll = u.roll_torque() / lk;
        let pitch = u.pitch_torque() / lk;
        let yaw = u.yaw_torque() / params.drag_factor;

        // s1 + s3 = (total + yaw)/2, s2 + s4 = (total - yaw)/2
        let odd = 0.5 * (total + yaw);
        let even = 0.5 * (total - yaw);
        let squares = [
            0.5 * (odd + pitch),
            0.5 * (even - roll),
            0.5 * (odd - pitch),
            0.5 * (even + roll),
        ];
        let scale = [total, roll, pitch, yaw]
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()));
        (squares, scale)
    }

    /// Inverts [`Mixer::mix`]. Squared speeds that come out negative only by
    /// rounding are clamped to zero.
    pub fn unmix(&self, u: &ControlInput, params: &QuadrotorParams) -> Result<RotorSpeeds, ModelError> {
        let (squares, scale) = self.squared_speeds(u, params);
        let floor = -1e-12 * scale;
        let mut speeds = [0.0; 4];
        for (i, &s) in squares.iter().enumerate() {
            if s < floor || !s.is_finite() {
                return Err(ModelError::InfeasibleMix {
                    rotor: i + 1,
                    omega_sq: s,
                });
            }
            speeds[i] = s.max(0.0).sqrt();
        }
        Ok(RotorSpeeds(speeds))
    }
}

/// Mixes rotor speeds into generalized inputs with the default convention
/// (arm length included in the roll and pitch torques).
pub fn rotor_mix(omega: &RotorSpeeds, params: &QuadrotorParams) -> ControlInput {
    Mixer::default().mix(omega, params)
}

/// Inverse of [`rotor_mix`].
pub fn rotor_unmix(u: &ControlInput, params: &QuadrotorParams) -> Result<RotorSpeeds, ModelError> {
    Mixer::default().unmix(u, params)
}

/// Time derivative of the state under the nonlinear rigid-body equations.
pub fn dynamics(state: &State12, u: &ControlInput, params: &QuadrotorParams) -> State12 {
    let s = &state.0;
    let (phi, theta, psi) = (s[idx::PHI], s[idx::THETA], s[idx::PSI]);
    let (p, q, r) = (s[idx::P], s[idx::Q], s[idx::R]);
    let (sphi, cphi) = phi.sin_cos();
    let (stheta, ctheta) = theta.sin_cos();
    let (spsi, cpsi) = psi.sin_cos();

    let accel = u.thrust() / params.mass;
    let (ixx, iyy, izz) = (params.inertia_xx, params.inertia_yy, params.inertia_zz);

    let rotor_residual = if params.rotor_inertia > 0.0 {
        gyroscopic_residual(u, params)
    } else {
        0.0
    };
    let jr = params.rotor_inertia;

    let mut d = SVector::<f64, STATE_DIM>::zeros();
    d[idx::X] = s[idx::X_DOT];
    d[idx::Y] = s[idx::Y_DOT];
    d[idx::Z] = s[idx::Z_DOT];
    d[idx::PHI] = p;
    d[idx::THETA] = q;
    d[idx::PSI] = r;
    d[idx::X_DOT] = (cphi * stheta * cpsi + sphi * spsi) * accel;
    d[idx::Y_DOT] = (cphi * stheta * spsi - sphi * cpsi) * accel;
    d[idx::Z_DOT] = -params.gravity + cphi * ctheta * accel;
    d[idx::P] = (iyy - izz) / ixx * q * r - jr / ixx * q * rotor_residual + u.roll_torque() / ixx;
    d[idx::Q] = (izz - ixx) / iyy * p * r - jr / iyy * p * rotor_residual + u.pitch_torque() / iyy;
    d[idx::R] = (ixx - iyy) / izz * p * q + u.yaw_torque() / izz;
    State12(d)
}

/// Residual rotor speed recovered from the inputs. Negative squared speeds
/// (inputs outside the mixer's range) are clamped to zero.
fn gyroscopic_residual(u: &ControlInput, params: &QuadrotorParams) -> f64 {
    let (squares, _) = params.mixer.squared_speeds(u, params);
    RotorSpeeds(squares.map(|s| s.max(0.0).sqrt())).residual()
}

/// Hover trim: zero state, thrust `m g`, equal rotor speeds.
pub fn hover_equilibrium(params: &QuadrotorParams) -> (State12, ControlInput, RotorSpeeds) {
    let thrust = params.hover_thrust();
    let omega = (thrust / (4.0 * params.thrust_factor)).sqrt();
    (
        State12::zeros(),
        ControlInput::new(thrust, 0.0, 0.0, 0.0),
        RotorSpeeds([omega; 4]),
    )
}
