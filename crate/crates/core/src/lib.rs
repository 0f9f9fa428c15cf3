//! Quadrotor flight-control toolkit.
//!
//! The crate is split along the control pipeline:
//!
//! - [`model`]: nonlinear rigid-body plant, rotor mixer and hover trim.
//! - [`linearize`]: hover state-space model, analytic and finite-difference.
//! - [`lyapunov`]: Bartels–Stewart Sylvester/Lyapunov solver.
//! - [`riccati`]: continuous algebraic Riccati equation and LQR gains.
//! - [`pid`]: discrete PID and the 1-2-2-1 cascaded attitude/position loop.
//! - [`sim`]: fixed-step RK4 closed-loop simulation, test scenarios and
//!   step-response metrics.
//! - [`config`] and [`cli`]: JSON configuration and the command layer behind
//!   the `quadctl` binary.

pub mod cli;
pub mod config;
pub mod linearize;
pub mod lyapunov;
pub mod model;
pub mod pid;
pub mod riccati;
pub mod sim;

pub use linearize::StateSpace;
pub use model::{ControlInput, QuadrotorParams, RotorSpeeds, State12};
pub use riccati::{CareSolution, GainMatrix, LqrWeights};
