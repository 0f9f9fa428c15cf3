//! Hover linearization of the quadrotor plant.

use nalgebra::{DMatrix, SMatrix};

use crate::model::{self, idx, ControlInput, QuadrotorParams, State12, INPUT_DIM, STATE_DIM};

pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type InputMatrix = SMatrix<f64, STATE_DIM, INPUT_DIM>;
pub type OutputMatrix = SMatrix<f64, INPUT_DIM, STATE_DIM>;
pub type FeedthroughMatrix = SMatrix<f64, INPUT_DIM, INPUT_DIM>;

/// Output channels selected by `C`: `[z, phi, theta, psi]`.
pub const OUTPUT_STATES: [usize; 4] = [idx::Z, idx::PHI, idx::THETA, idx::PSI];

/// Relative singular-value cutoff for the controllability rank test.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// `x_dot = A x + B du`, `y = C x + D du`, with `du` the input deviation
/// from hover thrust.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: StateMatrix,
    pub b: InputMatrix,
    pub c: OutputMatrix,
    pub d: FeedthroughMatrix,
}

impl StateSpace {
    pub fn output(&self, x: &State12, du: &ControlInput) -> nalgebra::Vector4<f64> {
        self.c * x.0 + self.d * du.0
    }

    /// `[B, AB, ..., A^{n-1}B]`.
    pub fn controllability_matrix(&self) -> DMatrix<f64> {
        controllability_matrix(
            &DMatrix::from_column_slice(STATE_DIM, STATE_DIM, self.a.as_slice()),
            &DMatrix::from_column_slice(STATE_DIM, INPUT_DIM, self.b.as_slice()),
        )
    }

    pub fn is_controllable(&self) -> bool {
        numerical_rank(&self.controllability_matrix(), RANK_TOLERANCE) == STATE_DIM
    }

    pub fn a_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(STATE_DIM, STATE_DIM, self.a.as_slice())
    }

    pub fn b_dyn(&self) -> DMatrix<f64> {
        DMatrix::from_column_slice(STATE_DIM, INPUT_DIM, self.b.as_slice())
    }
}

/// Analytic Jacobians of the nonlinear plant at hover.
pub fn hover_jacobians(params: &QuadrotorParams) -> StateSpace {
    let mut a = StateMatrix::zeros();
    for i in 0..6 {
        a[(i, i + 6)] = 1.0;
    }
    // thrust/m = g at hover
    a[(idx::X_DOT, idx::THETA)] = params.gravity;
    a[(idx::Y_DOT, idx::PHI)] = -params.gravity;

    let mut b = InputMatrix::zeros();
    b[(idx::Z_DOT, 0)] = 1.0 / params.mass;
    b[(idx::P, 1)] = 1.0 / params.inertia_xx;
    b[(idx::Q, 2)] = 1.0 / params.inertia_yy;
    b[(idx::R, 3)] = 1.0 / params.inertia_zz;

    let mut c = OutputMatrix::zeros();
    for (row, &col) in OUTPUT_STATES.iter().enumerate() {
        c[(row, col)] = 1.0;
    }

    StateSpace {
        a,
        b,
        c,
        d: FeedthroughMatrix::zeros(),
    }
}

/// Central-difference Jacobians of [`model::dynamics`] at `(state0, u0)`.
pub fn numeric_jacobians(
    params: &QuadrotorParams,
    state0: &State12,
    u0: &ControlInput,
    eps: f64,
) -> (StateMatrix, InputMatrix) {
    assert!(eps > 0.0, "finite-difference step must be positive");
    let mut a = StateMatrix::zeros();
    for j in 0..STATE_DIM {
        let (mut plus, mut minus) = (*state0, *state0);
        plus[j] += eps;
        minus[j] -= eps;
        let diff = (model::dynamics(&plus, u0, params).0 - model::dynamics(&minus, u0, params).0)
            / (2.0 * eps);
        a.set_column(j, &diff);
    }
    let mut b = InputMatrix::zeros();
    for j in 0..INPUT_DIM {
        let (mut plus, mut minus) = (*u0, *u0);
        plus.0[j] += eps;
        minus.0[j] -= eps;
        let diff = (model::dynamics(state0, &plus, params).0
            - model::dynamics(state0, &minus, params).0)
            / (2.0 * eps);
        b.set_column(j, &diff);
    }
    (a, b)
}

pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        out.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * &block;
    }
    out
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = m.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Controllability test with the default relative cutoff.
pub fn is_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    numerical_rank(&controllability_matrix(a, b), RANK_TOLERANCE) == a.nrows()
}
