//! Continuous algebraic Riccati equation and LQR gains.
//!
//! Solves `A^T S + S A - S B R^{-1} B^T S + Q = 0` for the stabilizing
//! solution by Kleinman–Newton iteration. Each Newton step is a Lyapunov
//! solve on the current closed loop; the first stabilizing gain comes from
//! Bass's shifted-Lyapunov construction. An independent route through the
//! matrix sign function of the Hamiltonian is kept for cross-checks.

use nalgebra::{DMatrix, DVector, SMatrix};
use thiserror::Error;

use crate::linearize;
use crate::lyapunov::{self, LyapunovError};
use crate::model::{ControlInput, State12, INPUT_DIM, STATE_DIM};
use crate::sim::Trajectory;

/// Default state weight, in state order
/// `[x, y, z, phi, theta, psi, x_dot, y_dot, z_dot, p, q, r]`.
pub const DEFAULT_Q_DIAGONAL: [f64; STATE_DIM] = [
    500.0, 200.0, 1.71, 2000.0, 2000.0, 10.0, 200.0, 200.0, 1.5, 0.25, 0.25, 1.0,
];
/// Default input weight, `[thrust, roll, pitch, yaw]`.
pub const DEFAULT_R_DIAGONAL: [f64; INPUT_DIM] = [1.0, 0.001, 0.001, 0.001];

/// Relative ARE tolerance: residual is accepted below `REL_TOL * ||Q||_F`.
pub const DEFAULT_RELATIVE_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiccatiError {
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("(A, B) is not stabilizable: controllability rank test failed")]
    NotStabilizable,
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("grid mismatch: {times} times, {states} states, {controls} controls")]
    GridMismatch {
        times: usize,
        states: usize,
        controls: usize,
    },
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
}

/// Quadratic weights of the LQR cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrWeights {
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
}

impl LqrWeights {
    /// Checks symmetry, `R > 0` and `Q >= 0` (to -1e-12).
    pub fn new(q: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self, RiccatiError> {
        if !q.is_square() || !r.is_square() {
            return Err(RiccatiError::InvalidWeights("Q and R must be square".into()));
        }
        if q.iter().chain(r.iter()).any(|v| !v.is_finite()) {
            return Err(RiccatiError::InvalidWeights("non-finite entry".into()));
        }
        let sym_tol = |m: &DMatrix<f64>| 1e-12 * m.amax().max(1.0);
        if (&q - q.transpose()).amax() > sym_tol(&q) {
            return Err(RiccatiError::InvalidWeights("Q is not symmetric".into()));
        }
        if (&r - r.transpose()).amax() > sym_tol(&r) {
            return Err(RiccatiError::InvalidWeights("R is not symmetric".into()));
        }
        let r_min = r.symmetric_eigenvalues().min();
        if !(r_min > 0.0) {
            return Err(RiccatiError::InvalidWeights(format!(
                "R must be positive definite (min eigenvalue {r_min:e})"
            )));
        }
        if q.nrows() > 0 {
            let q_min = q.symmetric_eigenvalues().min();
            if q_min < -1e-12 {
                return Err(RiccatiError::InvalidWeights(format!(
                    "Q must be positive semidefinite (min eigenvalue {q_min:e})"
                )));
            }
        }
        Ok(Self { q, r })
    }

    pub fn from_diagonals(q: &[f64], r: &[f64]) -> Result<Self, RiccatiError> {
        Self::new(
            DMatrix::from_diagonal(&DVector::from_column_slice(q)),
            DMatrix::from_diagonal(&DVector::from_column_slice(r)),
        )
    }

    /// Weights used for the hover model unless configured otherwise.
    pub fn hover_default() -> Self {
        Self::from_diagonals(&DEFAULT_Q_DIAGONAL, &DEFAULT_R_DIAGONAL)
            .expect("default weights are valid")
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, RiccatiError> {
        Self::new(&self.q * factor, &self.r * factor)
    }

    /// `1e-9 * ||Q||_F`, floored at the smallest positive double so that
    /// `Q = 0` still yields a valid tolerance.
    pub fn default_tolerance(&self) -> f64 {
        (DEFAULT_RELATIVE_TOLERANCE * self.q.norm()).max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CareMethod {
    KleinmanNewton,
    /// Matrix sign function of the Hamiltonian; used as a cross-check.
    HamiltonianSign,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub s: DMatrix<f64>,
    /// Frobenius norm of the ARE residual at `s`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: CareMethod,
}

/// Full-state feedback gain, `m x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub k: DMatrix<f64>,
}

impl GainMatrix {
    pub fn zeros(inputs: usize, states: usize) -> Self {
        Self {
            k: DMatrix::zeros(inputs, states),
        }
    }

    /// The gain as a fixed 4x12 matrix, if it has that shape.
    pub fn to_hover_gain(&self) -> Option<SMatrix<f64, INPUT_DIM, STATE_DIM>> {
        (self.k.shape() == (INPUT_DIM, STATE_DIM))
            .then(|| SMatrix::from_column_slice(self.k.as_slice()))
    }

    /// Largest real part of the eigenvalues of `A - B K`.
    pub fn closed_loop_abscissa(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        spectral_abscissa(&(a - b * &self.k))
    }
}

/// Largest real part over the spectrum of `m`.
pub fn spectral_abscissa(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `A^T S + S A - S B R^{-1} B^T S + Q`.
pub fn care_residual(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &LqrWeights, s: &DMatrix<f64>) -> DMatrix<f64> {
    let r_inv_bt_s = solve_r(&weights.r, &(b.transpose() * s));
    a.transpose() * s + s * a - s * b * r_inv_bt_s + &weights.q
}

/// `R^{-1} M` through a Cholesky factor of the (validated) `R`.
fn solve_r(r: &DMatrix<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    r.clone()
        .cholesky()
        .expect("R was validated positive definite")
        .solve(m)
}

fn check_dimensions(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &LqrWeights) -> Result<(), RiccatiError> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(RiccatiError::Dimension("A must be square".into()));
    }
    if b.nrows() != n {
        return Err(RiccatiError::Dimension(format!("B has {} rows, A has {n}", b.nrows())));
    }
    if weights.q.nrows() != n {
        return Err(RiccatiError::Dimension(format!("Q is {0}x{0}, expected {n}x{n}", weights.q.nrows())));
    }
    if weights.r.nrows() != b.ncols() {
        return Err(RiccatiError::Dimension(format!(
            "R is {0}x{0}, expected {1}x{1}",
            weights.r.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// Stabilizing gain from Bass's construction: with `beta` beyond the
/// spectrum of `-A`, solve `(A + beta I) P + P (A + beta I)^T = 2 B B^T` and
/// take `K = B^T P^{-1}`. The closed loop `A - B K` then has every eigenvalue
/// at real part `-beta`.
fn initial_gain(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>, RiccatiError> {
    let n = a.nrows();
    if spectral_abscissa(a) < 0.0 {
        return Ok(DMatrix::zeros(b.ncols(), n));
    }
    let mut beta = a.norm().max(1.0);
    let rhs = b * b.transpose() * 2.0;
    for _ in 0..8 {
        let shifted = a + DMatrix::identity(n, n) * beta;
        let p = lyapunov::solve_lyapunov(&shifted, &rhs)?;
        if let Some(chol) = p.cholesky() {
            let k = chol.solve(b).transpose();
            if spectral_abscissa(&(a - b * &k)) < 0.0 {
                return Ok(k);
            }
        }
        beta *= 2.0;
    }
    Err(RiccatiError::NotStabilizable)
}

/// Solves the CARE with Kleinman–Newton iteration.
///
/// `tol` is an absolute bound on the Frobenius residual; see
/// [`LqrWeights::default_tolerance`] for the usual choice.
pub fn solve_care(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    weights: &LqrWeights,
    tol: f64,
    max_iter: usize,
) -> Result<CareSolution, RiccatiError> {
    check_dimensions(a, b, weights)?;
    if !(tol > 0.0) {
        return Err(RiccatiError::InvalidTolerance(tol));
    }
    if !linearize::is_controllable(a, b) {
        return Err(RiccatiError::NotStabilizable);
    }
    let n = a.nrows();
    if weights.q.iter().all(|&v| v == 0.0) {
        // S = 0 satisfies the equation exactly and is the PSD solution.
        return Ok(CareSolution {
            s: DMatrix::zeros(n, n),
            residual_norm: 0.0,
            iterations: 0,
            method: CareMethod::KleinmanNewton,
        });
    }

    let mut k = initial_gain(a, b)?;
    let mut residual = f64::INFINITY;
    let mut prev_residual = f64::INFINITY;
    let mut stalled = 0;
    for iteration in 1..=max_iter {
        let closed = a - b * &k;
        let rhs = -(&weights.q + k.transpose() * &weights.r * &k);
        let s = lyapunov::solve_lyapunov(&closed.transpose(), &rhs)?;
        k = solve_r(&weights.r, &(b.transpose() * &s));
        residual = care_residual(a, b, weights, &s).norm();
        if residual <= tol {
            return Ok(CareSolution {
                s,
                residual_norm: residual,
                iterations: iteration,
                method: CareMethod::KleinmanNewton,
            });
        }
        // Newton has hit its rounding floor once the residual stops
        // shrinking for a few consecutive steps.
        if residual >= 0.5 * prev_residual {
            stalled += 1;
            if stalled >= 3 {
                return Err(RiccatiError::NoConvergence {
                    iterations: iteration,
                    residual,
                });
            }
        } else {
            stalled = 0;
        }
        prev_residual = residual;
    }
    Err(RiccatiError::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Solves the CARE through the matrix sign function of the Hamiltonian
/// `H = [[A, -B R^{-1} B^T], [-Q, -A^T]]`.
///
/// `sign(H)` maps the stable invariant subspace `span [I; S]` to its
/// negative, so `S` is the least-squares solution of
/// `[W12; W22 + I] S = -[W11 + I; W21]`.
pub fn solve_care_hamiltonian(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    weights: &LqrWeights,
    tol: f64,
    max_iter: usize,
) -> Result<CareSolution, RiccatiError> {
    check_dimensions(a, b, weights)?;
    if !(tol > 0.0) {
        return Err(RiccatiError::InvalidTolerance(tol));
    }
    if !linearize::is_controllable(a, b) {
        return Err(RiccatiError::NotStabilizable);
    }
    let n = a.nrows();
    let g = b * solve_r(&weights.r, &b.transpose());
    let mut h = DMatrix::zeros(2 * n, 2 * n);
    h.view_mut((0, 0), (n, n)).copy_from(a);
    h.view_mut((0, n), (n, n)).copy_from(&(-&g));
    h.view_mut((n, 0), (n, n)).copy_from(&(-&weights.q));
    h.view_mut((n, n), (n, n)).copy_from(&(-a.transpose()));

    let dim = 2 * n;
    let mut z = h;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let lu = z.clone().lu();
        let u = lu.u();
        let log_det: f64 = (0..dim).map(|i| u[(i, i)].abs().ln()).sum();
        if !log_det.is_finite() {
            return Err(RiccatiError::NotStabilizable);
        }
        let c = (-log_det / dim as f64).exp();
        let inv = lu.try_inverse().ok_or(RiccatiError::NotStabilizable)?;
        let next = (&z * c + inv / c) * 0.5;
        let change = (&next - &z).norm();
        z = next;
        if change <= 1e-13 * z.norm() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(RiccatiError::NoConvergence {
            iterations,
            residual: f64::NAN,
        });
    }

    let eye = DMatrix::<f64>::identity(n, n);
    let mut lhs = DMatrix::zeros(dim, n);
    lhs.view_mut((0, 0), (n, n)).copy_from(&z.view((0, n), (n, n)));
    lhs.view_mut((n, 0), (n, n)).copy_from(&(z.view((n, n), (n, n)) + &eye));
    let mut rhs = DMatrix::zeros(dim, n);
    rhs.view_mut((0, 0), (n, n)).copy_from(&(-(z.view((0, 0), (n, n)) + &eye)));
    rhs.view_mut((n, 0), (n, n)).copy_from(&(-z.view((n, 0), (n, n))));

    let s = lhs
        .svd(true, true)
        .solve(&rhs, f64::EPSILON)
        .map_err(|_| RiccatiError::NotStabilizable)?;
    let s = (&s + s.transpose()) * 0.5;
    let residual = care_residual(a, b, weights, &s).norm();
    if residual > tol {
        return Err(RiccatiError::NoConvergence { iterations, residual });
    }
    Ok(CareSolution {
        s,
        residual_norm: residual,
        iterations,
        method: CareMethod::HamiltonianSign,
    })
}

/// `K = R^{-1} B^T S` together with the Riccati solution it came from.
pub fn lqr(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &LqrWeights) -> Result<(GainMatrix, CareSolution), RiccatiError> {
    let solution = solve_care(a, b, weights, weights.default_tolerance(), DEFAULT_MAX_ITER)?;
    let k = solve_r(&weights.r, &(b.transpose() * &solution.s));
    Ok((GainMatrix { k }, solution))
}

/// Optimal feedback gain `K = R^{-1} B^T S`.
pub fn lqr_gain(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &LqrWeights) -> Result<GainMatrix, RiccatiError> {
    lqr(a, b, weights).map(|(k, _)| k)
}

/// `u = u_eq - K (x - x_ref)`.
///
/// # Panics
/// If `k` is not 4x12.
pub fn feedback_control(k: &GainMatrix, state: &State12, reference: &State12, u_equilibrium: &ControlInput) -> ControlInput {
    let gain = k.to_hover_gain().expect("feedback gain must be 4x12");
    ControlInput(u_equilibrium.0 - gain * (state.0 - reference.0))
}

/// Trapezoidal integral of `x^T Q x + u^T R u` over a sampled grid.
pub fn quadratic_cost(
    times: &[f64],
    states: &[DVector<f64>],
    controls: &[DVector<f64>],
    q: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<f64, RiccatiError> {
    if times.len() != states.len() || times.len() != controls.len() {
        return Err(RiccatiError::GridMismatch {
            times: times.len(),
            states: states.len(),
            controls: controls.len(),
        });
    }
    let integrand: Vec<f64> = states
        .iter()
        .zip(controls)
        .map(|(x, u)| (x.transpose() * q * x)[(0, 0)] + (u.transpose() * r * u)[(0, 0)])
        .collect();
    Ok(times
        .windows(2)
        .zip(integrand.windows(2))
        .map(|(t, f)| 0.5 * (t[1] - t[0]) * (f[0] + f[1]))
        .sum())
}

/// Quadratic cost of a simulated run, measured on the state deviation from
/// `reference` and the input deviation from `u_equilibrium`.
pub fn evaluate_cost(
    trajectory: &Trajectory,
    reference: &State12,
    u_equilibrium: &ControlInput,
    weights: &LqrWeights,
) -> Result<f64, RiccatiError> {
    if weights.q.nrows() != STATE_DIM || weights.r.nrows() != INPUT_DIM {
        return Err(RiccatiError::Dimension("cost weights must be 12x12 and 4x4".into()));
    }
    let states: Vec<DVector<f64>> = trajectory
        .states
        .iter()
        .map(|x| DVector::from_column_slice((x.0 - reference.0).as_slice()))
        .collect();
    let controls: Vec<DVector<f64>> = trajectory
        .controls
        .iter()
        .map(|u| DVector::from_column_slice((u.0 - u_equilibrium.0).as_slice()))
        .collect();
    quadratic_cost(&trajectory.times, &states, &controls, &weights.q, &weights.r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_integrator(b: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        (
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 1, &[0.0, b]),
        )
    }

    /// Closed-form stabilizing solution of the double-integrator ARE with
    /// `Q = diag(q1, q2)` and scalar `r`.
    fn closed_form(b: f64, q1: f64, q2: f64, r: f64) -> DMatrix<f64> {
        let s2 = (q1 * r).sqrt() / b;
        let s3 = (r * q2 + 2.0 * r * s2).sqrt() / b;
        let s1 = b * b * s2 * s3 / r;
        DMatrix::from_row_slice(2, 2, &[s1, s2, s2, s3])
    }

    #[test]
    fn scalar_system() {
        let a = DMatrix::from_element(1, 1, 0.0);
        let b = DMatrix::from_element(1, 1, 1.0);
        let w = LqrWeights::from_diagonals(&[1.0], &[1.0]).unwrap();
        let sol = solve_care(&a, &b, &w, 1e-12, 100).unwrap();
        assert_relative_eq!(sol.s[(0, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn double_integrator_matches_closed_form() {
        let (a, b) = double_integrator(1.0);
        let w = LqrWeights::from_diagonals(&[1.0, 1.0], &[1.0]).unwrap();
        let sol = solve_care(&a, &b, &w, 1e-12, 100).unwrap();
        let expected = closed_form(1.0, 1.0, 1.0, 1.0);
        assert_relative_eq!(expected[(0, 0)], 3f64.sqrt(), epsilon = 1e-15);
        assert!((&sol.s - &expected).amax() < 1e-12);
        assert!(care_residual(&a, &b, &w, &expected).norm() < 1e-12);
        let k = lqr_gain(&a, &b, &w).unwrap();
        assert_relative_eq!(k.k[(0, 0)], 1.0, epsilon = 1e-8);
        assert_relative_eq!(k.k[(0, 1)], 3f64.sqrt(), epsilon = 1e-8);
    }

    #[test]
    fn yaw_subsystem_gain() {
        let (a, b) = double_integrator(200.0);
        let w = LqrWeights::from_diagonals(&[10.0, 1.0], &[0.001]).unwrap();
        let k = lqr_gain(&a, &b, &w).unwrap();
        let oracle = closed_form(200.0, 10.0, 1.0, 0.001);
        let k_oracle = oracle.row(1) * 200.0 / 0.001;
        assert_relative_eq!(k.k[(0, 0)], k_oracle[0], max_relative = 1e-9);
        assert_relative_eq!(k.k[(0, 1)], k_oracle[1], max_relative = 1e-9);
        assert_relative_eq!(k.k[(0, 0)], 100.0, max_relative = 1e-9);
        assert_relative_eq!(k.k[(0, 1)], 1001f64.sqrt(), max_relative = 1e-9);
    }

    #[test]
    fn altitude_subsystem_gain() {
        let (a, b) = double_integrator(1.0);
        let w = LqrWeights::from_diagonals(&[1.71, 1.5], &[1.0]).unwrap();
        let k = lqr_gain(&a, &b, &w).unwrap();
        assert_relative_eq!(k.k[(0, 0)], 1.71f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(k.k[(0, 0)], 1.3077, epsilon = 1e-4);
    }

    #[test]
    fn hamiltonian_route_agrees_on_double_integrator() {
        let (a, b) = double_integrator(1.0);
        let w = LqrWeights::from_diagonals(&[1.0, 1.0], &[1.0]).unwrap();
        let sol = solve_care_hamiltonian(&a, &b, &w, 1e-10, 100).unwrap();
        assert!((&sol.s - closed_form(1.0, 1.0, 1.0, 1.0)).amax() < 1e-10);
    }

    #[test]
    fn zero_q_gives_zero_gain() {
        let (a, b) = double_integrator(1.0);
        let w = LqrWeights::from_diagonals(&[0.0, 0.0], &[1.0]).unwrap();
        let k = lqr_gain(&a, &b, &w).unwrap();
        assert_eq!(k.k, DMatrix::zeros(1, 2));
    }

    #[test]
    fn uncontrollable_pair_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let w = LqrWeights::from_diagonals(&[1.0, 1.0], &[1.0]).unwrap();
        assert_eq!(solve_care(&a, &b, &w, 1e-9, 100), Err(RiccatiError::NotStabilizable));
    }

    #[test]
    fn weight_validation() {
        assert!(LqrWeights::from_diagonals(&[1.0], &[0.0]).is_err());
        assert!(LqrWeights::from_diagonals(&[-1.0], &[1.0]).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(LqrWeights::new(asym, DMatrix::identity(1, 1)).is_err());
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let (a, b) = double_integrator(1.0);
        let w = LqrWeights::from_diagonals(&[1.0, 1.0], &[1.0]).unwrap();
        assert!(matches!(
            solve_care(&a, &b, &w, 1e-12, 1),
            Err(RiccatiError::NoConvergence { iterations: 1, .. })
        ));
    }

    #[test]
    fn feedback_examples() {
        let k = GainMatrix {
            k: DMatrix::from_fn(4, 12, |i, j| (i + j) as f64),
        };
        let u_eq = ControlInput::new(9.81, 0.0, 0.0, 0.0);
        let x = State12::from_array([0.3; 12]);
        assert_eq!(feedback_control(&k, &x, &x, &u_eq), u_eq);
        let zero = GainMatrix::zeros(4, 12);
        assert_eq!(feedback_control(&zero, &x, &State12::zeros(), &u_eq), u_eq);
    }

    #[test]
    fn cost_examples() {
        let q = DMatrix::from_element(1, 1, 1.0);
        let r = DMatrix::from_element(1, 1, 1.0);
        let dt = 0.001;
        let times: Vec<f64> = (0..=2000).map(|i| i as f64 * dt).collect();
        let zero: Vec<DVector<f64>> = times.iter().map(|_| DVector::zeros(1)).collect();
        assert_eq!(quadratic_cost(&times, &zero, &zero, &q, &r).unwrap(), 0.0);

        let ones: Vec<DVector<f64>> = times.iter().map(|_| DVector::from_element(1, 1.0)).collect();
        assert_relative_eq!(quadratic_cost(&times, &ones, &zero, &q, &r).unwrap(), 2.0, epsilon = 1e-12);

        let times: Vec<f64> = (0..=10_000).map(|i| i as f64 * dt).collect();
        let decay: Vec<DVector<f64>> = times.iter().map(|t| DVector::from_element(1, (-t).exp())).collect();
        let zero: Vec<DVector<f64>> = times.iter().map(|_| DVector::zeros(1)).collect();
        let j = quadratic_cost(&times, &decay, &zero, &q, &r).unwrap();
        assert!((j - (1.0 - (-20f64).exp()) / 2.0).abs() < 1e-4);

        assert!(matches!(
            quadratic_cost(&times[..5], &decay[..4], &zero[..5], &q, &r),
            Err(RiccatiError::GridMismatch { .. })
        ));
    }
}
