//! Bartels–Stewart solver for real Sylvester and Lyapunov equations.
//!
//! Both coefficient matrices are reduced to real Schur form, the transformed
//! equation is solved block by block (1x1 and 2x2 diagonal blocks), and the
//! solution is rotated back.

use nalgebra::linalg::Schur;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

const SCHUR_EPS: f64 = f64::EPSILON;
const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("real Schur decomposition did not converge")]
    SchurFailed,
    /// `A` and `-B` share an eigenvalue, so the solution is not unique.
    #[error("singular Sylvester operator (eigenvalues of A and -B overlap)")]
    Singular,
}

/// Diagonal blocks `(start, size)` of a real quasi-triangular matrix.
fn diagonal_blocks(t: &DMatrix<f64>) -> Result<Vec<(usize, usize)>, LyapunovError> {
    let n = t.nrows();
    let mut blocks = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            if i + 2 < n && t[(i + 2, i + 1)] != 0.0 {
                return Err(LyapunovError::SchurFailed);
            }
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    Ok(blocks)
}

fn real_schur(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>), LyapunovError> {
    Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .map(Schur::unpack)
        .ok_or(LyapunovError::SchurFailed)
}

/// Solves `P Z + Z Q = G` for blocks of size at most 2x2 through the
/// Kronecker form `(I ⊗ P + Q^T ⊗ I) vec(Z) = vec(G)`.
fn solve_small(p: &DMatrix<f64>, q: &DMatrix<f64>, g: &DMatrix<f64>) -> Result<DMatrix<f64>, LyapunovError> {
    let (rows, cols) = g.shape();
    let dim = rows * cols;
    let mut op = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..cols {
        for r in 0..rows {
            let row = c * rows + r;
            for k in 0..rows {
                op[(row, c * rows + k)] += p[(r, k)];
            }
            for k in 0..cols {
                op[(row, k * rows + r)] += q[(k, c)];
            }
        }
    }
    let scale = op.amax().max(f64::MIN_POSITIVE);
    let lu = op.lu();
    let pivot_floor = 64.0 * f64::EPSILON * scale;
    let u = lu.u();
    if (0..dim).any(|i| u[(i, i)].abs() <= pivot_floor) {
        return Err(LyapunovError::Singular);
    }
    let rhs = DVector::from_column_slice(g.as_slice());
    let sol = lu.solve(&rhs).ok_or(LyapunovError::Singular)?;
    Ok(DMatrix::from_column_slice(rows, cols, sol.as_slice()))
}

/// Solves `T Y + Y W = F` with `T`, `W` upper quasi-triangular.
fn solve_quasi_triangular(
    t: &DMatrix<f64>,
    w: &DMatrix<f64>,
    f: &DMatrix<f64>,
) -> Result<DMatrix<f64>, LyapunovError> {
    let (n, m) = f.shape();
    let t_blocks = diagonal_blocks(t)?;
    let w_blocks = diagonal_blocks(w)?;
    let mut y = DMatrix::<f64>::zeros(n, m);

    for &(k0, kp) in t_blocks.iter().rev() {
        let k_end = k0 + kp;
        for &(l0, lq) in &w_blocks {
            let mut rhs = f.view((k0, l0), (kp, lq)).clone_owned();
            if k_end < n {
                rhs -= t.view((k0, k_end), (kp, n - k_end)) * y.view((k_end, l0), (n - k_end, lq));
            }
            if l0 > 0 {
                rhs -= y.view((k0, 0), (kp, l0)) * w.view((0, l0), (l0, lq));
            }
            let tkk = t.view((k0, k0), (kp, kp)).clone_owned();
            let wll = w.view((l0, l0), (lq, lq)).clone_owned();
            let block = solve_small(&tkk, &wll, &rhs)?;
            y.view_mut((k0, l0), (kp, lq)).copy_from(&block);
        }
    }
    Ok(y)
}

/// Solves the Sylvester equation `A X + X B = C`.
pub fn solve_sylvester(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>, LyapunovError> {
    if !a.is_square() || !b.is_square() {
        return Err(LyapunovError::Dimension("A and B must be square".into()));
    }
    if c.shape() != (a.nrows(), b.nrows()) {
        return Err(LyapunovError::Dimension(format!(
            "C is {:?}, expected ({}, {})",
            c.shape(),
            a.nrows(),
            b.nrows()
        )));
    }
    let (u, t) = real_schur(a)?;
    let (v, w) = real_schur(b)?;
    let f = u.transpose() * c * &v;
    let y = solve_quasi_triangular(&t, &w, &f)?;
    Ok(u * y * v.transpose())
}

/// Solves the continuous Lyapunov equation `A X + X A^T = C`.
///
/// For symmetric `C` the result is symmetrized before returning.
pub fn solve_lyapunov(a: &DMatrix<f64>, c: &DMatrix<f64>) -> Result<DMatrix<f64>, LyapunovError> {
    let x = solve_sylvester(a, &a.transpose(), c)?;
    if c.relative_eq(&c.transpose(), 0.0, 1e-14) {
        Ok((&x + x.transpose()) * 0.5)
    } else {
        Ok(x)
    }
}
