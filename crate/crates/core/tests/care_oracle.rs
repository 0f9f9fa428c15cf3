//! Riccati solutions on random systems, checked against two independent
//! references: the Hamiltonian sign-function route and the optimal cost
//! `x0' S x0` obtained by integrating the closed loop.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quadctl::riccati::{self, care_residual, solve_care, solve_care_hamiltonian, LqrWeights};

fn random_system(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>, LqrWeights) {
    let n = rng.gen_range(2..=6);
    let m = rng.gen_range(1..=3);
    let a = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.5..1.5));
    let b = DMatrix::from_fn(n, m, |_, _| rng.gen_range(-1.0..1.0));
    let gq = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let gr = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
    let q = &gq * gq.transpose() + DMatrix::identity(n, n) * 0.1;
    let r = &gr * gr.transpose() + DMatrix::identity(m, m) * 0.5;
    (a, b, LqrWeights::new(q, r).unwrap())
}

/// `integral (x'Qx + u'Ru) dt` along `x' = (A - BK) x` by fixed-step RK4 with
/// Simpson quadrature, until the state has decayed.
fn integrated_cost(a: &DMatrix<f64>, b: &DMatrix<f64>, k: &DMatrix<f64>, w: &LqrWeights, x0: &DVector<f64>) -> f64 {
    let closed = a - b * k;
    let stage = |x: &DVector<f64>| {
        let u = -(k * x);
        (x.transpose() * &w.q * x)[(0, 0)] + (u.transpose() * &w.r * &u)[(0, 0)]
    };
    let slowest = closed
        .complex_eigenvalues()
        .iter()
        .map(|l| -l.re)
        .fold(f64::INFINITY, f64::min);
    let fastest = closed.complex_eigenvalues().iter().map(|l| l.norm()).fold(0.0, f64::max);
    let dt = 0.02 / fastest.max(1.0);
    let horizon = 40.0 / slowest;
    let steps = ((horizon / dt).ceil() as usize).next_multiple_of(2);

    let mut x = x0.clone();
    let mut values = Vec::with_capacity(steps + 1);
    values.push(stage(&x));
    for _ in 0..steps {
        let k1 = &closed * &x;
        let k2 = &closed * (&x + &k1 * (0.5 * dt));
        let k3 = &closed * (&x + &k2 * (0.5 * dt));
        let k4 = &closed * (&x + &k3 * dt);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        values.push(stage(&x));
    }
    let inner: f64 = values[1..steps]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    (values[0] + inner + values[steps]) * dt / 3.0
}

#[test]
fn random_systems_match_independent_references() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let (a, b, w) = random_system(&mut rng);
        // The residual cannot drop below the rounding error of its largest
        // term; size that from the sign-function estimate of S.
        let estimate = match solve_care_hamiltonian(&a, &b, &w, f64::MAX, 100) {
            Ok(sol) => sol.s,
            // random draws can be numerically uncontrollable; skip those
            Err(riccati::RiccatiError::NotStabilizable) => continue,
            Err(e) => panic!("system {checked}: {e}"),
        };
        let g = &b * w.r.clone().try_inverse().unwrap() * b.transpose();
        let floor = 1e-13 * (2.0 * a.norm() * estimate.norm() + estimate.norm().powi(2) * g.norm() + w.q.norm());
        let tol = w.default_tolerance().max(floor);
        let newton = solve_care(&a, &b, &w, tol, 100).unwrap_or_else(|e| panic!("system {checked}: {e}"));
        if floor < w.default_tolerance() {
            assert!(riccati::lqr(&a, &b, &w).is_ok(), "system {checked}: default tolerance missed");
        }
        let s = &newton.s;
        let scale = s.norm().max(1.0);
        assert!((s - s.transpose()).amax() <= 1e-10 * scale, "system {checked}: asymmetric S");
        assert!(care_residual(&a, &b, &w, s).norm() <= tol);
        assert!(s.symmetric_eigenvalues().min() > -1e-9 * scale, "system {checked}: S not PSD");

        let k = riccati::GainMatrix {
            k: w.r.clone().cholesky().unwrap().solve(&(b.transpose() * s)),
        };
        assert!(k.closed_loop_abscissa(&a, &b) < 0.0, "system {checked}: closed loop unstable");

        assert!((&estimate - s).amax() <= 1e-6 * scale, "system {checked}: routes disagree");

        let x0 = DVector::from_fn(a.nrows(), |_, _| rng.gen_range(-1.0..1.0));
        let predicted = (x0.transpose() * s * &x0)[(0, 0)];
        let measured = integrated_cost(&a, &b, &k.k, &w, &x0);
        assert!(
            ((measured - predicted) / predicted).abs() < 1e-6,
            "system {checked}: cost {measured} vs x0'Sx0 {predicted}"
        );
        checked += 1;
    }
}

#[test]
fn scaling_both_weights_leaves_gain_unchanged() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let (a, b, w) = random_system(&mut rng);
        let Ok(k) = riccati::lqr_gain(&a, &b, &w) else { continue };
        let k_scaled = riccati::lqr_gain(&a, &b, &w.scaled(37.0).unwrap()).unwrap();
        assert!((&k.k - &k_scaled.k).amax() < 1e-8 * k.k.amax().max(1.0));
    }
}
