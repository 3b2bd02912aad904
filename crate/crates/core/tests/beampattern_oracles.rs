mod common;

use common::beampattern::bloch_brute_force;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secure_dfrc::beampattern::*;
use secure_dfrc::conic::SolverOptions;
use secure_dfrc::linalg::HermitianMatrix;
use secure_dfrc::scenario::{AngularGrid, UlaGeometry};

#[test]
fn two_antenna_fit_matches_bloch_brute_force() {
    let angles = [-30.0, 0.0, 30.0];
    let gains = [0.0, 1.0, 0.0];
    let geom = UlaGeometry::half_wavelength(2).unwrap();
    let grid = AngularGrid::new(angles.iter().map(|d: &f64| d.to_radians()).collect()).unwrap();
    let pattern = IdealPattern::new(grid, gains.to_vec()).unwrap();
    let fit = solve_desired_covariance(&pattern, &geom, 1.0, &SolverOptions::default()).unwrap();
    let brute = bloch_brute_force(&angles, &gains, 1.0);
    assert!(fit.residual <= brute + 1e-9, "solver {} above grid {}", fit.residual, brute);
    assert!((fit.residual - brute).abs() <= 0.01 * brute, "solver {} vs grid {}", fit.residual, brute);
}

fn random_feasible(n: usize, p0: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let m = DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let r = HermitianMatrix::new(&m * m.adjoint()).unwrap();
    r.scale(p0 / r.trace())
}

#[test]
fn fit_beats_random_feasible_candidates() {
    let geom = UlaGeometry::half_wavelength(6).unwrap();
    let grid = AngularGrid::full_range(2.0).unwrap();
    let pattern = rect_pattern(&grid, 20f64.to_radians(), 10f64.to_radians()).unwrap();
    let fit = solve_desired_covariance(&pattern, &geom, 1.0, &SolverOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let r = random_feasible(6, 1.0, &mut rng);
        let eta = rng.random_range(0.0..3.0);
        assert!(fit.residual <= ls_objective(&pattern, &geom, &r, eta).unwrap() + 1e-9);
    }
    // The fit itself satisfies its constraints.
    assert!((fit.r_d.trace() - 1.0).abs() <= 1e-8);
    assert!(secure_dfrc::linalg::is_psd(&fit.r_d, 1e-8).unwrap());
    assert!(fit.eta >= 0.0);
}

#[test]
fn template_scale_is_absorbed_by_eta() {
    let geom = UlaGeometry::half_wavelength(5).unwrap();
    let grid = AngularGrid::full_range(2.0).unwrap();
    let pattern = rect_pattern(&grid, -15f64.to_radians(), 8f64.to_radians()).unwrap();
    let opts = SolverOptions::default();
    let base = solve_desired_covariance(&pattern, &geom, 1.0, &opts).unwrap();
    for k in [0.25, 3.0, 40.0] {
        let scaled = solve_desired_covariance(&pattern.scaled(k).unwrap(), &geom, 1.0, &opts).unwrap();
        // The fit is flat along some directions of R_d, which the solver
        // resolves only to about the square root of its tolerance; the
        // objective and eta are pinned much more tightly.
        let diff = scaled.r_d.sub(&base.r_d).unwrap().frobenius_norm();
        assert!(diff <= 2e-3, "k = {k}: R_d moved by {diff}");
        assert!((scaled.eta * k - base.eta).abs() <= 1e-4 * base.eta, "k = {k}");
        assert!((scaled.residual - base.residual).abs() <= 1e-8 * base.residual, "k = {k}");
    }
}
