//! Draw a frame from a designed covariance and compare its sample
//! covariance with the design.

use num_complex::Complex64;
use secure_dfrc::design::{solve_problem8, DesignOptions, Thresholds};
use secure_dfrc::linalg::HermitianMatrix;
use secure_dfrc::scenario::{sample_channel, sample_covariance, synthesize_waveform, transmit_covariance, Scenario, TargetModel, UlaGeometry};

fn main() -> secure_dfrc::Result<()> {
    let target = TargetModel::new(0.0, 0.0, Complex64::new(1.0, 0.0))?;
    let scn = Scenario::new(UlaGeometry::half_wavelength(6)?, sample_channel(2, 6, 1)?, 1e-3, target, 1.0, 30)?;
    let thr = Thresholds::with_gamma_b_db(10.0, f64::INFINITY, 0.0, 0.1)?;
    let sol = solve_problem8(&scn, &HermitianMatrix::zeros(6), &thr, &DesignOptions::default())?;
    let w = sol.rank1_covariances();
    let r_x = transmit_covariance(&w, &sol.r_n)?;
    for l in [30, 1000, 100_000] {
        let x = synthesize_waveform(&w, &sol.r_n, l, 5)?;
        let err = sample_covariance(&x)?.sub(&r_x)?.frobenius_norm() / r_x.frobenius_norm();
        println!("L = {l:>6}: relative covariance error {err:.4}");
    }
    Ok(())
}
