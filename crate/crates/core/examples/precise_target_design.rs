//! Dinkelbach design for a target at a known angle: minimize the
//! eavesdropper SINR with user SINR floors and a beampattern-matching bound.

use num_complex::Complex64;
use secure_dfrc::beampattern::{rect_pattern, solve_desired_covariance};
use secure_dfrc::conic::SolverOptions;
use secure_dfrc::design::{solve_problem8, validate_solution, DesignOptions, Thresholds};
use secure_dfrc::scenario::{sample_channel, AngularGrid, Scenario, TargetModel, UlaGeometry};

fn main() -> secure_dfrc::Result<()> {
    let (n, k) = (8, 2);
    let geom = UlaGeometry::half_wavelength(n)?;
    let grid = AngularGrid::full_range(1.0)?;
    let target = TargetModel::new(0.0, 0.0, Complex64::new(1.0, 0.0))?;
    // P0 = 1 W, σ² = 1 mW
    let scn = Scenario::new(geom.clone(), sample_channel(k, n, 3)?, 1e-3, target, 1.0, 30)?;
    let pattern = rect_pattern(&grid, 0.0, 10f64.to_radians())?;
    let r_d = solve_desired_covariance(&pattern, &geom, 1.0, &SolverOptions::default())?.r_d;
    let thr = Thresholds::with_gamma_b_db(10.0, 0.1, 0.0, 0.1)?;
    let opts = DesignOptions::default();

    let sol = solve_problem8(&scn, &r_d, &thr, &opts)?;
    for r in &sol.trace.records {
        println!("iter {:>2}  c {:>12.6}  SINR_E {:.6}  min user SINR {:.3}", r.iteration, r.c.unwrap_or(0.0), r.sinr_eve, r.min_user_sinr);
    }
    println!("stop: {:?}", sol.trace.stop);
    let m = &sol.metrics;
    println!("secrecy rate {:.4} bit/s/Hz (rank one: {:.4})", m.secrecy_rate, sol.rank1_metrics.secrecy_rate);
    println!("rank-one defects {:?}", sol.rank1_defect);
    let report = validate_solution(&scn, &grid, &thr, &sol, Some(&r_d), &opts)?;
    println!("relaxed min slack {:.2e}, rank-one min slack {:.2e}", report.min_slack(), report.rank1_min_slack());
    Ok(())
}
