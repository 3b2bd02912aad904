//! Quadratic-transform design for a target known only to lie within ±Δθ:
//! the mainlobe is held flat over the interval and sidelobes are kept
//! `γ_s` below it.

use num_complex::Complex64;
use secure_dfrc::design::{solve_problem9, validate_solution, DesignOptions, Thresholds};
use secure_dfrc::linalg::quadratic_form;
use secure_dfrc::scenario::{sample_channel, AngularGrid, Scenario, TargetModel, UlaGeometry};

fn main() -> secure_dfrc::Result<()> {
    let grid = AngularGrid::full_range(1.0)?;
    let thr = Thresholds::with_gamma_b_db(10.0, f64::INFINITY, 2.0, 0.1)?;
    let opts = DesignOptions::default();
    for dtheta in [5.0f64, 10.0] {
        let target = TargetModel::new(0.0, dtheta.to_radians(), Complex64::new(1.0, 0.0))?;
        let scn = Scenario::new(UlaGeometry::half_wavelength(8)?, sample_channel(2, 8, 3)?, 1e-3, target, 1.0, 30)?;
        let sol = solve_problem9(&scn, &grid, &thr, &opts)?;
        println!("delta theta {dtheta} deg, stop {:?}", sol.trace.stop);
        for r in sol.trace.iterations() {
            println!("  iter {}  surrogate {:.4e}  sum SINR_E {:.4e}", r.iteration, r.surrogate, r.sum_sinr_eve);
        }
        let peak = grid
            .angles()
            .iter()
            .map(|&t| quadratic_form(&scn.steering(t), &sol.r_x))
            .collect::<secure_dfrc::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let m = &sol.metrics;
        println!(
            "  SINR_E at theta0 {:.3e}, worst over the interval {:.3e}, SR {:.4}, peak power {:.3}",
            m.sinr_eve_theta0, m.sinr_eve_worst, m.secrecy_rate, peak
        );
        let report = validate_solution(&scn, &grid, &thr, &sol, None, &opts)?;
        println!("  validation min slack {:.2e}", report.min_slack());
    }
    Ok(())
}
