//! Rank-one beamformers from relaxed covariances: principal eigenvector
//! against Gaussian randomization.

use num_complex::Complex64;
use secure_dfrc::design::{gaussian_randomization, solve_problem9, DesignOptions, Thresholds};
use secure_dfrc::scenario::{sample_channel, AngularGrid, Scenario, TargetModel, UlaGeometry};

fn main() -> secure_dfrc::Result<()> {
    let target = TargetModel::new(0.0, 10f64.to_radians(), Complex64::new(1.0, 0.0))?;
    let scn = Scenario::new(UlaGeometry::half_wavelength(4)?, sample_channel(2, 4, 3)?, 1e-3, target, 1.0, 30)?;
    let thr = Thresholds::with_gamma_b_db(10.0, f64::INFINITY, 0.5, 0.1)?;
    let sol = solve_problem9(&scn, &AngularGrid::full_range(1.0)?, &thr, &DesignOptions::default())?;
    println!("defects {:?}", sol.rank1_defect);
    println!("relaxed SR {:.4}, eigenvector SR {:.4}", sol.metrics.secrecy_rate, sol.rank1_metrics.secrecy_rate);
    match gaussian_randomization(&scn, &thr, &sol.w_list, &sol.r_n, 200, 11)? {
        Some(best) => println!("randomization SR {:.4} (best of 200 draws)", best.secrecy_rate),
        None => println!("no randomized draw met the user SINR floor"),
    }
    Ok(())
}
