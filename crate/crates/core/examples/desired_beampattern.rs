//! Least-squares fit of a transmit covariance to a rectangular beampattern.

use secure_dfrc::beampattern::{beampattern_profile, rect_pattern, solve_desired_covariance};
use secure_dfrc::conic::SolverOptions;
use secure_dfrc::scenario::{AngularGrid, UlaGeometry};

fn main() -> secure_dfrc::Result<()> {
    let geom = UlaGeometry::half_wavelength(8)?;
    let grid = AngularGrid::full_range(1.0)?;
    let pattern = rect_pattern(&grid, 0.0, 10f64.to_radians())?;
    let fit = solve_desired_covariance(&pattern, &geom, 1.0, &SolverOptions::default())?;
    println!("eta {:.4}, residual {:.4e}, tr R_d {:.6}", fit.eta, fit.residual, fit.r_d.trace());
    let probe: Vec<f64> = [-60.0, -20.0, -10.0, 0.0, 10.0, 20.0, 60.0].iter().map(|d: &f64| d.to_radians()).collect();
    let prof = beampattern_profile(&fit.r_d, &probe, &geom)?;
    for (deg, p) in [-60, -20, -10, 0, 10, 20, 60].iter().zip(prof) {
        println!("{deg:>4} deg  {p:.4}  ({:.1} dB)", 10.0 * p.max(1e-6).log10());
    }
    Ok(())
}
