//! Ideal beampattern templates and the constrained least-squares fit of a
//! transmit covariance to them.

use crate::conic::{solve, ConicProblem, LinExpr, Sense, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{quadratic_form, HermitianMatrix};
use crate::scenario::{AngularGrid, UlaGeometry};

#[derive(Debug, Clone, PartialEq)]
pub struct IdealPattern {
    grid: AngularGrid,
    gains: Vec<f64>,
}

impl IdealPattern {
    pub fn new(grid: AngularGrid, gains: Vec<f64>) -> Result<Self> {
        if gains.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} gains", grid.len()),
                found: gains.len().to_string(),
            });
        }
        if gains.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return Err(Error::InvalidArgument("pattern gains must be finite and nonnegative".into()));
        }
        if gains.iter().all(|&g| g == 0.0) {
            return Err(Error::InvalidArgument("pattern is identically zero".into()));
        }
        Ok(Self { grid, gains })
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.gains.iter().map(|g| g * k).collect())
    }
}

/// Unit gain on `[theta0 - halfwidth, theta0 + halfwidth]`, zero elsewhere.
/// Grid points outside the array's angular range simply don't exist, so a
/// mainlobe near ±90° is truncated.
pub fn rect_pattern(grid: &AngularGrid, theta0: f64, halfwidth: f64) -> Result<IdealPattern> {
    if !(halfwidth > 0.0) {
        return Err(Error::InvalidArgument(format!("halfwidth must be positive, got {halfwidth}")));
    }
    // Absorb rounding from degree-to-radian conversion at the edges.
    let eps = 1e-9;
    let gains: Vec<f64> = grid
        .angles()
        .iter()
        .map(|&t| if (t - theta0).abs() <= halfwidth + eps { 1.0 } else { 0.0 })
        .collect();
    if gains.iter().all(|&g| g == 0.0) {
        return Err(Error::InvalidArgument("mainlobe contains no grid angle".into()));
    }
    IdealPattern::new(grid.clone(), gains)
}

#[derive(Debug, Clone)]
pub struct DesiredCovariance {
    pub r_d: HermitianMatrix,
    pub eta: f64,
    /// Achieved `Σ_m |η P_d(θ_m) - a^H(θ_m) R_d a(θ_m)|²`.
    pub residual: f64,
    pub solver_iterations: usize,
    pub solver_gap: f64,
}

/// `a^H(θ_m) R a(θ_m)` over the grid.
pub fn beampattern_profile(r: &HermitianMatrix, angles: &[f64], geom: &UlaGeometry) -> Result<Vec<f64>> {
    angles.iter().map(|&t| quadratic_form(&geom.steering(t), r)).collect()
}

/// Least-squares mismatch between a scaled template and a covariance.
pub fn ls_objective(pattern: &IdealPattern, geom: &UlaGeometry, r: &HermitianMatrix, eta: f64) -> Result<f64> {
    let prof = beampattern_profile(r, pattern.grid().angles(), geom)?;
    Ok(prof
        .iter()
        .zip(pattern.gains())
        .map(|(q, p)| (eta * p - q).powi(2))
        .sum())
}

/// Fits `R_d` (PSD, `tr R_d = P0`) and `η ≥ 0` to the template by minimizing
/// the residual norm `t ≥ ‖η P_d - diag(A^H R_d A)‖`.
pub fn solve_desired_covariance(
    pattern: &IdealPattern,
    geom: &UlaGeometry,
    p0: f64,
    opts: &SolverOptions,
) -> Result<DesiredCovariance> {
    if !(p0 > 0.0) {
        return Err(Error::InvalidArgument(format!("power budget must be positive, got {p0}")));
    }
    let n = geom.n_antennas();
    let mut prob = ConicProblem::new();
    let r = prob.add_hermitian_block(n);
    let eta = prob.add_scalar();
    let t = prob.add_scalar();
    prob.minimize(t.expr());
    prob.add_eq("power", r.trace(), p0);
    prob.add_ineq("eta", eta.expr(), Sense::Ge, 0.0);
    let residuals: Vec<LinExpr> = pattern
        .grid()
        .angles()
        .iter()
        .zip(pattern.gains())
        .map(|(&theta, &p)| eta.expr() * p - r.quad_form(&geom.steering(theta)))
        .collect();
    prob.add_soc("fit", residuals, t.expr());

    let sol = solve(&prob, opts)?.require_optimal()?;
    let raw = sol.hermitian(&r);
    // Remove the solver's last-digit trace error.
    let r_d = raw.scale(p0 / raw.trace());
    let eta_v = sol.scalar(eta).max(0.0);
    let residual = ls_objective(pattern, geom, &r_d, eta_v)?;
    Ok(DesiredCovariance {
        r_d,
        eta: eta_v,
        residual,
        solver_iterations: sol.iterations,
        solver_gap: sol.gap,
    })
}
