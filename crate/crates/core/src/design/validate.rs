//! Per-constraint feasibility report for a design.

use super::assemble::{linearized_user_sinr_constraint, PatternRegions};
use super::{DesignMode, DesignOptions, DesignSolution, Thresholds};
use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, quadratic_form, HermitianMatrix};
use crate::scenario::{transmit_covariance, AngularGrid, Scenario};

/// One checked constraint. `slack ≥ 0` means satisfied.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSlack {
    pub family: &'static str,
    pub label: String,
    pub value: f64,
    pub bound: f64,
    pub slack: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub mode: DesignMode,
    /// Rows for the relaxed covariances.
    pub relaxed: Vec<ConstraintSlack>,
    /// Same rows with each `W_i` replaced by its rank-one reconstruction.
    pub rank1: Vec<ConstraintSlack>,
}

impl ValidationReport {
    pub fn min_slack(&self) -> f64 {
        min_of(&self.relaxed)
    }

    pub fn rank1_min_slack(&self) -> f64 {
        min_of(&self.rank1)
    }

    /// True when every relaxed row has slack ≥ `-tol`.
    pub fn passed(&self, tol: f64) -> bool {
        self.min_slack() >= -tol
    }

    /// Relaxed rows with slack below `-tol`.
    pub fn violations(&self, tol: f64) -> Vec<&ConstraintSlack> {
        self.relaxed.iter().filter(|r| r.slack < -tol).collect()
    }

    /// Worst rank-one slack per family.
    pub fn rank1_worst_by_family(&self) -> Vec<(&'static str, f64)> {
        let mut out: Vec<(&'static str, f64)> = Vec::new();
        for r in &self.rank1 {
            match out.iter_mut().find(|(f, _)| *f == r.family) {
                Some((_, s)) => *s = s.min(r.slack),
                None => out.push((r.family, r.slack)),
            }
        }
        out
    }
}

fn min_of(rows: &[ConstraintSlack]) -> f64 {
    rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min)
}

fn row(family: &'static str, label: String, value: f64, bound: f64, slack: f64) -> ConstraintSlack {
    ConstraintSlack {
        family,
        label,
        value,
        bound,
        slack,
    }
}

/// Checks the constraint set of `mode` at given covariances. `r_d` is
/// required for the precise design unless the mismatch bound is infinite;
/// `regions` is required for the uncertain design.
pub fn check_covariances(
    scn: &Scenario,
    mode: DesignMode,
    thr: &Thresholds,
    r_d: Option<&HermitianMatrix>,
    regions: Option<&PatternRegions>,
    w_list: &[HermitianMatrix],
    r_n: &HermitianMatrix,
) -> Result<Vec<ConstraintSlack>> {
    let r_x = transmit_covariance(w_list, r_n)?;
    let mut rows = Vec::new();
    let tr = r_x.trace();
    rows.push(row("power", "trace".into(), tr, scn.power_budget, -(tr - scn.power_budget).abs()));
    for i in 0..scn.n_users() {
        let lin = linearized_user_sinr_constraint(scn, i, thr.gamma_b)?;
        let s = lin.slack(w_list, r_n)?;
        rows.push(row("user_sinr", format!("user {i}"), s + lin.rhs(), lin.rhs(), s));
    }
    match mode {
        DesignMode::Precise => {
            if thr.gamma_bp.is_finite() {
                let r_d = r_d.ok_or_else(|| {
                    Error::InvalidArgument("precise-design validation needs the desired covariance".into())
                })?;
                let d = r_x.sub(r_d)?.frobenius_norm().powi(2);
                rows.push(row("beampattern", "mismatch".into(), d, thr.gamma_bp, thr.gamma_bp - d));
            }
        }
        DesignMode::Uncertain => {
            let regions = regions.ok_or_else(|| {
                Error::InvalidArgument("uncertain-design validation needs the pattern regions".into())
            })?;
            let p0 = quadratic_form(&scn.steering(scn.target.theta0()), &r_x)?;
            for &theta in &regions.omega {
                let gap = p0 - quadratic_form(&scn.steering(theta), &r_x)?;
                rows.push(row(
                    "sidelobe",
                    format!("{:.2} deg", theta.to_degrees()),
                    gap,
                    thr.gamma_s,
                    gap - thr.gamma_s,
                ));
            }
            for &theta in &regions.phi {
                let p = quadratic_form(&scn.steering(theta), &r_x)?;
                let deg = theta.to_degrees();
                let hi = (1.0 + thr.ripple) * p0;
                let lo = (1.0 - thr.ripple) * p0;
                rows.push(row("ripple", format!("{deg:.2} deg upper"), p, hi, hi - p));
                rows.push(row("ripple", format!("{deg:.2} deg lower"), p, lo, p - lo));
            }
        }
    }
    for (i, w) in w_list.iter().enumerate() {
        let lam = min_eigenvalue(w)?;
        rows.push(row("psd", format!("W_{i}"), lam, 0.0, lam));
    }
    let lam = min_eigenvalue(r_n)?;
    rows.push(row("psd", "R_N".into(), lam, 0.0, lam));
    Ok(rows)
}

/// Checks every constraint of the design problem on the relaxed covariances
/// and on the rank-one reconstruction.
pub fn validate_solution(
    scn: &Scenario,
    grid: &AngularGrid,
    thr: &Thresholds,
    sol: &DesignSolution,
    r_d: Option<&HermitianMatrix>,
    opts: &DesignOptions,
) -> Result<ValidationReport> {
    let regions = match sol.mode {
        DesignMode::Uncertain => Some(PatternRegions::new(scn, grid, opts.sidelobe_guard)?),
        DesignMode::Precise => None,
    };
    let relaxed = check_covariances(scn, sol.mode, thr, r_d, regions.as_ref(), &sol.w_list, &sol.r_n)?;
    let rank1 = check_covariances(
        scn,
        sol.mode,
        thr,
        r_d,
        regions.as_ref(),
        &sol.rank1_covariances(),
        &sol.r_n,
    )?;
    Ok(ValidationReport {
        mode: sol.mode,
        relaxed,
        rank1,
    })
}
