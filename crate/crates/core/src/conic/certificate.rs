//! Independent feasibility check of a candidate point against a
//! [`ConicProblem`], working from the modeling layer rather than the
//! solver's standard form.

use nalgebra::DMatrix;

use super::problem::{BlockKind, ConicProblem, HermitianBlock, Sense, SymmetricBlock};
use crate::linalg::min_eigenvalue;

#[derive(Debug, Clone)]
pub struct ViolationReport {
    /// `|expr - rhs|` per equality.
    pub eq_residuals: Vec<f64>,
    /// Positive part of the violation per inequality.
    pub ineq_violations: Vec<f64>,
    /// `max(0, ‖v‖ - bound)` per second-order cone constraint.
    pub soc_violations: Vec<f64>,
    /// Smallest eigenvalue per PSD block.
    pub psd_min_eigs: Vec<f64>,
    pub objective: f64,
    pub tol: f64,
}

impl ViolationReport {
    pub fn max_violation(&self) -> f64 {
        let worst_psd = self.psd_min_eigs.iter().map(|&e| (-e).max(0.0)).fold(0.0, f64::max);
        self.eq_residuals
            .iter()
            .chain(&self.ineq_violations)
            .chain(&self.soc_violations)
            .copied()
            .fold(worst_psd, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.max_violation() <= self.tol
    }

    /// Labels of the constraints violated beyond `tol`.
    pub fn violated(&self, problem: &ConicProblem) -> Vec<String> {
        let mut out = Vec::new();
        for (c, &r) in problem.eqs().iter().zip(&self.eq_residuals) {
            if r > self.tol {
                out.push(c.label.clone());
            }
        }
        for (c, &r) in problem.ineqs().iter().zip(&self.ineq_violations) {
            if r > self.tol {
                out.push(c.label.clone());
            }
        }
        for (c, &r) in problem.socs().iter().zip(&self.soc_violations) {
            if r > self.tol {
                out.push(c.label.clone());
            }
        }
        for (k, &e) in self.psd_min_eigs.iter().enumerate() {
            if e < -self.tol {
                out.push(format!("psd block {k}"));
            }
        }
        out
    }
}

/// Evaluates every constraint of `problem` at `x`. Violations are absolute;
/// scale `tol` to the data if needed.
pub fn check_point(problem: &ConicProblem, x: &[f64], tol: f64) -> ViolationReport {
    let eq_residuals = problem.eqs().iter().map(|c| (c.expr.eval(x) - c.rhs).abs()).collect();
    let ineq_violations = problem
        .ineqs()
        .iter()
        .map(|c| {
            let v = c.expr.eval(x);
            match c.sense {
                Sense::Le => (v - c.rhs).max(0.0),
                Sense::Ge => (c.rhs - v).max(0.0),
            }
        })
        .collect();
    let soc_violations = problem
        .socs()
        .iter()
        .map(|c| {
            let n = c.vector.iter().map(|e| e.eval(x).powi(2)).sum::<f64>().sqrt();
            (n - c.bound.eval(x)).max(0.0)
        })
        .collect();
    let psd_min_eigs = problem
        .blocks()
        .iter()
        .map(|b| match b.kind {
            BlockKind::Hermitian => {
                let w = HermitianBlock { offset: b.offset, dim: b.dim }.value(x);
                min_eigenvalue(&w).unwrap_or(f64::NEG_INFINITY)
            }
            BlockKind::Symmetric => {
                let m: DMatrix<f64> = SymmetricBlock { offset: b.offset, dim: b.dim }.value(x);
                m.symmetric_eigenvalues().min()
            }
        })
        .collect();
    ViolationReport {
        eq_residuals,
        ineq_violations,
        soc_violations,
        psd_min_eigs,
        objective: problem.objective().eval(x),
        tol,
    }
}
