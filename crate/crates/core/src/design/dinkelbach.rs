//! Dinkelbach iteration for the precise-angle design.

use log::debug;

use super::assemble::{assemble_p8_subproblem, p8_problem, phase1, ratio_terms, solve_sub, Family};
use super::{DesignMode, DesignOptions, DesignSolution, IterationRecord, IterationTrace, StopReason, Thresholds};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::scenario::{sinr_eve, user_sinrs, Scenario};

/// `c = M / N`, the eavesdropper SINR at the point that produced `M` and `N`.
pub fn dinkelbach_update(m: f64, n: f64) -> Result<f64> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("Dinkelbach denominator must be positive, got {n}")));
    }
    if !m.is_finite() {
        return Err(Error::InvalidArgument(format!("Dinkelbach numerator must be finite, got {m}")));
    }
    // M is a PSD quadratic form; clip solver round-off below zero.
    Ok(m.max(0.0) / n)
}

fn record(
    scn: &Scenario,
    iteration: usize,
    phase1: bool,
    c: Option<f64>,
    w: &[HermitianMatrix],
    rn: &HermitianMatrix,
    surrogate: f64,
    sol: &crate::conic::ConicSolution,
) -> Result<IterationRecord> {
    let eve = sinr_eve(scn, scn.target.theta0(), w, rn)?;
    let min_user = user_sinrs(scn, w, rn)?.into_iter().fold(f64::INFINITY, f64::min);
    Ok(IterationRecord {
        iteration,
        phase1,
        surrogate,
        c,
        y: Vec::new(),
        sinr_eve: eve,
        sum_sinr_eve: eve,
        min_user_sinr: min_user,
        solver_status: sol.status,
        solver_iterations: sol.iterations,
    })
}

/// Minimizes the eavesdropper SINR at θ0 subject to the user SINR floor,
/// the beampattern-mismatch bound and the power budget, over the
/// semidefinite relaxation. A feasibility solve seeds `c`; each iteration
/// then solves `min M - cN` and sets `c ← M/N` until `|Δc| < eps`.
pub fn solve_problem8(
    scn: &Scenario,
    r_d: &HermitianMatrix,
    thr: &Thresholds,
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    let families = [Family::UserSinr, Family::Beampattern];
    let (sub, sol) = phase1(|f| p8_problem(scn, r_d, thr, None, f), &families, &opts.solver)?;
    let (mut w, mut rn) = sub.vars.values(&sol);
    let mut trace = IterationTrace::default();
    trace.records.push(record(scn, 0, true, None, &w, &rn, 0.0, &sol)?);

    let (m, n) = ratio_terms(scn, &w, &rn)?;
    let mut c = dinkelbach_update(m, n)?;
    for t in 1..=opts.iter_max {
        let sub = assemble_p8_subproblem(scn, r_d, thr, c)?;
        let sol = match solve_sub(&sub, &opts.solver) {
            Ok(sol) => sol,
            Err(e @ Error::Solver { .. }) => {
                debug!("dinkelbach iter {t}: {e}");
                trace.stop = StopReason::SolverFailed(t);
                break;
            }
            Err(e) => return Err(e),
        };
        (w, rn) = sub.vars.values(&sol);
        let (m, n) = ratio_terms(scn, &w, &rn)?;
        let next = dinkelbach_update(m, n)?;
        trace.records.push(record(scn, t, false, Some(c), &w, &rn, m - c * n, &sol)?);
        debug!("dinkelbach iter {t}: c {c:.6e} -> {next:.6e}, surrogate {:.3e}", m - c * n);
        let done = (next - c).abs() < opts.eps;
        c = next;
        if done {
            trace.stop = StopReason::Converged;
            break;
        }
    }
    DesignSolution::assemble(DesignMode::Precise, scn, vec![scn.target.theta0()], w, rn, trace)
}
