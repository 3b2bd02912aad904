//! Quadratic-transform iteration for the uncertain-angle design.

use log::debug;

use super::assemble::{assemble_p9_subproblem, p9_problem, phase1, qt_terms, solve_sub, Family, PatternRegions};
use super::{DesignMode, DesignOptions, DesignSolution, IterationRecord, IterationTrace, StopReason, Thresholds};
use crate::conic::ConicSolution;
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::scenario::{sinr_eve, user_sinrs, AngularGrid, Scenario};

/// `y = √A / B`, the maximizer of `2y√A - y²B`. A nonpositive `B` means the
/// beamformers carry no power toward that angle; the caller has to
/// reinitialize.
pub fn quadratic_transform_update(a: f64, b: f64) -> Result<f64> {
    if !(a >= 0.0 && a.is_finite()) {
        return Err(Error::InvalidArgument(format!("A must be finite and >= 0, got {a}")));
    }
    if !(b > 0.0) {
        return Err(Error::VanishingSignal { angle_deg: f64::NAN });
    }
    Ok(a.sqrt() / b)
}

struct Eval {
    /// Next weights, or the first angle (radians) whose `B` is zero to
    /// solver precision.
    y_next: std::result::Result<Vec<f64>, f64>,
    surrogate: f64,
    sum_sinr: f64,
}

/// `B` below this fraction of its largest possible value, `|α|² N Σ tr W_i`,
/// is indistinguishable from zero at the solver's accuracy.
const NULL_FRACTION: f64 = 1e-8;

fn evaluate(
    scn: &Scenario,
    phi: &[f64],
    y: Option<&[f64]>,
    w: &[HermitianMatrix],
    rn: &HermitianMatrix,
) -> Result<Eval> {
    let signal_power: f64 = w.iter().map(|m| m.trace()).sum();
    let floor = NULL_FRACTION * scn.target.gain_sq() * scn.n_antennas() as f64 * signal_power.max(0.0);
    let mut y_next = Ok(Vec::with_capacity(phi.len()));
    let mut surrogate = 0.0;
    let mut sum_sinr = 0.0;
    for (m, &theta) in phi.iter().enumerate() {
        let (a, b) = qt_terms(scn, theta, w, rn)?;
        if let Some(y) = y {
            surrogate += 2.0 * y[m] * a.sqrt() - y[m] * y[m] * b;
        }
        sum_sinr += b.max(0.0) / a;
        log::trace!("theta {:.2} deg: A {a:.6e} B {b:.6e}", theta.to_degrees());
        if let Ok(next) = &mut y_next {
            if b <= floor {
                y_next = Err(theta);
            } else {
                next.push(quadratic_transform_update(a, b)?);
            }
        }
    }
    Ok(Eval {
        y_next,
        surrogate,
        sum_sinr,
    })
}

#[allow(clippy::too_many_arguments)]
fn record(
    scn: &Scenario,
    iteration: usize,
    phase1: bool,
    y: Vec<f64>,
    eval: &Eval,
    w: &[HermitianMatrix],
    rn: &HermitianMatrix,
    sol: &ConicSolution,
) -> Result<IterationRecord> {
    Ok(IterationRecord {
        iteration,
        phase1,
        surrogate: eval.surrogate,
        c: None,
        y,
        sinr_eve: sinr_eve(scn, scn.target.theta0(), w, rn)?,
        sum_sinr_eve: eval.sum_sinr,
        min_user_sinr: user_sinrs(scn, w, rn)?.into_iter().fold(f64::INFINITY, f64::min),
        solver_status: sol.status,
        solver_iterations: sol.iterations,
    })
}

/// Minimizes the eavesdropper SINR summed over the uncertainty interval
/// subject to the user SINR floor, the sidelobe gap, the mainlobe ripple
/// and the power budget. Alternates the closed-form `y` update with the
/// convex surrogate solve until `‖Δy‖∞ < eps`.
pub fn solve_problem9(
    scn: &Scenario,
    grid: &AngularGrid,
    thr: &Thresholds,
    opts: &DesignOptions,
) -> Result<DesignSolution> {
    let regions = PatternRegions::new(scn, grid, opts.sidelobe_guard)?;
    let families = [Family::UserSinr, Family::Sidelobe, Family::Ripple];
    let (sub, sol) = phase1(|f| p9_problem(scn, &regions, thr, None, f), &families, &opts.solver)?;
    let (mut w, mut rn) = sub.vars.values(&sol);
    let eval = evaluate(scn, &regions.phi, None, &w, &rn)?;
    let mut trace = IterationTrace::default();
    trace.records.push(record(scn, 0, true, Vec::new(), &eval, &w, &rn, &sol)?);

    let mut y = match eval.y_next {
        Ok(y) => y,
        Err(theta) => {
            return Err(Error::VanishingSignal {
                angle_deg: theta.to_degrees(),
            })
        }
    };
    for t in 1..=opts.iter_max {
        let sub = assemble_p9_subproblem(scn, &regions, thr, &y)?;
        let sol = match solve_sub(&sub, &opts.solver) {
            Ok(sol) => sol,
            Err(e @ Error::Solver { .. }) => {
                debug!("quadratic transform iter {t}: {e}");
                trace.stop = StopReason::SolverFailed(t);
                break;
            }
            Err(e) => return Err(e),
        };
        (w, rn) = sub.vars.values(&sol);
        let eval = evaluate(scn, &regions.phi, Some(&y), &w, &rn)?;
        debug!(
            "quadratic transform iter {t}: surrogate {:.6e}, sum SINR_E {:.4e}",
            eval.surrogate, eval.sum_sinr
        );
        trace.records.push(record(scn, t, false, y.clone(), &eval, &w, &rn, &sol)?);
        let next = match eval.y_next {
            Ok(next) => next,
            Err(theta) => {
                trace.stop = StopReason::SignalNulled(theta.to_degrees());
                break;
            }
        };
        let step = y.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        y = next;
        if step < opts.eps {
            trace.stop = StopReason::Converged;
            break;
        }
    }
    DesignSolution::assemble(DesignMode::Uncertain, scn, regions.phi, w, rn, trace)
}
