//! Secrecy-aware covariance design: the precise-angle problem solved by a
//! Dinkelbach iteration, the uncertain-angle problem solved by a quadratic
//! transform iteration, both over semidefinite relaxations, followed by
//! rank-one recovery.

mod assemble;
mod dinkelbach;
mod quadratic_transform;
mod rank1;
mod validate;

pub use assemble::{
    assemble_p8_subproblem, assemble_p9_subproblem, linearized_user_sinr_constraint, DesignVars, LinearizedSinr,
    PatternRegions, Subproblem,
};
pub use dinkelbach::{dinkelbach_update, solve_problem8};
pub use quadratic_transform::{quadratic_transform_update, solve_problem9};
pub use rank1::{extract_rank1, gaussian_randomization, RandomizationOutcome};
pub use validate::{check_covariances, validate_solution, ConstraintSlack, ValidationReport};

use crate::conic::{SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::linalg::{CVector, HermitianMatrix};
use crate::scenario::{secrecy_rate_from_sinrs, sinr_eve, sinr_eve_worst, transmit_covariance, user_sinrs, Scenario};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Per-user SINR floor, linear.
    pub gamma_b: f64,
    /// Bound on `‖R_X - R_d‖_F²`; `f64::INFINITY` drops the constraint.
    pub gamma_bp: f64,
    /// Required gap between the θ0 response and every sidelobe angle.
    pub gamma_s: f64,
    /// Mainlobe tolerance: responses over the uncertainty interval stay
    /// within `(1 ± ripple)` of the θ0 response.
    pub ripple: f64,
}

impl Thresholds {
    pub fn new(gamma_b: f64, gamma_bp: f64, gamma_s: f64, ripple: f64) -> Result<Self> {
        if !(gamma_b > 0.0 && gamma_b.is_finite()) {
            return Err(Error::InvalidArgument(format!("gamma_b must be positive, got {gamma_b}")));
        }
        if !(gamma_bp >= 0.0) {
            return Err(Error::InvalidArgument(format!("gamma_bp must be >= 0, got {gamma_bp}")));
        }
        if !gamma_s.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma_s must be finite, got {gamma_s}")));
        }
        if !(ripple > 0.0 && ripple < 1.0) {
            return Err(Error::InvalidArgument(format!("ripple must lie in (0, 1), got {ripple}")));
        }
        Ok(Self {
            gamma_b,
            gamma_bp,
            gamma_s,
            ripple,
        })
    }

    /// Same, with `gamma_b` given in dB.
    pub fn with_gamma_b_db(gamma_b_db: f64, gamma_bp: f64, gamma_s: f64, ripple: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma_b_db), gamma_bp, gamma_s, ripple)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone)]
pub struct DesignOptions {
    /// Stopping threshold on `|Δc|` (Dinkelbach) or `‖Δy‖∞` (quadratic
    /// transform).
    pub eps: f64,
    pub iter_max: usize,
    pub solver: SolverOptions,
    /// Angular guard between the uncertainty interval and the sidelobe
    /// region, radians.
    pub sidelobe_guard: f64,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            eps: 1e-3,
            iter_max: 20,
            solver: SolverOptions::default(),
            sidelobe_guard: 10f64.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignMode {
    /// Target angle known exactly, covariance matched to `R_d`.
    Precise,
    /// Target somewhere in `[θ0 - Δθ, θ0 + Δθ]`.
    Uncertain,
}

impl DesignMode {
    pub fn name(self) -> &'static str {
        match self {
            DesignMode::Precise => "precise",
            DesignMode::Uncertain => "uncertain",
        }
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    /// The feasibility solve that seeds the iteration.
    pub phase1: bool,
    /// Surrogate value at the solved point: `M - cN` for Dinkelbach, the
    /// quadratic-transform objective otherwise.
    pub surrogate: f64,
    /// Dinkelbach parameter used for this solve (`0` for phase 1).
    pub c: Option<f64>,
    /// Quadratic-transform weights used for this solve.
    pub y: Vec<f64>,
    /// Eavesdropper SINR at θ0 after this solve.
    pub sinr_eve: f64,
    /// `Σ SINR_E` over the uncertainty angles (equals `sinr_eve` for the
    /// precise design).
    pub sum_sinr_eve: f64,
    pub min_user_sinr: f64,
    pub solver_status: SolveStatus,
    pub solver_iterations: usize,
}

/// Why an iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum StopReason {
    /// The update fell below `eps`.
    Converged,
    #[default]
    IterationLimit,
    /// The beamformers nulled the eavesdropper at this angle (degrees) to
    /// solver precision, so the quadratic-transform weight is undefined.
    SignalNulled(f64),
    /// The subproblem of this iteration did not solve; the design is the
    /// previous iterate. The feasible set never changes between iterations,
    /// so this is a numerical failure, not infeasibility.
    SolverFailed(usize),
}

#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub stop: StopReason,
}

impl IterationTrace {
    pub fn converged(&self) -> bool {
        self.stop == StopReason::Converged
    }

    /// Records of the main loop, phase 1 excluded.
    pub fn iterations(&self) -> impl Iterator<Item = &IterationRecord> {
        self.records.iter().filter(|r| !r.phase1)
    }

    pub fn total_solver_iterations(&self) -> usize {
        self.records.iter().map(|r| r.solver_iterations).sum()
    }
}

#[derive(Debug, Clone)]
pub struct DesignMetrics {
    pub user_sinrs: Vec<f64>,
    pub min_user_sinr: f64,
    pub sinr_eve_theta0: f64,
    /// Largest eavesdropper SINR over the uncertainty angles.
    pub sinr_eve_worst: f64,
    /// Secrecy rate with the eavesdropper at θ0.
    pub secrecy_rate: f64,
    /// Secrecy rate against the worst angle of the uncertainty interval.
    pub secrecy_rate_worst: f64,
    pub total_power: f64,
}

impl DesignMetrics {
    pub fn evaluate(scn: &Scenario, phi: &[f64], w_list: &[HermitianMatrix], r_n: &HermitianMatrix) -> Result<Self> {
        let users = user_sinrs(scn, w_list, r_n)?;
        let min_user = users.iter().copied().fold(f64::INFINITY, f64::min);
        let eve0 = sinr_eve(scn, scn.target.theta0(), w_list, r_n)?;
        let worst = if phi.is_empty() { eve0 } else { sinr_eve_worst(scn, phi, w_list, r_n)?.max(eve0) };
        let total_power = transmit_covariance(w_list, r_n)?.trace();
        Ok(Self {
            secrecy_rate: secrecy_rate_from_sinrs(&users, eve0),
            secrecy_rate_worst: secrecy_rate_from_sinrs(&users, worst),
            user_sinrs: users,
            min_user_sinr: min_user,
            sinr_eve_theta0: eve0,
            sinr_eve_worst: worst,
            total_power,
        })
    }
}

#[derive(Debug, Clone)]
pub struct DesignSolution {
    pub mode: DesignMode,
    /// Relaxed beamforming covariances.
    pub w_list: Vec<HermitianMatrix>,
    /// Rank-one beamformers recovered by eigendecomposition.
    pub w_vecs: Vec<CVector>,
    pub r_n: HermitianMatrix,
    pub r_x: HermitianMatrix,
    pub trace: IterationTrace,
    /// Uncertainty angles the design was evaluated over (`[θ0]` when precise).
    pub phi: Vec<f64>,
    /// Metrics of the relaxed covariances.
    pub metrics: DesignMetrics,
    /// Metrics with each `W_i` replaced by `w_i w_i^H`.
    pub rank1_metrics: DesignMetrics,
    /// `1 - λmax / tr` per `W_i`.
    pub rank1_defect: Vec<f64>,
}

impl DesignSolution {
    pub(crate) fn assemble(
        mode: DesignMode,
        scn: &Scenario,
        phi: Vec<f64>,
        w_list: Vec<HermitianMatrix>,
        r_n: HermitianMatrix,
        trace: IterationTrace,
    ) -> Result<Self> {
        let mut w_vecs = Vec::with_capacity(w_list.len());
        let mut defects = Vec::with_capacity(w_list.len());
        for w in &w_list {
            let (v, d) = extract_rank1(w)?;
            w_vecs.push(v);
            defects.push(d);
        }
        let rank1: Vec<HermitianMatrix> = w_vecs.iter().map(HermitianMatrix::outer).collect();
        let r_x = transmit_covariance(&w_list, &r_n)?;
        let metrics = DesignMetrics::evaluate(scn, &phi, &w_list, &r_n)?;
        let rank1_metrics = DesignMetrics::evaluate(scn, &phi, &rank1, &r_n)?;
        Ok(Self {
            mode,
            w_list,
            w_vecs,
            r_n,
            r_x,
            trace,
            phi,
            metrics,
            rank1_metrics,
            rank1_defect: defects,
        })
    }

    /// The rank-one covariances `w_i w_i^H`.
    pub fn rank1_covariances(&self) -> Vec<HermitianMatrix> {
        self.w_vecs.iter().map(HermitianMatrix::outer).collect()
    }
}
