use std::time::{Duration, Instant};

use log::{debug, warn};
use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::beampattern::{rect_pattern, solve_desired_covariance};
use crate::design::{solve_problem8, solve_problem9, DesignMode, DesignOptions, DesignSolution, StopReason, Thresholds};
use crate::error::{Error, Result};
use crate::linalg::HermitianMatrix;
use crate::scenario::{sample_channel, AngularGrid, Scenario, TargetModel, UlaGeometry};

/// Channel seed of one trial. Modes and P0 values at the same sweep point
/// share it, so their comparison is paired.
pub fn trial_seed(master: u64, trial: usize, sweep_index: usize) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((trial as u64).to_le_bytes());
    h.update((sweep_index as u64).to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrialStatus {
    Ok,
    /// Phase 1 proved the constraints cannot all be met.
    Infeasible,
    /// Any other error; the message is kept in `detail`.
    Failed,
}

impl TrialStatus {
    pub fn name(self) -> &'static str {
        match self {
            TrialStatus::Ok => "ok",
            TrialStatus::Infeasible => "infeasible",
            TrialStatus::Failed => "failed",
        }
    }
}

/// Parameters of one design run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPoint {
    pub mode: DesignMode,
    pub p0_watts: f64,
    pub gamma_b_db: f64,
    /// Only meaningful for the uncertain design.
    pub gamma_s: Option<f64>,
    pub delta_theta_deg: f64,
    pub sweep_index: usize,
    pub trial: usize,
}

#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub point: TrialPoint,
    pub seed: u64,
    pub status: TrialStatus,
    pub detail: String,
    pub stop: Option<StopReason>,
    /// Per main-loop iteration: the Dinkelbach parameter, or the
    /// quadratic-transform surrogate.
    pub c_or_obj: Vec<f64>,
    pub sinr_eve: f64,
    pub sinr_eve_worst: f64,
    pub min_user_sinr: f64,
    /// Secrecy rate of the relaxed design with the eavesdropper at θ0.
    pub secrecy_rate: f64,
    pub secrecy_rate_worst: f64,
    /// Secrecy rate after rank-one extraction.
    pub rank1_secrecy_rate: f64,
    pub rank1_defects: Vec<f64>,
    pub iterations: usize,
    pub solver_iterations: usize,
    pub wall_time: Duration,
}

impl TrialRecord {
    fn failed(point: TrialPoint, seed: u64, err: &Error, wall_time: Duration) -> Self {
        let (status, detail) = match err {
            Error::Infeasible { family } => (TrialStatus::Infeasible, family.clone()),
            e => (TrialStatus::Failed, e.to_string()),
        };
        Self {
            point,
            seed,
            status,
            detail,
            stop: None,
            c_or_obj: Vec::new(),
            sinr_eve: f64::NAN,
            sinr_eve_worst: f64::NAN,
            min_user_sinr: f64::NAN,
            secrecy_rate: f64::NAN,
            secrecy_rate_worst: f64::NAN,
            rank1_secrecy_rate: f64::NAN,
            rank1_defects: Vec::new(),
            iterations: 0,
            solver_iterations: 0,
            wall_time,
        }
    }

    fn from_solution(point: TrialPoint, seed: u64, sol: &DesignSolution, wall_time: Duration) -> Self {
        let c_or_obj = sol
            .trace
            .iterations()
            .map(|r| match point.mode {
                DesignMode::Precise => r.c.unwrap_or(f64::NAN),
                DesignMode::Uncertain => r.surrogate,
            })
            .collect::<Vec<_>>();
        Self {
            point,
            seed,
            status: TrialStatus::Ok,
            detail: String::new(),
            stop: Some(sol.trace.stop),
            iterations: c_or_obj.len(),
            c_or_obj,
            sinr_eve: sol.metrics.sinr_eve_theta0,
            sinr_eve_worst: sol.metrics.sinr_eve_worst,
            min_user_sinr: sol.metrics.min_user_sinr,
            secrecy_rate: sol.metrics.secrecy_rate,
            secrecy_rate_worst: sol.metrics.secrecy_rate_worst,
            rank1_secrecy_rate: sol.rank1_metrics.secrecy_rate,
            rank1_defects: sol.rank1_defect.clone(),
            solver_iterations: sol.trace.total_solver_iterations(),
            wall_time,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }
}

/// Everything a trial needs besides its own parameters.
pub struct TrialContext {
    pub cfg: ExperimentConfig,
    pub grid: AngularGrid,
    pub opts: DesignOptions,
    /// `R_d` per entry of `p0_watts`; empty when no precise design runs.
    desired: Vec<(f64, HermitianMatrix)>,
}

impl TrialContext {
    pub fn new(cfg: &ExperimentConfig, with_desired: bool) -> Result<Self> {
        cfg.validate()?;
        let grid = AngularGrid::full_range(cfg.grid_step_deg)?;
        let opts = DesignOptions {
            eps: cfg.eps,
            iter_max: cfg.iter_max,
            sidelobe_guard: cfg.sidelobe_guard_deg.to_radians(),
            ..DesignOptions::default()
        };
        let mut desired = Vec::new();
        if with_desired {
            let geom = UlaGeometry::half_wavelength(cfg.n_antennas)?;
            let pattern = rect_pattern(&grid, cfg.theta0_deg.to_radians(), cfg.mainlobe_halfwidth_deg.to_radians())?;
            for &p0 in cfg.p0_watts.values() {
                let d = solve_desired_covariance(&pattern, &geom, p0, &opts.solver)?;
                desired.push((p0, d.r_d));
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            opts,
            desired,
        })
    }

    pub fn desired(&self, p0: f64) -> Result<&HermitianMatrix> {
        self.desired
            .iter()
            .find(|(p, _)| *p == p0)
            .map(|(_, r)| r)
            .ok_or_else(|| Error::InvalidArgument(format!("no desired covariance for P0 = {p0}")))
    }

    pub fn scenario(&self, point: &TrialPoint, seed: u64) -> Result<Scenario> {
        let cfg = &self.cfg;
        let delta = match point.mode {
            DesignMode::Precise => 0.0,
            DesignMode::Uncertain => point.delta_theta_deg,
        };
        let target = TargetModel::new(
            cfg.theta0_deg.to_radians(),
            delta.to_radians(),
            Complex64::new(cfg.target_gain_sq.sqrt(), 0.0),
        )?;
        Scenario::new(
            UlaGeometry::half_wavelength(cfg.n_antennas)?,
            sample_channel(cfg.n_users, cfg.n_antennas, seed)?,
            cfg.noise_power,
            target,
            point.p0_watts,
            cfg.frame_length,
        )
    }

    pub fn thresholds(&self, point: &TrialPoint) -> Result<Thresholds> {
        let cfg = &self.cfg;
        match point.mode {
            DesignMode::Precise => Thresholds::with_gamma_b_db(point.gamma_b_db, cfg.gamma_bp, 0.0, cfg.ripple),
            DesignMode::Uncertain => Thresholds::with_gamma_b_db(
                point.gamma_b_db,
                f64::INFINITY,
                point.gamma_s.unwrap_or(cfg.gamma_s.first()),
                cfg.ripple,
            ),
        }
    }

    fn design(&self, point: &TrialPoint, seed: u64) -> Result<DesignSolution> {
        let scn = self.scenario(point, seed)?;
        let thr = self.thresholds(point)?;
        match point.mode {
            DesignMode::Precise => solve_problem8(&scn, self.desired(point.p0_watts)?, &thr, &self.opts),
            DesignMode::Uncertain => solve_problem9(&scn, &self.grid, &thr, &self.opts),
        }
    }

    /// Runs one design. Failures are recorded, not returned.
    pub fn run(&self, point: TrialPoint) -> (TrialRecord, Option<DesignSolution>) {
        let seed = trial_seed(self.cfg.seed, point.trial, point.sweep_index);
        let start = Instant::now();
        let out = self.design(&point, seed);
        let elapsed = start.elapsed();
        match out {
            Ok(sol) => {
                debug!("{:?} seed {seed}: SR {:.4}", point, sol.metrics.secrecy_rate);
                (TrialRecord::from_solution(point, seed, &sol, elapsed), Some(sol))
            }
            Err(e) => {
                warn!("{:?} seed {seed}: {e}", point);
                (TrialRecord::failed(point, seed, &e, elapsed), None)
            }
        }
    }

    /// Runs many designs on at most `jobs` threads (0 picks the core
    /// count). The output order is the input order.
    pub fn run_all(&self, points: &[TrialPoint], jobs: usize) -> Result<Vec<(TrialRecord, Option<DesignSolution>)>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("cannot build worker pool: {e}")))?;
        Ok(pool.install(|| points.par_iter().map(|&p| self.run(p)).collect()))
    }
}

/// Mean and sample standard deviation of the secrecy rate at one sweep
/// point, over the trials that solved.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub mode: DesignMode,
    pub p0_watts: f64,
    pub gamma_b_db: f64,
    pub gamma_s: Option<f64>,
    pub delta_theta_deg: f64,
    pub mean: f64,
    pub std: f64,
    pub n_ok: usize,
    pub n_failed: usize,
}

impl SweepSummary {
    fn matches(&self, p: &TrialPoint) -> bool {
        self.mode == p.mode
            && self.p0_watts == p.p0_watts
            && self.gamma_b_db == p.gamma_b_db
            && self.gamma_s == p.gamma_s
            && self.delta_theta_deg == p.delta_theta_deg
    }
}

/// Groups records by everything but the trial index, in order of first
/// appearance.
pub fn summarize(records: &[TrialRecord]) -> Vec<SweepSummary> {
    let mut out: Vec<(SweepSummary, Vec<f64>)> = Vec::new();
    for r in records {
        let p = &r.point;
        let idx = match out.iter().position(|(s, _)| s.matches(p)) {
            Some(i) => i,
            None => {
                let s = SweepSummary {
                    mode: p.mode,
                    p0_watts: p.p0_watts,
                    gamma_b_db: p.gamma_b_db,
                    gamma_s: p.gamma_s,
                    delta_theta_deg: p.delta_theta_deg,
                    mean: f64::NAN,
                    std: f64::NAN,
                    n_ok: 0,
                    n_failed: 0,
                };
                out.push((s, Vec::new()));
                out.len() - 1
            }
        };
        let (s, vals) = &mut out[idx];
        if r.is_ok() {
            s.n_ok += 1;
            vals.push(r.secrecy_rate);
        } else {
            s.n_failed += 1;
        }
    }
    out.into_iter()
        .map(|(mut s, v)| {
            if !v.is_empty() {
                let n = v.len() as f64;
                s.mean = v.iter().sum::<f64>() / n;
                s.std = if v.len() > 1 {
                    (v.iter().map(|x| (x - s.mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
                } else {
                    0.0
                };
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
        assert_ne!(trial_seed(1, 2, 3), trial_seed(1, 3, 2));
        assert_ne!(trial_seed(0, 0, 0), trial_seed(1, 0, 0));
    }

    fn rec(trial: usize, sr: f64, status: TrialStatus) -> TrialRecord {
        let point = TrialPoint {
            mode: DesignMode::Uncertain,
            p0_watts: 1.0,
            gamma_b_db: 10.0,
            gamma_s: Some(1.0),
            delta_theta_deg: 5.0,
            sweep_index: 0,
            trial,
        };
        let mut r = TrialRecord::failed(point, 0, &Error::Infeasible { family: "x".into() }, Duration::ZERO);
        r.status = status;
        r.secrecy_rate = sr;
        r
    }

    #[test]
    fn summary_skips_failed_trials() {
        let recs = vec![
            rec(0, 1.0, TrialStatus::Ok),
            rec(1, 3.0, TrialStatus::Ok),
            rec(2, f64::NAN, TrialStatus::Infeasible),
        ];
        let s = summarize(&recs);
        assert_eq!(s.len(), 1);
        assert_eq!((s[0].mean, s[0].n_ok, s[0].n_failed), (2.0, 2, 1));
        assert!((s[0].std - 2f64.sqrt()).abs() < 1e-15);
    }
}
