//! Experiment configuration, seeded Monte-Carlo trials and CSV output for
//! the four figure experiments.
//!
//! Every CSV is a pure function of the config: trials run in parallel but
//! rows are emitted in sweep order, and timings only go to `manifest.txt`.

mod config;
mod output;
mod trials;

pub use config::{Experiment, ExperimentConfig, ScaleOverrides, Sweep};
pub use output::{
    write_csv, BEAMPATTERN_HEADER, CONVERGENCE_HEADER, GAMMA_B_HEADER, GAMMA_S_HEADER, TRIALS_HEADER,
};
pub use trials::{summarize, trial_seed, SweepSummary, TrialContext, TrialPoint, TrialRecord, TrialStatus};

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::info;

use crate::design::{DesignMode, DesignSolution};
use crate::error::Result;
use crate::linalg::quadratic_form;

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
}

#[derive(Debug)]
pub struct RunOutput {
    /// CSV files written, in order.
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SweepSummary>,
    pub wall_time: Duration,
}

/// Records and per-point statistics of one sweep.
#[derive(Debug)]
pub struct SweepRun {
    pub records: Vec<TrialRecord>,
    pub summary: Vec<SweepSummary>,
}

fn uncertain_point(cfg: &ExperimentConfig, p0: f64, gamma_b_db: f64, gamma_s: f64, sweep_index: usize, trial: usize) -> TrialPoint {
    TrialPoint {
        mode: DesignMode::Uncertain,
        p0_watts: p0,
        gamma_b_db,
        gamma_s: Some(gamma_s),
        delta_theta_deg: cfg.delta_theta_deg.first(),
        sweep_index,
        trial,
    }
}

fn precise_point(p0: f64, gamma_b_db: f64, sweep_index: usize, trial: usize) -> TrialPoint {
    TrialPoint {
        mode: DesignMode::Precise,
        p0_watts: p0,
        gamma_b_db,
        gamma_s: None,
        delta_theta_deg: 0.0,
        sweep_index,
        trial,
    }
}

/// Both modes, every P0, every γ_b. The sweep index is the γ_b index, so
/// the two modes and all P0 values see the same channels.
pub fn gamma_b_points(cfg: &ExperimentConfig) -> Vec<TrialPoint> {
    let mut out = Vec::new();
    for mode in [DesignMode::Precise, DesignMode::Uncertain] {
        for &p0 in cfg.p0_watts.values() {
            for (gi, &gb) in cfg.gamma_b_db.values().iter().enumerate() {
                for trial in 0..cfg.trials {
                    out.push(match mode {
                        DesignMode::Precise => precise_point(p0, gb, gi, trial),
                        DesignMode::Uncertain => uncertain_point(cfg, p0, gb, cfg.gamma_s.first(), gi, trial),
                    });
                }
            }
        }
    }
    out
}

/// The uncertain design at the first P0, every γ_b, every γ_s. The sweep
/// index is the γ_s index.
pub fn gamma_s_points(cfg: &ExperimentConfig) -> Vec<TrialPoint> {
    let p0 = cfg.p0_watts.first();
    let mut out = Vec::new();
    for &gb in cfg.gamma_b_db.values() {
        for (si, &gs) in cfg.gamma_s.values().iter().enumerate() {
            for trial in 0..cfg.trials {
                out.push(uncertain_point(cfg, p0, gb, gs, si, trial));
            }
        }
    }
    out
}

fn custom_points(cfg: &ExperimentConfig) -> Vec<TrialPoint> {
    let mut out = Vec::new();
    for &p0 in cfg.p0_watts.values() {
        for (gi, &gb) in cfg.gamma_b_db.values().iter().enumerate() {
            for trial in 0..cfg.trials {
                out.push(precise_point(p0, gb, gi, trial));
            }
            for &gs in cfg.gamma_s.values() {
                for &dt in cfg.delta_theta_deg.values() {
                    for trial in 0..cfg.trials {
                        out.push(TrialPoint {
                            delta_theta_deg: dt,
                            ..uncertain_point(cfg, p0, gb, gs, gi, trial)
                        });
                    }
                }
            }
        }
    }
    out
}

/// Secrecy rate against the user SINR floor, precise and uncertain, per P0.
pub fn sweep_secrecy_vs_gamma_b(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepRun> {
    let ctx = TrialContext::new(cfg, true)?;
    let records = records_only(ctx.run_all(&gamma_b_points(cfg), opts.jobs)?);
    let summary = summarize(&records);
    Ok(SweepRun { records, summary })
}

/// Secrecy rate of the uncertain design against the sidelobe gap, per γ_b.
pub fn sweep_secrecy_vs_gamma_s(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepRun> {
    let ctx = TrialContext::new(cfg, false)?;
    let records = records_only(ctx.run_all(&gamma_s_points(cfg), opts.jobs)?);
    let summary = summarize(&records);
    Ok(SweepRun { records, summary })
}

fn records_only(runs: Vec<(TrialRecord, Option<DesignSolution>)>) -> Vec<TrialRecord> {
    runs.into_iter().map(|(r, _)| r).collect()
}

/// Label of a Fig. 2 curve.
pub fn design_label(delta_theta_deg: f64) -> String {
    if delta_theta_deg == 0.0 {
        "precise".into()
    } else {
        format!("uncertain_{delta_theta_deg}deg")
    }
}

fn run_fig2(ctx: &TrialContext, opts: &RunOptions, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Vec<TrialRecord>> {
    let cfg = &ctx.cfg;
    let (p0, gb, gs) = (cfg.p0_watts.first(), cfg.gamma_b_db.first(), cfg.gamma_s.first());
    let points: Vec<TrialPoint> = cfg
        .delta_theta_deg
        .values()
        .iter()
        .map(|&dt| {
            if dt == 0.0 {
                precise_point(p0, gb, 0, 0)
            } else {
                TrialPoint {
                    delta_theta_deg: dt,
                    ..uncertain_point(cfg, p0, gb, gs, 0, 0)
                }
            }
        })
        .collect();
    let runs = ctx.run_all(&points, opts.jobs)?;
    let geom = crate::scenario::UlaGeometry::half_wavelength(cfg.n_antennas)?;
    let degrees = ctx.grid.degrees();
    let mut rows = Vec::new();
    for (rec, sol) in &runs {
        let label = design_label(rec.point.delta_theta_deg);
        for (&deg, &theta) in degrees.iter().zip(ctx.grid.angles()) {
            let power = match sol {
                Some(s) => quadratic_form(&geom.steering(theta), &s.r_x)?,
                None => f64::NAN,
            };
            rows.push((deg, label.clone(), power));
        }
    }
    let path = dir.join("beampattern.csv");
    write_csv(&path, &BEAMPATTERN_HEADER, rows)?;
    files.push(path);
    Ok(records_only(runs))
}

fn run_fig3(ctx: &TrialContext, opts: &RunOptions, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Vec<TrialRecord>> {
    let cfg = &ctx.cfg;
    let (p0, gb, gs) = (cfg.p0_watts.first(), cfg.gamma_b_db.first(), cfg.gamma_s.first());
    let points = [precise_point(p0, gb, 0, 0), uncertain_point(cfg, p0, gb, gs, 0, 0)];
    let runs = ctx.run_all(&points, opts.jobs)?;
    let mut rows = Vec::new();
    for (rec, sol) in &runs {
        let Some(sol) = sol else { continue };
        for r in &sol.trace.records {
            // Phase 1 runs with c = 0; the transform has no weights yet.
            let (algo, value) = match rec.point.mode {
                DesignMode::Precise => ("dinkelbach", r.c.unwrap_or(0.0)),
                DesignMode::Uncertain => ("quadratic_transform", if r.phase1 { f64::NAN } else { r.surrogate }),
            };
            rows.push((algo, r.iteration, value, r.sinr_eve));
        }
    }
    let path = dir.join("convergence.csv");
    write_csv(&path, &CONVERGENCE_HEADER, rows)?;
    files.push(path);
    Ok(records_only(runs))
}

fn run_fig4(ctx: &TrialContext, opts: &RunOptions, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Vec<TrialRecord>> {
    let records = records_only(ctx.run_all(&gamma_b_points(&ctx.cfg), opts.jobs)?);
    let rows = records.iter().map(|r| {
        let p = &r.point;
        (p.mode.name(), p.p0_watts, p.gamma_b_db, p.trial, r.secrecy_rate)
    });
    let path = dir.join("secrecy_vs_gamma_b.csv");
    write_csv(&path, &GAMMA_B_HEADER, rows)?;
    files.push(path);
    Ok(records)
}

fn run_fig5(ctx: &TrialContext, opts: &RunOptions, dir: &Path, files: &mut Vec<PathBuf>) -> Result<Vec<TrialRecord>> {
    let records = records_only(ctx.run_all(&gamma_s_points(&ctx.cfg), opts.jobs)?);
    let rows = records.iter().map(|r| {
        let p = &r.point;
        (p.gamma_b_db, p.gamma_s.unwrap_or(f64::NAN), p.trial, r.secrecy_rate)
    });
    let path = dir.join("secrecy_vs_gamma_s.csv");
    write_csv(&path, &GAMMA_S_HEADER, rows)?;
    files.push(path);
    Ok(records)
}

/// Runs the configured experiment into `cfg.out_dir`: the figure CSV,
/// `trials.csv` with one row per design run, and `manifest.txt`. Failed
/// trials are recorded with NaN metrics; only config or I/O problems abort.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutput> {
    let start = Instant::now();
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    fs::create_dir_all(&dir)?;
    let needs_desired = cfg.experiment != Experiment::Fig5;
    let ctx = TrialContext::new(cfg, needs_desired)?;
    let mut files = Vec::new();
    let records = match cfg.experiment {
        Experiment::Fig2 => run_fig2(&ctx, opts, &dir, &mut files)?,
        Experiment::Fig3 => run_fig3(&ctx, opts, &dir, &mut files)?,
        Experiment::Fig4 => run_fig4(&ctx, opts, &dir, &mut files)?,
        Experiment::Fig5 => run_fig5(&ctx, opts, &dir, &mut files)?,
        Experiment::Custom => records_only(ctx.run_all(&custom_points(cfg), opts.jobs)?),
    };
    let trials_path = dir.join("trials.csv");
    output::write_trials(&trials_path, cfg.experiment.name(), &records)?;
    files.push(trials_path);
    let summary = summarize(&records);
    let wall_time = start.elapsed();
    let manifest = dir.join("manifest.txt");
    fs::write(&manifest, manifest_text(cfg, opts, &files, &records, &summary, wall_time)?)?;
    info!("{} finished in {:.1} s", cfg.experiment, wall_time.as_secs_f64());
    Ok(RunOutput {
        files,
        manifest,
        records,
        summary,
        wall_time,
    })
}

fn manifest_text(
    cfg: &ExperimentConfig,
    opts: &RunOptions,
    files: &[PathBuf],
    records: &[TrialRecord],
    summary: &[SweepSummary],
    wall_time: Duration,
) -> Result<String> {
    let config = cfg.to_toml();
    let mut s = String::new();
    let count = |st: TrialStatus| records.iter().filter(|r| r.status == st).count();
    let trial_secs: Vec<f64> = records.iter().map(|r| r.wall_time.as_secs_f64()).collect();
    writeln!(s, "secure-dfrc {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(s, "experiment: {}", cfg.experiment).unwrap();
    writeln!(s, "seed: {}", cfg.seed).unwrap();
    writeln!(s, "jobs: {}", opts.jobs).unwrap();
    writeln!(s, "config_sha256: {}", output::sha256_hex(config.as_bytes())).unwrap();
    writeln!(
        s,
        "trials: {} ok, {} infeasible, {} failed",
        count(TrialStatus::Ok),
        count(TrialStatus::Infeasible),
        count(TrialStatus::Failed)
    )
    .unwrap();
    writeln!(s, "wall_clock_seconds: {:.3}", wall_time.as_secs_f64()).unwrap();
    writeln!(
        s,
        "trial_seconds: total {:.3}, max {:.3}",
        trial_secs.iter().sum::<f64>(),
        trial_secs.iter().copied().fold(0.0, f64::max)
    )
    .unwrap();
    writeln!(s, "outputs:").unwrap();
    for f in files {
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        writeln!(s, "  {name} sha256 {}", output::sha256_hex(&fs::read(f)?)).unwrap();
    }
    writeln!(s, "secrecy_rate_summary:").unwrap();
    for p in summary {
        let gs = p.gamma_s.map_or(String::from("-"), |g| g.to_string());
        writeln!(
            s,
            "  {} p0={} gamma_b_db={} gamma_s={} delta_theta_deg={}: mean {:.6} std {:.6} ({} ok, {} failed)",
            p.mode.name(),
            p.p0_watts,
            p.gamma_b_db,
            gs,
            p.delta_theta_deg,
            p.mean,
            p.std,
            p.n_ok,
            p.n_failed
        )
        .unwrap();
    }
    writeln!(s, "config:").unwrap();
    s.push_str(&config);
    Ok(s)
}
