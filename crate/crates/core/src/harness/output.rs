use std::path::Path;

use serde::Serialize;

use super::trials::TrialRecord;
use crate::design::StopReason;
use crate::error::Result;

pub const BEAMPATTERN_HEADER: [&str; 3] = ["theta_deg", "design", "power_linear"];
pub const CONVERGENCE_HEADER: [&str; 4] = ["algorithm", "iteration", "c_or_obj", "sinr_eve_linear"];
pub const GAMMA_B_HEADER: [&str; 5] = ["mode", "p0_watts", "gamma_b_db", "trial", "secrecy_rate_bits"];
pub const GAMMA_S_HEADER: [&str; 4] = ["gamma_b_db", "gamma_s", "trial", "secrecy_rate_bits"];
pub const TRIALS_HEADER: [&str; 22] = [
    "experiment",
    "mode",
    "p0_watts",
    "gamma_b_db",
    "gamma_s",
    "delta_theta_deg",
    "sweep_index",
    "trial",
    "seed",
    "status",
    "detail",
    "stop",
    "iterations",
    "solver_iterations",
    "sinr_eve_linear",
    "sinr_eve_worst_linear",
    "min_user_sinr_linear",
    "secrecy_rate_bits",
    "secrecy_rate_worst_bits",
    "rank1_secrecy_rate_bits",
    "rank1_defect_max",
    "c_or_obj_trace",
];

/// Writes the header even when there are no rows.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn stop_label(stop: Option<StopReason>) -> String {
    match stop {
        None => String::new(),
        Some(StopReason::Converged) => "converged".into(),
        Some(StopReason::IterationLimit) => "iteration_limit".into(),
        Some(StopReason::SignalNulled(deg)) => format!("signal_nulled@{deg:.3}deg"),
        Some(StopReason::SolverFailed(t)) => format!("solver_failed@{t}"),
    }
}

#[derive(Serialize)]
struct TrialRow<'a> {
    experiment: &'a str,
    mode: &'a str,
    p0_watts: f64,
    gamma_b_db: f64,
    gamma_s: Option<f64>,
    delta_theta_deg: f64,
    sweep_index: usize,
    trial: usize,
    seed: u64,
    status: &'a str,
    detail: &'a str,
    stop: String,
    iterations: usize,
    solver_iterations: usize,
    sinr_eve: f64,
    sinr_eve_worst: f64,
    min_user_sinr: f64,
    secrecy_rate: f64,
    secrecy_rate_worst: f64,
    rank1_secrecy_rate: f64,
    rank1_defect_max: f64,
    c_or_obj_trace: String,
}

pub fn write_trials(path: &Path, experiment: &str, records: &[TrialRecord]) -> Result<()> {
    let rows = records.iter().map(|r| {
        let p = &r.point;
        TrialRow {
            experiment,
            mode: p.mode.name(),
            p0_watts: p.p0_watts,
            gamma_b_db: p.gamma_b_db,
            gamma_s: p.gamma_s,
            delta_theta_deg: p.delta_theta_deg,
            sweep_index: p.sweep_index,
            trial: p.trial,
            seed: r.seed,
            status: r.status.name(),
            detail: &r.detail,
            stop: stop_label(r.stop),
            iterations: r.iterations,
            solver_iterations: r.solver_iterations,
            sinr_eve: r.sinr_eve,
            sinr_eve_worst: r.sinr_eve_worst,
            min_user_sinr: r.min_user_sinr,
            secrecy_rate: r.secrecy_rate,
            secrecy_rate_worst: r.secrecy_rate_worst,
            rank1_secrecy_rate: r.rank1_secrecy_rate,
            rank1_defect_max: r.rank1_defects.iter().copied().fold(f64::NAN, f64::max),
            c_or_obj_trace: r.c_or_obj.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";"),
        }
    });
    write_csv(path, &TRIALS_HEADER, rows)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
