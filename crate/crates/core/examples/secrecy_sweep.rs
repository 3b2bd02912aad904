//! A small secrecy-rate sweep over the user SINR floor, both designs, two
//! trials per point.

use secure_dfrc::harness::{sweep_secrecy_vs_gamma_b, ExperimentConfig, RunOptions, Sweep};

fn main() -> secure_dfrc::Result<()> {
    let cfg = ExperimentConfig {
        gamma_b_db: Sweep(vec![4.0, 12.0]),
        gamma_s: Sweep(vec![2.0]),
        trials: 2,
        seed: 3,
        ..ExperimentConfig::default()
    };
    let run = sweep_secrecy_vs_gamma_b(&cfg, &RunOptions::default())?;
    println!("{:<10} {:>5} {:>8} {:>9} {:>9}", "mode", "P0", "gamma_b", "mean SR", "std");
    for s in &run.summary {
        println!("{:<10} {:>5} {:>8} {:>9.4} {:>9.4}", s.mode.name(), s.p0_watts, s.gamma_b_db, s.mean, s.std);
    }
    Ok(())
}
