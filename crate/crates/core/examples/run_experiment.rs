//! Run one experiment config end to end.
//!
//! `cargo run --release --example run_experiment -- configs/fig3.toml [out-dir]`

use std::path::PathBuf;

use secure_dfrc::harness::{run_experiment, ExperimentConfig, RunOptions};

fn main() -> secure_dfrc::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/fig3.toml")));
    let mut cfg = ExperimentConfig::load(&config)?;
    cfg.out_dir = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("secure-dfrc-example"));
    let out = run_experiment(&cfg, &RunOptions::default())?;
    for f in &out.files {
        println!("wrote {}", f.display());
    }
    println!("manifest {}", out.manifest.display());
    Ok(())
}
