use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use secure_dfrc::harness::{run_experiment, Experiment, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "secure-dfrc", about = "Secure DFRC beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment and write its CSVs and manifest.
    Run {
        #[arg(long)]
        experiment: Experiment,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the config output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// N = 18, K = 4, at least 50 trials, plus the config's
        /// [paper_scale] overrides.
        #[arg(long)]
        paper_scale: bool,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Parse and check a config file.
    ValidateConfig { path: PathBuf },
    /// Print the version.
    Version,
}

fn run(cli: Cli) -> secure_dfrc::Result<()> {
    match cli.cmd {
        Cmd::Run {
            experiment,
            config,
            seed,
            out,
            paper_scale,
            jobs,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if cfg.experiment != experiment {
                return Err(secure_dfrc::Error::Config(format!(
                    "{} is a {} config, not {experiment}",
                    config.display(),
                    cfg.experiment
                )));
            }
            if paper_scale {
                cfg = cfg.at_paper_scale()?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            let res = run_experiment(&cfg, &RunOptions { jobs })?;
            for f in res.files.iter().chain(std::iter::once(&res.manifest)) {
                println!("{}", f.display());
            }
            let failed = res.records.iter().filter(|r| !r.is_ok()).count();
            if failed > 0 {
                eprintln!("{failed} of {} design runs did not solve; see trials.csv", res.records.len());
            }
        }
        Cmd::ValidateConfig { path } => {
            let cfg = ExperimentConfig::load(&path)?;
            if cfg.paper_scale.is_some() {
                cfg.at_paper_scale()?;
            }
            println!("{}: ok ({})", path.display(), cfg.experiment);
        }
        Cmd::Version => println!("secure-dfrc {}", env!("CARGO_PKG_VERSION")),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
