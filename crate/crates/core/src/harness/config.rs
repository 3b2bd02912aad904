use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which figure's data an experiment reproduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    /// Beampatterns of the precise design and of uncertain designs per Δθ.
    Fig2,
    /// Per-iteration eavesdropper SINR of both iterations on one channel.
    Fig3,
    /// Secrecy rate against the user SINR floor, both modes, per P0.
    Fig4,
    /// Secrecy rate of the uncertain design against the sidelobe gap.
    Fig5,
    /// Every combination of the sweeps, both modes; `trials.csv` only.
    Custom,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::Custom => "custom",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Experiment::Fig2),
            "fig3" => Ok(Experiment::Fig3),
            "fig4" => Ok(Experiment::Fig4),
            "fig5" => Ok(Experiment::Fig5),
            "custom" => Ok(Experiment::Custom),
            other => Err(Error::Config(format!("unknown experiment '{other}'"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SweepRepr {
    One(f64),
    Many(Vec<f64>),
}

/// A swept parameter. In the config file either a scalar or an array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "SweepRepr", into = "SweepRepr")]
pub struct Sweep(pub Vec<f64>);

impl From<SweepRepr> for Sweep {
    fn from(r: SweepRepr) -> Self {
        match r {
            SweepRepr::One(x) => Sweep(vec![x]),
            SweepRepr::Many(v) => Sweep(v),
        }
    }
}

impl From<Sweep> for SweepRepr {
    fn from(s: Sweep) -> Self {
        match s.0.as_slice() {
            [x] => SweepRepr::One(*x),
            _ => SweepRepr::Many(s.0),
        }
    }
}

impl Sweep {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn first(&self) -> f64 {
        self.0[0]
    }
}

impl From<Vec<f64>> for Sweep {
    fn from(v: Vec<f64>) -> Self {
        Sweep(v)
    }
}

/// Fields replaced when running at paper scale. Anything left out keeps the
/// smoke value, except that N and K default to 18 and 4 and trials to at
/// least 50.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleOverrides {
    pub n_antennas: Option<usize>,
    pub n_users: Option<usize>,
    pub trials: Option<usize>,
    pub p0_watts: Option<Sweep>,
    pub gamma_b_db: Option<Sweep>,
    pub gamma_bp: Option<f64>,
    pub gamma_s: Option<Sweep>,
}

/// One experiment. Powers are in watts, `gamma_bp` in W², `gamma_s` in W.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_antennas: usize,
    pub n_users: usize,
    pub frame_length: usize,
    pub theta0_deg: f64,
    /// Uncertainty half-widths. Fig. 2 draws one uncertain design per
    /// nonzero entry (and the precise design for 0); the other experiments
    /// use the first entry.
    pub delta_theta_deg: Sweep,
    pub noise_power: f64,
    pub target_gain_sq: f64,
    pub p0_watts: Sweep,
    pub gamma_b_db: Sweep,
    /// Bound on `‖R_X - R_d‖_F²`; `inf` drops it.
    pub gamma_bp: f64,
    pub gamma_s: Sweep,
    pub ripple: f64,
    pub grid_step_deg: f64,
    /// Half-width of the rectangular template behind `R_d`.
    pub mainlobe_halfwidth_deg: f64,
    pub sidelobe_guard_deg: f64,
    pub trials: usize,
    pub seed: u64,
    pub iter_max: usize,
    pub eps: f64,
    pub out_dir: PathBuf,
    pub paper_scale: Option<ScaleOverrides>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Custom,
            n_antennas: 8,
            n_users: 2,
            frame_length: 30,
            theta0_deg: 0.0,
            delta_theta_deg: Sweep(vec![5.0]),
            noise_power: 1e-3,
            target_gain_sq: 1.0,
            p0_watts: Sweep(vec![1.0]),
            gamma_b_db: Sweep(vec![10.0]),
            gamma_bp: 0.1,
            gamma_s: Sweep(vec![1.0]),
            ripple: 0.1,
            grid_step_deg: 1.0,
            mainlobe_halfwidth_deg: 10.0,
            sidelobe_guard_deg: 10.0,
            trials: 10,
            seed: 0,
            iter_max: 20,
            eps: 1e-3,
            out_dir: PathBuf::from("runs"),
            paper_scale: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The config with the paper-scale overrides applied.
    pub fn at_paper_scale(&self) -> Result<Self> {
        let o = self.paper_scale.clone().unwrap_or_default();
        let mut cfg = self.clone();
        cfg.paper_scale = None;
        cfg.n_antennas = o.n_antennas.unwrap_or(18);
        cfg.n_users = o.n_users.unwrap_or(4);
        cfg.trials = o.trials.unwrap_or(self.trials.max(50));
        if let Some(v) = o.p0_watts {
            cfg.p0_watts = v;
        }
        if let Some(v) = o.gamma_b_db {
            cfg.gamma_b_db = v;
        }
        if let Some(v) = o.gamma_bp {
            cfg.gamma_bp = v;
        }
        if let Some(v) = o.gamma_s {
            cfg.gamma_s = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_antennas < 2 {
            return fail(format!("n_antennas must be >= 2, got {}", self.n_antennas));
        }
        if self.n_users < 1 || self.frame_length < 1 || self.iter_max < 1 {
            return fail("n_users, frame_length and iter_max must be >= 1".into());
        }
        if self.trials < 1 {
            return fail("trials must be >= 1".into());
        }
        for (name, s) in [
            ("delta_theta_deg", &self.delta_theta_deg),
            ("p0_watts", &self.p0_watts),
            ("gamma_b_db", &self.gamma_b_db),
            ("gamma_s", &self.gamma_s),
        ] {
            if s.0.is_empty() {
                return fail(format!("sweep {name} is empty"));
            }
            if s.0.iter().any(|x| !x.is_finite()) {
                return fail(format!("sweep {name} has a non-finite value"));
            }
        }
        if self.p0_watts.0.iter().any(|&p| p <= 0.0) {
            return fail("p0_watts must be positive".into());
        }
        if self.delta_theta_deg.0.iter().any(|&d| d < 0.0 || self.theta0_deg.abs() + d > 90.0) {
            return fail("delta_theta_deg must be >= 0 and keep theta0 +- delta inside [-90, 90]".into());
        }
        if !(self.theta0_deg.abs() < 90.0) {
            return fail(format!("theta0_deg must lie in (-90, 90), got {}", self.theta0_deg));
        }
        let positive = [
            ("noise_power", self.noise_power),
            ("target_gain_sq", self.target_gain_sq),
            ("grid_step_deg", self.grid_step_deg),
            ("mainlobe_halfwidth_deg", self.mainlobe_halfwidth_deg),
            ("eps", self.eps),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.sidelobe_guard_deg >= 0.0) {
            return fail("sidelobe_guard_deg must be >= 0".into());
        }
        if !(self.gamma_bp >= 0.0) {
            return fail("gamma_bp must be >= 0 (inf disables it)".into());
        }
        if !(self.ripple > 0.0 && self.ripple < 1.0) {
            return fail(format!("ripple must lie in (0, 1), got {}", self.ripple));
        }
        Ok(())
    }
}
