use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::envgen::{make_hard_sequence, make_lower_bound_instance, make_perturbation_pair, make_random_proper, LowerBoundSpec};
use crate::error::{Error, Result};
use crate::master::DEFAULT_KAPPA_B;
use crate::model::DriftSequence;
use crate::mvp::ConfidenceConstants;
use crate::sim::{stream_seed, CostNoise};

/// Label of the stream that draws instance randomness left unseeded.
pub const INSTANCE_STREAM: &str = "instance";

/// Named generators. Omitted seeds are derived from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Preset {
    /// Single-state pair with a `(+dc, -dp/2)` change halfway.
    Pair {
        #[serde(default = "two")]
        b_star: f64,
        #[serde(default = "ten")]
        t_star: f64,
        #[serde(default)]
        dc: f64,
        #[serde(default)]
        dp: f64,
    },
    /// One stationary lower-bound instance.
    LowerBound {
        n: usize,
        b_star: f64,
        t_star: f64,
        #[serde(default)]
        good_cost: usize,
        #[serde(default)]
        good_trans: usize,
    },
    /// Piecewise lower-bound sequence with cost perturbations only.
    LbCost {
        n: usize,
        b_star: f64,
        t_star: f64,
        delta_c: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Piecewise lower-bound sequence with transition perturbations only.
    LbTrans {
        n: usize,
        b_star: f64,
        t_star: f64,
        delta_p: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Piecewise sequence of lower-bound instances with cost then
    /// transition perturbations.
    LbMixed {
        n: usize,
        b_star: f64,
        t_star: f64,
        delta_c: f64,
        delta_p: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Stationary random proper instance.
    Random {
        states: usize,
        actions: usize,
        #[serde(default = "goal_floor")]
        goal_prob_floor: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn two() -> f64 {
    2.0
}

fn ten() -> f64 {
    10.0
}

fn goal_floor() -> f64 {
    0.1
}

impl Preset {
    pub fn generate(&self, episodes: usize, run_seed: u64) -> Result<DriftSequence> {
        let derived = stream_seed(run_seed, INSTANCE_STREAM);
        match *self {
            Preset::Pair { b_star, t_star, dc, dp } => {
                make_perturbation_pair(b_star, t_star, dc, dp, episodes)
            }
            Preset::LowerBound { n, b_star, t_star, good_cost, good_trans } => {
                let spec = LowerBoundSpec {
                    n,
                    b_star,
                    t_star,
                    episodes: episodes as f64,
                    good_cost,
                    good_trans,
                };
                DriftSequence::stationary(episodes, make_lower_bound_instance(&spec)?)
            }
            Preset::LbCost { n, b_star, t_star, delta_c, seed } => {
                make_hard_sequence(b_star, t_star, n, episodes, delta_c, 0.0, seed.unwrap_or(derived))
            }
            Preset::LbTrans { n, b_star, t_star, delta_p, seed } => {
                make_hard_sequence(b_star, t_star, n, episodes, 0.0, delta_p, seed.unwrap_or(derived))
            }
            Preset::LbMixed { n, b_star, t_star, delta_c, delta_p, seed } => make_hard_sequence(
                b_star,
                t_star,
                n,
                episodes,
                delta_c,
                delta_p,
                seed.unwrap_or(derived),
            ),
            Preset::Random { states, actions, goal_prob_floor, seed } => DriftSequence::stationary(
                episodes,
                make_random_proper(states, actions, goal_prob_floor, seed.unwrap_or(derived))?,
            ),
        }
    }

    /// Whether the generated sequence depends on the run seed.
    pub fn seed_dependent(&self) -> bool {
        matches!(
            self,
            Preset::LbCost { seed: None, .. }
                | Preset::LbTrans { seed: None, .. }
                | Preset::LbMixed { seed: None, .. }
                | Preset::Random { seed: None, .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    Preset(Preset),
    File { path: PathBuf },
}

impl InstanceSpec {
    pub fn load(&self, episodes: usize, run_seed: u64) -> Result<DriftSequence> {
        match self {
            InstanceSpec::Preset(p) => p.generate(episodes, run_seed),
            InstanceSpec::File { path } => {
                let seq = DriftSequence::read_json(path)?;
                if seq.episodes() == episodes {
                    Ok(seq)
                } else if seq.episodes() > episodes {
                    seq.truncated(episodes)
                } else {
                    Err(Error::InvalidConfig(format!(
                        "{} holds K = {} < requested {episodes}",
                        path.display(),
                        seq.episodes()
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    NsMvp,
    NsMvpDoubling,
    MvpTest,
    TwoPhase,
    MasterMvp,
    MasterTwoPhase,
    UniformRandom,
    FixedOptimalFirst,
}

impl Algorithm {
    pub const ALL: [Algorithm; 8] = [
        Algorithm::NsMvp,
        Algorithm::NsMvpDoubling,
        Algorithm::MvpTest,
        Algorithm::TwoPhase,
        Algorithm::MasterMvp,
        Algorithm::MasterTwoPhase,
        Algorithm::UniformRandom,
        Algorithm::FixedOptimalFirst,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::NsMvp => "ns-mvp",
            Algorithm::NsMvpDoubling => "ns-mvp-doubling",
            Algorithm::MvpTest => "mvp-test",
            Algorithm::TwoPhase => "two-phase",
            Algorithm::MasterMvp => "master-mvp",
            Algorithm::MasterTwoPhase => "master-two-phase",
            Algorithm::UniformRandom => "uniform-random",
            Algorithm::FixedOptimalFirst => "fixed-optimal-first",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// Threshold and envelope multipliers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calibration {
    pub kappa_c: f64,
    pub kappa_p: f64,
    pub kappa_b: f64,
    pub kappa: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self { kappa_c: 3.0, kappa_p: 3.0, kappa_b: DEFAULT_KAPPA_B, kappa: 1.0 }
    }
}

/// Drift budgets handed to learners that assume them known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KnownDrift {
    pub delta_c: f64,
    pub delta_p: f64,
}

/// Optional restart windows for the plain periodic learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Windows {
    pub w_c: u64,
    pub w_p: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceSpec,
    pub algorithm: Algorithm,
    #[serde(rename = "K")]
    pub episodes: usize,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub calibration: Calibration,
    #[serde(default)]
    pub confidence: ConfidenceConstants,
    #[serde(default)]
    pub cost_noise: CostNoise,
    #[serde(default)]
    pub step_cap: Option<u64>,
    /// Overrides the budgets measured on the generated sequence.
    #[serde(default)]
    pub known_drift: Option<KnownDrift>,
    #[serde(default)]
    pub windows: Option<Windows>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub trajectory: bool,
    #[serde(default)]
    pub telemetry: bool,
}

fn default_delta() -> f64 {
    0.1
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl ExperimentConfig {
    pub fn new(instance: InstanceSpec, algorithm: Algorithm, episodes: usize) -> Self {
        Self {
            instance,
            algorithm,
            episodes,
            delta: default_delta(),
            seeds: default_seeds(),
            calibration: Calibration::default(),
            confidence: ConfidenceConstants::default(),
            cost_noise: CostNoise::default(),
            step_cap: None,
            known_drift: None,
            windows: None,
            output: None,
            trajectory: false,
            telemetry: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::InvalidConfig("K must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidConfig(format!("delta = {} outside (0, 1)", self.delta)));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds must be non-empty".into()));
        }
        let c = &self.calibration;
        if [c.kappa_c, c.kappa_p, c.kappa_b, c.kappa].iter().any(|&k| k.is_nan() || k < 0.0) {
            return Err(Error::InvalidConfig("calibration multipliers must be non-negative".into()));
        }
        if let Some(w) = self.windows {
            if w.w_c == 0 || w.w_p == 0 {
                return Err(Error::InvalidConfig("windows must be at least 1".into()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
