//! Experiment configuration and hyperparameter presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::env::{ArmSchedule, FeatureConvention};
use crate::error::{Error, Result};
use crate::posterior::{PriorSpec, SgldConfig};

/// The tuning grid the baselines are swept over.
pub const HYPERPARAMETER_GRID: [f64; 4] = [0.01, 0.1, 1.0, 10.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algo {
    Fgts,
    MaxInP,
    MaxPairUcb,
    CoLstim,
    Vacdb,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Fgts, Algo::MaxInP, Algo::MaxPairUcb, Algo::CoLstim, Algo::Vacdb];

    pub fn as_str(self) -> &'static str {
        match self {
            Algo::Fgts => "fgts",
            Algo::MaxInP => "maxinp",
            Algo::MaxPairUcb => "maxpairucb",
            Algo::CoLstim => "colstim",
            Algo::Vacdb => "vacdb",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.as_str() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

/// How η and μ are chosen for the Feel-Good likelihood.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// η = 1, μ = α/√T.
    PaperExperiment,
    /// η = 0.25, μ = 1/(10·e^B·√T).
    Theory,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper-experiment" => Ok(Preset::PaperExperiment),
            "theory" => Ok(Preset::Theory),
            other => Err(Error::InvalidConfig(format!("unknown preset '{other}'"))),
        }
    }
}

/// Fully resolved description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub rounds: u64,
    pub dim: usize,
    pub arms: usize,
    pub runs: usize,
    #[serde(with = "crate::harness::output::decimal_u64")]
    pub master_seed: u64,
    pub preset: Preset,
    /// Feel-Good strength: μ = α/√T under the paper-experiment preset.
    pub alpha: f64,
    /// Parameter-norm bound B used by the theory preset.
    pub theory_bound: f64,
    /// Confidence radius of the UCB baselines.
    pub beta: f64,
    /// Ridge term: Σ₀ = λI and the MLE penalty.
    pub lambda: f64,
    /// Gumbel perturbation scale of CoLSTIM.
    pub perturbation: f64,
    /// VACDB layer count; `None` picks ⌈log₂ √T⌉.
    pub vacdb_layers: Option<usize>,
    pub sgld: SgldConfig,
    pub prior: PriorSpec,
    pub convention: FeatureConvention,
    pub schedule: ArmSchedule,
    /// Worker threads across runs; 0 uses the global pool, 1 runs serially.
    pub threads: usize,
}

impl ExperimentConfig {
    /// Experiment defaults: T = 2500, K = 32, 10 runs, α = 0.1, λ = 0.001.
    pub fn paper_experiment(algo: Algo, dim: usize) -> Self {
        Self {
            algo,
            rounds: 2500,
            dim,
            arms: 32,
            runs: 10,
            master_seed: 0,
            preset: Preset::PaperExperiment,
            alpha: 0.1,
            theory_bound: 1.0,
            beta: 0.1,
            lambda: 0.001,
            perturbation: 0.1,
            vacdb_layers: None,
            sgld: SgldConfig::default(),
            prior: PriorSpec::default(),
            convention: FeatureConvention::RawPm1,
            schedule: ArmSchedule::Fixed,
            threads: 0,
        }
    }

    pub fn eta(&self) -> f64 {
        match self.preset {
            Preset::PaperExperiment => 1.0,
            Preset::Theory => 0.25,
        }
    }

    pub fn mu(&self) -> f64 {
        let sqrt_t = (self.rounds as f64).sqrt();
        match self.preset {
            Preset::PaperExperiment => self.alpha / sqrt_t,
            Preset::Theory => 1.0 / (10.0 * self.theory_bound.exp() * sqrt_t),
        }
    }

    pub fn layers(&self) -> usize {
        self.vacdb_layers
            .unwrap_or_else(|| crate::agents::VacdbConfig::default_layers(self.rounds))
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 || self.dim == 0 || self.arms == 0 || self.runs == 0 {
            return Err(Error::InvalidConfig("T, d, K and runs must all be at least 1".into()));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.dim < 64 && self.arms as u128 > 1u128 << self.dim {
            return Err(Error::InvalidConfig(format!(
                "K = {} exceeds the 2^{} distinct sign vectors",
                self.arms, self.dim
            )));
        }
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(Error::InvalidConfig("lambda must be positive".into()));
        }
        if !(self.beta >= 0.0 && self.perturbation >= 0.0) {
            return Err(Error::InvalidConfig("beta and perturbation must be nonnegative".into()));
        }
        self.sgld.validate()
    }

    /// Short label of the tuned hyperparameters, for reports.
    pub fn label(&self) -> String {
        match self.algo {
            Algo::Fgts => format!("fgts(alpha={})", self.alpha),
            Algo::CoLstim => format!("colstim(c={}, beta={})", self.perturbation, self.beta),
            other => format!("{other}(beta={})", self.beta),
        }
    }
}
