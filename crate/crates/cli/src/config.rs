use std::path::PathBuf;

use cheapci::functionals::ExperimentKind;
use cheapci::harness::{ExperimentConfig, Method, DEFAULT_OB_MC_REPS};
use cheapci::stats::Probability;
use clap::ValueEnum;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
}

fn default_ob_mc_reps() -> usize {
    DEFAULT_OB_MC_REPS
}

/// An experiment configuration file: the experiment fields plus where and
/// how to write the report.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliConfig {
    experiment: ExperimentKind,
    n: usize,
    k: usize,
    alpha: Probability,
    methods: Vec<Method>,
    #[serde(default)]
    gamma: Option<f64>,
    #[serde(default)]
    gammas: Option<Vec<f64>>,
    replications: usize,
    master_seed: u64,
    #[serde(default = "default_ob_mc_reps")]
    ob_mc_reps: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<Format>,
}

impl CliConfig {
    /// Parses a JSON document; errors carry the line and column.
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            experiment: self.experiment,
            n: self.n,
            k: self.k,
            alpha: self.alpha,
            methods: self.methods.clone(),
            gamma: self.gamma,
            gammas: self.gammas.clone(),
            replications: self.replications,
            master_seed: self.master_seed,
            ob_mc_reps: self.ob_mc_reps,
        }
    }
}
