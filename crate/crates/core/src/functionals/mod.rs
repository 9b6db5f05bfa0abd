//! The black-box functional contract, built-in functionals and the data
//! generators used by the experiments.

mod builtin;
mod experiments;
mod generators;
pub mod io;
mod logistic;
mod queue;
mod sample;

pub use builtin::{weighted_mean, weighted_quantile, FnFunctional, WeightedMean, WeightedQuantile};
pub use experiments::{truth_for, ExperimentKind, Model, TruthSpec};
pub use generators::{
    gen_exponential, gen_logistic_data, gen_lognormal, gen_mm1_system_times, gen_normal,
};
pub use logistic::{
    fit_logistic, log_likelihood_gradient, LogisticCoefficient, LogisticFit, IRLS_MAX_ITER,
    IRLS_TOL,
};
pub use queue::{mm1_transient_mean_wait, TransientWaitingTime};
pub use sample::WeightedSample;

/// Constants describing the built-in experiment models.
pub mod constants {
    pub use super::experiments::{
        LOGISTIC_BETA, LOGISTIC_COEFFICIENT, LOGISTIC_COV_DECAY, LOGISTIC_COV_SCALE,
        MM1_ARRIVAL, MM1_SERVICE, MM1_WARMUP, QUANTILE_LEVEL, QUEUE_CUSTOMERS,
        QUEUE_INNER_REPS,
    };
}

use crate::error::Result;
use crate::stats::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionalProperties {
    /// Same sample, same value, regardless of the stream.
    pub deterministic: bool,
    /// Safe to evaluate from several threads at once.
    pub concurrent_safe: bool,
}

impl FunctionalProperties {
    pub const PURE: FunctionalProperties = FunctionalProperties {
        deterministic: true,
        concurrent_safe: true,
    };
}

/// ψ(Q): maps a weighted empirical distribution to a real number.
///
/// `stream` is a dedicated random stream for functionals that simulate
/// internally; deterministic functionals ignore it.
pub trait Functional: Send + Sync {
    fn evaluate(&self, sample: &WeightedSample, stream: &RngStream) -> Result<f64>;

    fn properties(&self) -> FunctionalProperties {
        FunctionalProperties::PURE
    }

    fn name(&self) -> String;
}
