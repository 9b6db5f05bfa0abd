//! The built-in experiment models: a data generator, a functional and the
//! analytic value of the functional under the true distribution.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::{normal_quantile, Probability, RngStream};

use super::{
    gen_exponential, gen_logistic_data, gen_lognormal, gen_mm1_system_times,
    mm1_transient_mean_wait, Functional, LogisticCoefficient, TransientWaitingTime,
    WeightedQuantile, WeightedSample,
};

/// ψ(P) for a model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthSpec {
    pub value: f64,
    pub description: String,
}

/// A data-generating process together with the functional of interest.
pub trait Model: Send + Sync {
    fn generate(&self, stream: &RngStream, n: usize) -> Result<WeightedSample>;
    fn functional(&self) -> &dyn Functional;
    fn truth(&self) -> TruthSpec;
}

pub const QUANTILE_LEVEL: f64 = 0.7;
pub const MM1_ARRIVAL: f64 = 1.0;
pub const MM1_SERVICE: f64 = 2.0;
pub const MM1_WARMUP: usize = 1000;
pub const LOGISTIC_BETA: [f64; 10] = [1.0, 1.0, 1.0, -1.0, -1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
pub const LOGISTIC_COV_SCALE: f64 = 0.01;
pub const LOGISTIC_COV_DECAY: f64 = 0.8;
pub const LOGISTIC_COEFFICIENT: usize = 1;
pub const QUEUE_CUSTOMERS: usize = 10;
pub const QUEUE_INNER_REPS: usize = 1000;

/// Experiment tags accepted in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// 0.7-quantile of a standard lognormal.
    LognormalQuantile,
    /// 0.7-quantile of the stationary M/M/1 (λ=1, μ=2) system time.
    Mm1Quantile,
    /// First coefficient of a 10-covariate logistic regression.
    Logistic,
    /// Mean wait of the first 10 customers of an M/M/1 queue whose service
    /// distribution is only known through data.
    InputUncertaintyMm1,
}

impl ExperimentKind {
    pub fn model(self) -> Box<dyn Model> {
        let q = Probability::new(QUANTILE_LEVEL).expect("constant level");
        match self {
            ExperimentKind::LognormalQuantile => Box::new(LognormalQuantileModel {
                functional: WeightedQuantile::new(q),
            }),
            ExperimentKind::Mm1Quantile => Box::new(Mm1QuantileModel {
                functional: WeightedQuantile::new(q),
            }),
            ExperimentKind::Logistic => Box::new(LogisticModel {
                functional: LogisticCoefficient {
                    index: LOGISTIC_COEFFICIENT,
                },
            }),
            ExperimentKind::InputUncertaintyMm1 => Box::new(InputUncertaintyModel {
                functional: TransientWaitingTime {
                    arrival_rate: MM1_ARRIVAL,
                    customers: QUEUE_CUSTOMERS,
                    inner_reps: QUEUE_INNER_REPS,
                },
            }),
        }
    }

    /// Whether observations are serially dependent (resampling methods do
    /// not apply).
    pub fn dependent_data(self) -> bool {
        matches!(self, ExperimentKind::Mm1Quantile)
    }
}

/// Analytic ψ(P) for a built-in experiment.
pub fn truth_for(kind: ExperimentKind) -> TruthSpec {
    kind.model().truth()
}

struct LognormalQuantileModel {
    functional: WeightedQuantile,
}

impl Model for LognormalQuantileModel {
    fn generate(&self, stream: &RngStream, n: usize) -> Result<WeightedSample> {
        gen_lognormal(stream, n)
    }
    fn functional(&self) -> &dyn Functional {
        &self.functional
    }
    fn truth(&self) -> TruthSpec {
        TruthSpec {
            value: normal_quantile(self.functional.p).exp(),
            description: "0.7-quantile of the standard lognormal, exp(z_0.7)".into(),
        }
    }
}

struct Mm1QuantileModel {
    functional: WeightedQuantile,
}

impl Model for Mm1QuantileModel {
    fn generate(&self, stream: &RngStream, n: usize) -> Result<WeightedSample> {
        gen_mm1_system_times(stream, n, MM1_WARMUP, MM1_ARRIVAL, MM1_SERVICE)
    }
    fn functional(&self) -> &dyn Functional {
        &self.functional
    }
    fn truth(&self) -> TruthSpec {
        // Stationary M/M/1 sojourn time is Exponential(μ − λ).
        TruthSpec {
            value: -(1.0 - self.functional.p.value()).ln() / (MM1_SERVICE - MM1_ARRIVAL),
            description: "0.7-quantile of the stationary M/M/1 system time".into(),
        }
    }
}

struct LogisticModel {
    functional: LogisticCoefficient,
}

impl Model for LogisticModel {
    fn generate(&self, stream: &RngStream, n: usize) -> Result<WeightedSample> {
        gen_logistic_data(
            stream,
            n,
            &LOGISTIC_BETA,
            LOGISTIC_COV_SCALE,
            LOGISTIC_COV_DECAY,
        )
    }
    fn functional(&self) -> &dyn Functional {
        &self.functional
    }
    fn truth(&self) -> TruthSpec {
        TruthSpec {
            value: LOGISTIC_BETA[self.functional.index - 1],
            description: format!("logistic coefficient beta_{}", self.functional.index),
        }
    }
}

struct InputUncertaintyModel {
    functional: TransientWaitingTime,
}

impl Model for InputUncertaintyModel {
    fn generate(&self, stream: &RngStream, n: usize) -> Result<WeightedSample> {
        gen_exponential(stream, n, MM1_SERVICE)
    }
    fn functional(&self) -> &dyn Functional {
        &self.functional
    }
    fn truth(&self) -> TruthSpec {
        TruthSpec {
            value: mm1_transient_mean_wait(MM1_ARRIVAL, MM1_SERVICE, QUEUE_CUSTOMERS),
            description: "mean wait of the first 10 M/M/1 customers (empty start)".into(),
        }
    }
}
