use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, Method};
use super::report::{ExperimentReport, MethodSummary};
use crate::ci::{
    calibrate_ob_critical, ci_batched_jackknife, ci_cheap_bootstrap, ci_general_batching, ci_gs,
    ci_ob_su, ci_standard_batching, ci_weighted_cheap_bootstrap, IntervalResult, ObCritical,
    StageOneSource, StageOneVector,
};
use crate::error::{Error, Result};
use crate::functionals::{Functional, Model, TruthSpec, WeightedSample};
use crate::schemes::{
    cheap_bootstrap_plan, weighted_plan, BatchScheme, CovarianceShape, IndexSet, ResampleKind,
    SchemeSpec,
};
use crate::stats::{ks_two_sample, RngStream};

/// Stream id reserved for critical-value calibration; replication streams
/// use ids `0..R`.
const CALIBRATION_STREAM: u64 = u64::MAX;
const DATA_LABEL: u64 = 0;
const RESAMPLE_LABEL: u64 = 1;
const EVAL_LABEL: u64 = 2;

/// How the `K` Stage-1 estimates of a method are produced from a data set.
pub enum StageOnePlan {
    Batches {
        scheme: BatchScheme,
        /// Data size the batches were laid out for.
        n: usize,
        sets: Vec<IndexSet>,
        shape: CovarianceShape,
    },
    Resamples {
        kind: ResampleKind,
        k: usize,
    },
}

impl StageOnePlan {
    /// The plan `method` uses with `k` estimates on `n` observations.
    /// `gamma` is required by the overlapping-batch methods and `gammas` by
    /// `B_gamma`.
    pub fn for_method(
        method: Method,
        k: usize,
        n: usize,
        gamma: Option<f64>,
        gammas: Option<&[f64]>,
    ) -> Result<Self> {
        let batches = |scheme: BatchScheme| -> Result<Self> {
            Ok(StageOnePlan::Batches {
                n,
                sets: scheme.materialize(n)?,
                shape: scheme.covariance_shape()?,
                scheme,
            })
        };
        match method {
            Method::B => batches(BatchScheme::equal_nonoverlapping(k)?),
            Method::BGamma => {
                let g = gammas.ok_or_else(|| Error::domain("B_gamma requires gammas"))?;
                if g.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        found: g.len(),
                    });
                }
                batches(BatchScheme::proportional_batches(g)?)
            }
            Method::OBNew | Method::OBSu => {
                let g = gamma.ok_or_else(|| Error::domain("overlapping batches require gamma"))?;
                batches(BatchScheme::su_overlapping(k, g)?)
            }
            Method::BJ => batches(BatchScheme::leave_one_batch_out(k)?),
            Method::CB => Ok(StageOnePlan::Resamples {
                kind: ResampleKind::CheapBootstrap,
                k,
            }),
            Method::WCB { a } => Ok(StageOnePlan::Resamples {
                kind: ResampleKind::Weighted { a },
                k,
            }),
        }
    }

    /// Covariance shape of the estimates.
    pub fn shape(&self) -> Result<CovarianceShape> {
        match self {
            StageOnePlan::Batches { shape, .. } => Ok(shape.clone()),
            StageOnePlan::Resamples { kind, k } => kind.covariance_shape(*k),
        }
    }

    /// Evaluates `f` on every batch or resample of `data`. Resampling
    /// weights come from `stream.substream(1)`; evaluation `j` receives
    /// `stream.substream(2).substream(j)`.
    pub fn estimates(
        &self,
        data: &WeightedSample,
        f: &dyn Functional,
        stream: &RngStream,
    ) -> Result<StageOneVector> {
        let evals = stream.substream(EVAL_LABEL);
        match self {
            StageOnePlan::Batches { scheme, sets, n, .. } => {
                if data.len() != *n {
                    return Err(Error::DimensionMismatch {
                        expected: *n,
                        found: data.len(),
                    });
                }
                let values = sets
                    .iter()
                    .enumerate()
                    .map(|(j, set)| f.evaluate(&data.subset(set)?, &evals.substream(j as u64)))
                    .collect::<Result<Vec<f64>>>()?;
                StageOneVector::new(values, StageOneSource::Batches(scheme.spec().clone()))
            }
            StageOnePlan::Resamples { kind, k } => {
                let rs = stream.substream(RESAMPLE_LABEL);
                let plan = match kind {
                    ResampleKind::CheapBootstrap => cheap_bootstrap_plan(&rs, *k, data.len())?,
                    ResampleKind::Weighted { a } => weighted_plan(&rs, *k, data.len(), *a)?,
                };
                let values = plan
                    .weights()
                    .iter()
                    .enumerate()
                    .map(|(j, w)| {
                        let stream = evals.substream(j as u64);
                        if j == 0 {
                            f.evaluate(data, &stream)
                        } else {
                            f.evaluate(&data.reweighted(w)?, &stream)
                        }
                    })
                    .collect::<Result<Vec<f64>>>()?;
                StageOneVector::new(values, StageOneSource::Resamples(*kind))
            }
        }
    }
}

/// A Stage-1 plan and the stream label that keys its randomness. Labels do
/// not depend on which other methods are requested.
struct Plan {
    label: u64,
    scheme: StageOnePlan,
}

/// Result of one method in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub covered: bool,
    pub half_width: f64,
    pub interval: IntervalResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ReplicationOutcome {
    Completed(Vec<MethodOutcome>),
    /// The functional failed on this replication's data; no method is scored.
    Excluded { reason: String },
}

/// A validated configuration with its model, Stage-1 plans and calibrated
/// critical value, ready to run replications.
pub struct Experiment {
    config: ExperimentConfig,
    model: Box<dyn Model>,
    truth: TruthSpec,
    plans: Vec<Plan>,
    /// Index into `plans` for each configured method.
    method_plan: Vec<usize>,
    ob_critical: Option<ObCritical>,
}

fn plan_label(method: Method) -> u64 {
    match method {
        Method::B => 1,
        Method::BGamma => 2,
        Method::OBNew | Method::OBSu => 3,
        Method::BJ => 4,
        Method::CB => 5,
        Method::WCB { a } => 6 ^ a.to_bits().rotate_left(8),
    }
}

impl Experiment {
    /// Validates `config` and calibrates the overlapping-batch critical value
    /// if `OB_su` is requested.
    pub fn prepare(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let model = config.experiment.model();
        let truth = model.truth();
        let k = config.k;
        let mut plans: Vec<Plan> = Vec::new();
        let mut method_plan = Vec::with_capacity(config.methods.len());
        for &m in &config.methods {
            let label = plan_label(m);
            if let Some(i) = plans.iter().position(|p| p.label == label) {
                method_plan.push(i);
                continue;
            }
            let scheme = StageOnePlan::for_method(
                m,
                k,
                config.n,
                config.gamma,
                config.gammas.as_deref(),
            )?;
            method_plan.push(plans.len());
            plans.push(Plan { label, scheme });
        }
        let ob_critical = if config.methods.contains(&Method::OBSu) {
            let shape = plans
                .iter()
                .find_map(|p| match &p.scheme {
                    StageOnePlan::Batches { scheme, shape, .. }
                        if matches!(scheme.spec(), SchemeSpec::SuOverlapping { .. }) =>
                    {
                        Some(shape)
                    }
                    _ => None,
                })
                .expect("OB plan present");
            Some(calibrate_ob_critical(
                shape,
                config.gamma.unwrap_or_default(),
                config.alpha,
                config.ob_mc_reps,
                &RngStream::new(config.master_seed, CALIBRATION_STREAM),
            )?)
        } else {
            None
        };
        Ok(Experiment {
            config,
            model,
            truth,
            plans,
            method_plan,
            ob_critical,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn truth(&self) -> &TruthSpec {
        &self.truth
    }

    pub fn ob_critical(&self) -> Option<ObCritical> {
        self.ob_critical
    }

    fn replication_stream(&self, rep_index: u64) -> RngStream {
        RngStream::new(self.config.master_seed, rep_index)
    }

    /// The data set of replication `rep_index`.
    pub fn generate(&self, rep_index: u64) -> Result<WeightedSample> {
        self.model.generate(
            &self.replication_stream(rep_index).substream(DATA_LABEL),
            self.config.n,
        )
    }

    fn interval(&self, method: Method, plan: &Plan, y: &[f64]) -> Result<IntervalResult> {
        let alpha = self.config.alpha;
        match method {
            Method::B => ci_standard_batching(y, alpha),
            Method::BGamma => {
                ci_general_batching(y, self.config.gammas.as_deref().unwrap_or_default(), alpha)
            }
            Method::BJ => ci_batched_jackknife(y, alpha),
            Method::CB => ci_cheap_bootstrap(y, alpha),
            Method::WCB { a } => ci_weighted_cheap_bootstrap(y, 1.0 / a, alpha),
            Method::OBNew => match &plan.scheme {
                StageOnePlan::Batches { shape, .. } => ci_gs(y, shape, alpha),
                StageOnePlan::Resamples { .. } => unreachable!("OB methods use batches"),
            },
            Method::OBSu => {
                let c = self.ob_critical.expect("calibrated in prepare");
                ci_ob_su(y, self.config.gamma.unwrap_or_default(), c.value, alpha)
            }
        }
    }

    /// Runs every configured method on `data`, using the randomness of
    /// replication `rep_index` for resampling and functional evaluation.
    pub fn evaluate_on(&self, data: &WeightedSample, rep_index: u64) -> Result<Vec<MethodOutcome>> {
        let rep = self.replication_stream(rep_index);
        let mut estimates: Vec<Option<Vec<f64>>> = vec![None; self.plans.len()];
        let mut out = Vec::with_capacity(self.config.methods.len());
        for (&method, &p) in self.config.methods.iter().zip(&self.method_plan) {
            let plan = &self.plans[p];
            if estimates[p].is_none() {
                let y = plan.scheme.estimates(
                    data,
                    self.model.functional(),
                    &rep.substream(plan.label),
                )?;
                estimates[p] = Some(y.into_values());
            }
            let y = estimates[p].as_deref().expect("just filled");
            let interval = self.interval(method, plan, y)?;
            out.push(MethodOutcome {
                method,
                covered: interval.contains(self.truth.value),
                half_width: interval.half_width,
                interval,
            });
        }
        Ok(out)
    }

    /// One replication: generate data from stream `(master_seed, rep_index)`
    /// and score every method on it. Functional failures exclude the
    /// replication; other errors propagate.
    pub fn run_replication(&self, rep_index: u64) -> Result<ReplicationOutcome> {
        let data = self.generate(rep_index)?;
        match self.evaluate_on(&data, rep_index) {
            Ok(v) => Ok(ReplicationOutcome::Completed(v)),
            Err(Error::Functional(reason)) => Ok(ReplicationOutcome::Excluded { reason }),
            Err(e) => Err(e),
        }
    }

    /// All replications on the current rayon pool, aggregated in index order.
    pub fn run(&self) -> Result<ExperimentReport> {
        let r = self.config.replications;
        let outcomes: Vec<ReplicationOutcome> = (0..r as u64)
            .into_par_iter()
            .map(|i| self.run_replication(i))
            .collect::<Result<_>>()?;
        self.aggregate(&outcomes)
    }

    fn aggregate(&self, outcomes: &[ReplicationOutcome]) -> Result<ExperimentReport> {
        let total = outcomes.len();
        let completed: Vec<&Vec<MethodOutcome>> = outcomes
            .iter()
            .filter_map(|o| match o {
                ReplicationOutcome::Completed(v) => Some(v),
                ReplicationOutcome::Excluded { .. } => None,
            })
            .collect();
        let excluded = total - completed.len();
        if excluded * 100 > total {
            return Err(Error::ExcessiveFailures {
                failed: excluded,
                total,
            });
        }
        let methods = self
            .config
            .methods
            .iter()
            .enumerate()
            .map(|(m, &method)| {
                let covered = completed.iter().filter(|v| v[m].covered).count();
                let widths: Vec<f64> = completed.iter().map(|v| v[m].half_width).collect();
                MethodSummary::new(method, covered, widths)
            })
            .collect();
        Ok(ExperimentReport {
            config: self.config.clone(),
            truth: self.truth.clone(),
            ob_critical: self.ob_critical,
            completed: completed.len(),
            excluded,
            methods,
        })
    }
}

/// Runs `config` on the global rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    Experiment::prepare(config.clone())?.run()
}

/// Runs `config` on a dedicated pool of `workers` threads (0 = one per core).
/// The report does not depend on `workers`.
pub fn run_experiment_with_workers(
    config: &ExperimentConfig,
    workers: usize,
) -> Result<ExperimentReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::domain(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment(config))
}

/// Two-sample KS distance between the `√n`-scaled interval lengths of two
/// methods across replications of `config`.
pub fn length_distribution_check(config: &ExperimentConfig, a: Method, b: Method) -> Result<f64> {
    let mut cfg = config.clone();
    cfg.methods = if a == b { vec![a] } else { vec![a, b] };
    let report = run_experiment(&cfg)?;
    Ok(report.length_ks(a, b).expect("both methods were run"))
}

impl ExperimentReport {
    /// `√n · 2 · half_width` for each completed replication.
    pub fn scaled_lengths(&self, method: Method) -> Option<Vec<f64>> {
        let root_n = (self.config.n as f64).sqrt();
        self.summary(method)
            .map(|s| s.half_widths().iter().map(|h| 2.0 * root_n * h).collect())
    }

    /// KS distance between the scaled length samples of two methods.
    pub fn length_ks(&self, a: Method, b: Method) -> Option<f64> {
        Some(ks_two_sample(&self.scaled_lengths(a)?, &self.scaled_lengths(b)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::ExperimentKind;
    use crate::harness::DEFAULT_OB_MC_REPS;
    use crate::stats::Probability;

    fn config(methods: Vec<Method>) -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::LognormalQuantile,
            n: 300,
            k: 6,
            alpha: Probability::new(0.1).unwrap(),
            methods,
            gamma: Some(0.3),
            gammas: Some(BatchScheme::linear_gammas(6)),
            replications: 100,
            master_seed: 17,
            ob_mc_reps: 100_000,
        }
    }

    fn all_methods() -> Vec<Method> {
        vec![
            Method::B,
            Method::BGamma,
            Method::CB,
            Method::WCB { a: 1.0 },
            Method::OBNew,
            Method::OBSu,
            Method::BJ,
        ]
    }

    #[test]
    fn replication_is_deterministic() {
        let e = Experiment::prepare(config(all_methods())).unwrap();
        assert_eq!(e.run_replication(5).unwrap(), e.run_replication(5).unwrap());
        assert_ne!(e.run_replication(5).unwrap(), e.run_replication(6).unwrap());
    }

    #[test]
    fn method_results_do_not_depend_on_method_list() {
        let all = Experiment::prepare(config(all_methods())).unwrap();
        let one = Experiment::prepare(config(vec![Method::WCB { a: 1.0 }])).unwrap();
        let (ReplicationOutcome::Completed(a), ReplicationOutcome::Completed(b)) =
            (all.run_replication(3).unwrap(), one.run_replication(3).unwrap())
        else {
            panic!("lognormal replications never fail")
        };
        assert_eq!(a[3], b[0]);
    }

    #[test]
    fn ob_methods_share_stage_one() {
        let e = Experiment::prepare(config(vec![Method::OBNew, Method::OBSu])).unwrap();
        let ReplicationOutcome::Completed(v) = e.run_replication(0).unwrap() else {
            panic!()
        };
        // Both centers are functions of the same estimates; OB_su is
        // centered at the full-sample estimate.
        let data = e.generate(0).unwrap();
        let full = e.model.functional().evaluate(&data, &RngStream::new(0, 0)).unwrap();
        assert_eq!(v[1].interval.center, full);
    }

    #[test]
    fn constant_data_gives_zero_width() {
        let e = Experiment::prepare(config(vec![Method::B])).unwrap();
        let truth = e.truth().value;
        let data = WeightedSample::scalar(vec![truth; 300]).unwrap();
        let v = e.evaluate_on(&data, 0).unwrap();
        assert!(v[0].covered);
        assert_eq!(v[0].half_width, 0.0);
    }

    #[test]
    fn report_is_consistent_and_worker_independent() {
        let cfg = config(vec![Method::B, Method::CB, Method::OBSu]);
        let r1 = run_experiment_with_workers(&cfg, 1).unwrap();
        let r2 = run_experiment_with_workers(&cfg, 3).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.completed, 100);
        for s in &r1.methods {
            assert!(s.coverage >= 0.0 && s.coverage <= 1.0);
            let p = s.coverage;
            assert!((s.coverage_se - (p * (1.0 - p) / 100.0).sqrt()).abs() < 1e-15);
        }
        assert_eq!(r1.length_ks(Method::B, Method::B), Some(0.0));
        assert!(r1.ob_critical.is_some());
        assert_eq!(DEFAULT_OB_MC_REPS, 1_000_000);
    }

    #[test]
    fn excessive_failures_are_reported() {
        let e = Experiment::prepare(config(vec![Method::B])).unwrap();
        let mut outcomes: Vec<ReplicationOutcome> = (0..100)
            .map(|i| e.run_replication(i).unwrap())
            .collect();
        outcomes[0] = ReplicationOutcome::Excluded {
            reason: "separated".into(),
        };
        let r = e.aggregate(&outcomes).unwrap();
        assert_eq!((r.completed, r.excluded), (99, 1));
        outcomes[1] = outcomes[0].clone();
        assert!(matches!(
            e.aggregate(&outcomes),
            Err(Error::ExcessiveFailures { failed: 2, total: 100 })
        ));
    }
}
