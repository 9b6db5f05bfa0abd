use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ci::{validate_gammas, OB_MIN_MC_REPS};
use crate::error::{Error, Result};
use crate::functionals::ExperimentKind;
use crate::stats::Probability;

/// A Stage-1 scheme paired with its Stage-2 formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    /// Equal non-overlapping batches.
    B,
    /// Non-overlapping batches of unequal fractions.
    BGamma,
    /// Cheap bootstrap.
    CB,
    /// Weighted cheap bootstrap with Dirichlet(`a`) weights.
    WCB { a: f64 },
    /// Overlapping batches with the general interval.
    OBNew,
    /// Overlapping batches with simulated critical values.
    OBSu,
    /// Batched jackknife.
    BJ,
}

impl Method {
    pub fn uses_overlapping_batches(self) -> bool {
        matches!(self, Method::OBNew | Method::OBSu)
    }

    pub fn uses_resampling(self) -> bool {
        matches!(self, Method::CB | Method::WCB { .. })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::B => f.write_str("B"),
            Method::BGamma => f.write_str("B_gamma"),
            Method::CB => f.write_str("CB"),
            Method::WCB { a } => write!(f, "WCB({a})"),
            Method::OBNew => f.write_str("OB_new"),
            Method::OBSu => f.write_str("OB_su"),
            Method::BJ => f.write_str("BJ"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "B" => Method::B,
            "B_gamma" => Method::BGamma,
            "CB" => Method::CB,
            "OB_new" => Method::OBNew,
            "OB_su" => Method::OBSu,
            "BJ" => Method::BJ,
            _ => {
                let a = s
                    .strip_prefix("WCB(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|a| a.trim().parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::Parse(format!(
                            "unknown method {s:?}; expected one of B, B_gamma, CB, WCB(a), OB_new, OB_su, BJ"
                        ))
                    })?;
                if !(a > 0.0 && a.is_finite()) {
                    return Err(Error::domain(format!(
                        "Dirichlet parameter must be positive, got {a}"
                    )));
                }
                Method::WCB { a }
            }
        })
    }
}

impl TryFrom<String> for Method {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.to_string()
    }
}

/// Default number of draws for calibrating overlapping-batch critical values.
pub const DEFAULT_OB_MC_REPS: usize = 1_000_000;

fn default_ob_mc_reps() -> usize {
    DEFAULT_OB_MC_REPS
}

/// One coverage experiment.
///
/// ```
/// use cheapci::harness::ExperimentConfig;
///
/// let cfg: ExperimentConfig = serde_json::from_str(r#"{
///     "experiment": "lognormal_quantile",
///     "n": 3000, "k": 6, "alpha": 0.1,
///     "methods": ["B", "CB", "OB_new", "OB_su"],
///     "gamma": 0.3,
///     "replications": 10000,
///     "master_seed": 1
/// }"#)?;
/// cfg.validate()?;
/// # Ok::<(), Box<dyn std::error::Error>>(())
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Data size per replication.
    pub n: usize,
    /// Number of Stage-1 estimates.
    pub k: usize,
    /// One minus the nominal coverage.
    pub alpha: Probability,
    pub methods: Vec<Method>,
    /// Overlapping batch fraction, required by `OB_new` and `OB_su`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Batch fractions, required by `B_gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gammas: Option<Vec<f64>>,
    pub replications: usize,
    pub master_seed: u64,
    #[serde(default = "default_ob_mc_reps")]
    pub ob_mc_reps: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(Error::Domain(m));
        if self.k < 2 {
            return usage("K must be ≥ 2".into());
        }
        if self.replications < 100 {
            return usage(format!(
                "replications must be ≥ 100, got {}",
                self.replications
            ));
        }
        if self.n < 10 * self.k {
            return usage(format!(
                "n must be ≥ 10·K = {}, got {}",
                10 * self.k,
                self.n
            ));
        }
        if self.methods.is_empty() {
            return usage("at least one method is required".into());
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return usage(format!("method {m} listed twice"));
            }
            if matches!(m, Method::BJ) || m.uses_overlapping_batches() {
                if self.k < 3 {
                    return usage(format!("method {m} needs K ≥ 3"));
                }
            }
            if m.uses_resampling() && self.experiment.dependent_data() {
                return usage(format!(
                    "method {m} resamples observations independently and does not apply to serially dependent data"
                ));
            }
        }
        if self.methods.iter().any(|m| m.uses_overlapping_batches()) {
            match self.gamma {
                Some(g) if g > 0.0 && g < 1.0 => {}
                Some(g) => return usage(format!("gamma must lie in (0, 1), got {g}")),
                None => return usage("OB_new and OB_su require gamma".into()),
            }
        }
        if self.methods.contains(&Method::OBSu) && self.ob_mc_reps < OB_MIN_MC_REPS {
            return usage(format!(
                "mc_reps too small: ob_mc_reps must be ≥ {OB_MIN_MC_REPS}"
            ));
        }
        if self.methods.contains(&Method::BGamma) {
            let gammas = match &self.gammas {
                Some(g) => g,
                None => return usage("B_gamma requires gammas".into()),
            };
            if gammas.len() != self.k {
                return usage(format!(
                    "gammas has {} entries but K = {}",
                    gammas.len(),
                    self.k
                ));
            }
            validate_gammas(gammas)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig {
            experiment: ExperimentKind::LognormalQuantile,
            n: 300,
            k: 6,
            alpha: Probability::new(0.1).unwrap(),
            methods: vec![Method::B],
            gamma: None,
            gammas: None,
            replications: 100,
            master_seed: 0,
            ob_mc_reps: DEFAULT_OB_MC_REPS,
        }
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            Method::B,
            Method::BGamma,
            Method::CB,
            Method::WCB { a: 1.0 },
            Method::WCB { a: 0.25 },
            Method::OBNew,
            Method::OBSu,
            Method::BJ,
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!(Method::WCB { a: 4.0 }.to_string(), "WCB(4)");
        assert!("WCB(-1)".parse::<Method>().is_err());
        assert!("OB".parse::<Method>().is_err());
    }

    #[test]
    fn validation_rules() {
        assert!(base().validate().is_ok());
        let mut c = base();
        c.k = 1;
        assert_eq!(c.validate().unwrap_err().to_string(), "K must be ≥ 2");
        let mut c = base();
        c.replications = 99;
        assert!(c.validate().is_err());
        let mut c = base();
        c.n = 59;
        assert!(c.validate().is_err());
        let mut c = base();
        c.methods = vec![Method::OBNew];
        assert!(c.validate().is_err());
        c.gamma = Some(0.3);
        assert!(c.validate().is_ok());
        let mut c = base();
        c.methods = vec![Method::BGamma];
        c.gammas = Some(vec![0.5, 0.5]);
        assert!(c.validate().is_err());
        c.gammas = Some(vec![1.0 / 6.0; 6]);
        assert!(c.validate().is_ok());
        let mut c = base();
        c.experiment = ExperimentKind::Mm1Quantile;
        c.methods = vec![Method::CB];
        assert!(c.validate().is_err());
        let mut c = base();
        c.methods = vec![Method::B, Method::B];
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_rejects_unknown_keys() {
        let ok = r#"{"experiment":"logistic","n":1000,"k":6,"alpha":0.1,
            "methods":["B","WCB(1)"],"replications":100,"master_seed":3}"#;
        let c: ExperimentConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(c.methods[1], Method::WCB { a: 1.0 });
        assert_eq!(c.ob_mc_reps, DEFAULT_OB_MC_REPS);
        let bad = ok.replace("\"k\"", "\"K\"");
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
        let back: ExperimentConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
