use std::fmt::Write as _;

use serde::Serialize;

use super::config::{ExperimentConfig, Method};
use crate::ci::ObCritical;
use crate::functionals::TruthSpec;

/// Aggregated results of one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub covered: usize,
    pub coverage: f64,
    /// `√(p̂(1-p̂)/R)`.
    pub coverage_se: f64,
    pub half_width: f64,
    /// Sample standard deviation of the half-widths over `√R`.
    pub half_width_se: f64,
    #[serde(skip)]
    half_widths: Vec<f64>,
}

impl MethodSummary {
    pub(crate) fn new(method: Method, covered: usize, half_widths: Vec<f64>) -> Self {
        let r = half_widths.len() as f64;
        let p = covered as f64 / r;
        let mean = half_widths.iter().sum::<f64>() / r;
        let ss: f64 = half_widths.iter().map(|h| (h - mean) * (h - mean)).sum();
        MethodSummary {
            method,
            covered,
            coverage: p,
            coverage_se: (p * (1.0 - p) / r).sqrt(),
            half_width: mean,
            half_width_se: (ss / (r - 1.0)).sqrt() / r.sqrt(),
            half_widths,
        }
    }

    /// Half-widths of the completed replications, in replication order.
    pub fn half_widths(&self) -> &[f64] {
        &self.half_widths
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub truth: TruthSpec,
    pub ob_critical: Option<ObCritical>,
    /// Replications that produced intervals.
    pub completed: usize,
    /// Replications dropped because the functional failed.
    pub excluded: usize,
    pub methods: Vec<MethodSummary>,
}

/// How many digits to print.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    Significant(usize),
    /// Shortest representation that round-trips.
    Full,
}

impl Default for Precision {
    fn default() -> Self {
        Precision::Significant(6)
    }
}

impl Precision {
    pub fn format(self, x: f64) -> String {
        match self {
            Precision::Full => format!("{x}"),
            Precision::Significant(_) if x == 0.0 || !x.is_finite() => format!("{x}"),
            Precision::Significant(digits) => {
                let digits = digits.max(1) as i32;
                let magnitude = x.abs().log10().floor() as i32;
                if (-5..15).contains(&magnitude) {
                    let decimals = (digits - 1 - magnitude).max(0) as usize;
                    format!("{x:.decimals$}")
                } else {
                    format!("{x:.*e}", (digits - 1) as usize)
                }
            }
        }
    }
}

impl ExperimentReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == method)
    }

    /// One row per method: `method, coverage, coverage_se, half_width,
    /// half_width_se, R, n, K, alpha, seed`, where `R` counts completed
    /// replications.
    pub fn to_csv(&self, precision: Precision) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let c = &self.config;
        w.write_record([
            "method",
            "coverage",
            "coverage_se",
            "half_width",
            "half_width_se",
            "R",
            "n",
            "K",
            "alpha",
            "seed",
        ])
        .expect("writing to memory");
        for s in &self.methods {
            w.write_record([
                s.method.to_string(),
                precision.format(s.coverage),
                precision.format(s.coverage_se),
                precision.format(s.half_width),
                precision.format(s.half_width_se),
                self.completed.to_string(),
                c.n.to_string(),
                c.k.to_string(),
                precision.format(c.alpha.value()),
                c.master_seed.to_string(),
            ])
            .expect("writing to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
    }

    /// Coverage and mean half-width per method, with Monte Carlo standard
    /// errors in parentheses.
    pub fn to_markdown(&self, precision: Precision) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{}: n = {}, K = {}, nominal coverage {}, R = {} ({} excluded), seed {}, true value {}",
            serde_json::to_value(c.experiment)
                .ok()
                .and_then(|v| v.as_str().map(str::to_owned))
                .unwrap_or_default(),
            c.n,
            c.k,
            precision.format(1.0 - c.alpha.value()),
            self.completed,
            self.excluded,
            c.master_seed,
            precision.format(self.truth.value),
        );
        out.push('\n');
        out.push_str("| Method | Coverage | Half-width |\n");
        out.push_str("|---|---|---|\n");
        for s in &self.methods {
            let _ = writeln!(
                out,
                "| {} | {} ({}) | {} ({}) |",
                s.method,
                precision.format(s.coverage),
                precision.format(s.coverage_se),
                precision.format(s.half_width),
                precision.format(s.half_width_se),
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        let p = Precision::default();
        assert_eq!(p.format(0.9), "0.900000");
        assert_eq!(p.format(0.0780123456), "0.0780123");
        assert_eq!(p.format(12.70620473617), "12.7062");
        assert_eq!(p.format(123456789.0), "123456789");
        assert_eq!(p.format(0.0), "0");
        assert_eq!(p.format(1.5e-9), "1.50000e-9");
        assert_eq!(Precision::Significant(3).format(-2.34567), "-2.35");
        assert_eq!(Precision::Full.format(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn summary_statistics() {
        let s = MethodSummary::new(Method::B, 3, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.coverage, 0.75);
        assert!((s.coverage_se - (0.75f64 * 0.25 / 4.0).sqrt()).abs() < 1e-15);
        assert_eq!(s.half_width, 2.5);
        let sd = (5.0f64 / 3.0).sqrt();
        assert!((s.half_width_se - sd / 2.0).abs() < 1e-15);
    }
}
