use crate::error::{Error, Result};
use crate::stats::{Probability, RngStream};

use super::{Functional, FunctionalProperties, WeightedSample};

/// Cumulative weights within this of `p` count as reaching `p`.
const CUMULATIVE_TOL: f64 = 1e-12;

/// Smallest observation whose cumulative weight reaches `p`
/// (left-continuous generalized inverse of the weighted CDF).
pub fn weighted_quantile(sample: &WeightedSample, p: Probability) -> Result<f64> {
    weighted_quantile_column(sample, 0, p)
}

fn weighted_quantile_column(sample: &WeightedSample, column: usize, p: Probability) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::Functional("quantile of an empty sample".into()));
    }
    let mut pairs: Vec<(f64, f64)> = sample
        .rows()
        .zip(sample.weights())
        .filter(|(_, w)| **w > 0.0)
        .map(|(row, w)| (row[column], *w))
        .collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let target = p.value() - CUMULATIVE_TOL;
    let mut cum = 0.0;
    for (x, w) in &pairs {
        cum += w;
        if cum >= target {
            return Ok(*x);
        }
    }
    // Weights sum to 1, so only rounding can land here.
    Ok(pairs.last().map(|p| p.0).unwrap_or(f64::NAN))
}

/// Weighted mean of one column.
pub fn weighted_mean(sample: &WeightedSample, column: usize) -> f64 {
    sample
        .rows()
        .zip(sample.weights())
        .map(|(row, w)| w * row[column])
        .sum()
}

/// ψ(Q) = the `p`-quantile of the first column.
#[derive(Debug, Clone, Copy)]
pub struct WeightedQuantile {
    pub p: Probability,
}

impl WeightedQuantile {
    pub fn new(p: Probability) -> Self {
        WeightedQuantile { p }
    }
}

impl Functional for WeightedQuantile {
    fn evaluate(&self, sample: &WeightedSample, _stream: &RngStream) -> Result<f64> {
        weighted_quantile(sample, self.p)
    }

    fn name(&self) -> String {
        format!("quantile({})", self.p.value())
    }
}

/// ψ(Q) = E_Q of one column.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedMean {
    pub column: usize,
}

impl Functional for WeightedMean {
    fn evaluate(&self, sample: &WeightedSample, _stream: &RngStream) -> Result<f64> {
        if self.column >= sample.width() {
            return Err(Error::domain(format!(
                "column {} out of range for width {}",
                self.column,
                sample.width()
            )));
        }
        Ok(weighted_mean(sample, self.column))
    }

    fn name(&self) -> String {
        "mean".into()
    }
}

/// Adapter turning a closure into a deterministic functional.
pub struct FnFunctional<F> {
    f: F,
    name: String,
}

impl<F> FnFunctional<F>
where
    F: Fn(&WeightedSample) -> Result<f64> + Send + Sync,
{
    pub fn new(name: impl Into<String>, f: F) -> Self {
        FnFunctional {
            f,
            name: name.into(),
        }
    }
}

impl<F> Functional for FnFunctional<F>
where
    F: Fn(&WeightedSample) -> Result<f64> + Send + Sync,
{
    fn evaluate(&self, sample: &WeightedSample, _stream: &RngStream) -> Result<f64> {
        (self.f)(sample)
    }

    fn properties(&self) -> FunctionalProperties {
        FunctionalProperties::PURE
    }

    fn name(&self) -> String {
        self.name.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn quantile_examples() {
        let s = WeightedSample::scalar(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(weighted_quantile(&s, p(0.7)).unwrap(), 3.0);
        let one = WeightedSample::scalar(vec![5.0]).unwrap();
        for q in [0.01, 0.5, 0.99] {
            assert_eq!(weighted_quantile(&one, p(q)).unwrap(), 5.0);
        }
        let w = WeightedSample::new(vec![10.0, 20.0], 1, vec![0.8, 0.2]).unwrap();
        assert_eq!(weighted_quantile(&w, p(0.7)).unwrap(), 10.0);
    }

    #[test]
    fn quantile_exact_fraction_boundary() {
        // 350 of 500 equal weights reach 0.7 exactly; rounding must not skip it.
        let s = WeightedSample::scalar((1..=500).map(f64::from).collect()).unwrap();
        assert_eq!(weighted_quantile(&s, p(0.7)).unwrap(), 350.0);
    }

    #[test]
    fn mean_functional() {
        let s = WeightedSample::new(vec![1.0, 3.0], 1, vec![0.25, 0.75]).unwrap();
        let m = WeightedMean::default();
        assert_eq!(m.evaluate(&s, &RngStream::new(0, 0)).unwrap(), 2.5);
        assert!(WeightedMean { column: 1 }
            .evaluate(&s, &RngStream::new(0, 0))
            .is_err());
    }

    proptest! {
        #[test]
        fn quantile_shift_and_scale(
            xs in prop::collection::vec(-100.0f64..100.0, 1..40),
            c in -50.0f64..50.0,
            scale in 0.01f64..20.0,
            q in 0.01f64..0.99,
        ) {
            let s = WeightedSample::scalar(xs.clone()).unwrap();
            let base = weighted_quantile(&s, p(q)).unwrap();
            let shifted = WeightedSample::scalar(xs.iter().map(|x| x + c).collect()).unwrap();
            prop_assert_eq!(weighted_quantile(&shifted, p(q)).unwrap(), base + c);
            let scaled = WeightedSample::scalar(xs.iter().map(|x| x * scale).collect()).unwrap();
            prop_assert_eq!(weighted_quantile(&scaled, p(q)).unwrap(), base * scale);
        }

        #[test]
        fn replication_equals_weight(
            xs in prop::collection::vec(-10.0f64..10.0, 2..20),
            reps in 2usize..5,
            q in 0.01f64..0.99,
        ) {
            // Repeating the first point `reps` times with weight w each is the
            // same distribution as one copy with weight reps * w.
            let n = xs.len() + reps - 1;
            let w = 1.0 / n as f64;
            let mut expanded = vec![xs[0]; reps];
            expanded.extend_from_slice(&xs[1..]);
            let a = WeightedSample::scalar(expanded).unwrap();
            let mut weights = vec![reps as f64 * w];
            weights.extend(std::iter::repeat(w).take(xs.len() - 1));
            let total: f64 = weights.iter().sum();
            for x in &mut weights { *x /= total; }
            let b = WeightedSample::new(xs.clone(), 1, weights).unwrap();
            let qa = weighted_quantile(&a, p(q)).unwrap();
            let qb = weighted_quantile(&b, p(q)).unwrap();
            prop_assert_eq!(qa, qb);
            prop_assert!((weighted_mean(&a, 0) - weighted_mean(&b, 0)).abs() < 1e-12);
        }
    }
}
