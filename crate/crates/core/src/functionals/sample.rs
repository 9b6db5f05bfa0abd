use crate::error::{Error, Result};
use crate::schemes::IndexSet;

/// Observations of fixed width `d` paired with nonnegative weights summing to 1.
///
/// This is the distribution a functional is evaluated on: the empirical
/// distribution of the data, of a batch, or of a resample.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    width: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

const WEIGHT_SUM_TOL: f64 = 1e-9;

impl WeightedSample {
    /// Row-major `points` of the given `width`, with explicit weights.
    pub fn new(points: Vec<f64>, width: usize, weights: Vec<f64>) -> Result<Self> {
        if width == 0 {
            return Err(Error::domain("observation width must be at least 1"));
        }
        if points.is_empty() {
            return Err(Error::domain("sample is empty"));
        }
        if points.len() % width != 0 {
            return Err(Error::domain(format!(
                "{} values do not form rows of width {width}",
                points.len()
            )));
        }
        let n = points.len() / width;
        if weights.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.len(),
            });
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::domain("weights must be nonnegative and finite"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::domain(format!("weights must sum to 1, got {total}")));
        }
        Ok(WeightedSample {
            width,
            points,
            weights,
        })
    }

    /// Equal weights `1/n`.
    pub fn uniform(points: Vec<f64>, width: usize) -> Result<Self> {
        if width == 0 || points.len() % width != 0 || points.is_empty() {
            return Self::new(points, width, Vec::new());
        }
        let n = points.len() / width;
        Self::new(points, width, vec![1.0 / n as f64; n])
    }

    /// Scalar observations with equal weights.
    pub fn scalar(values: Vec<f64>) -> Result<Self> {
        Self::uniform(values, 1)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.width..(i + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.width)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// The rows in `set`, equally weighted.
    pub fn subset(&self, set: &IndexSet) -> Result<WeightedSample> {
        let mut points = Vec::with_capacity(set.len() * self.width);
        for r in set.ranges() {
            if r.end > self.len() {
                return Err(Error::domain(format!(
                    "index {} out of range for sample of size {}",
                    r.end,
                    self.len()
                )));
            }
            points.extend_from_slice(&self.points[r.start * self.width..r.end * self.width]);
        }
        WeightedSample::uniform(points, self.width)
    }

    /// The same observations under new weights.
    pub fn reweighted(&self, weights: &[f64]) -> Result<WeightedSample> {
        WeightedSample::new(self.points.clone(), self.width, weights.to_vec())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schemes::BatchScheme;

    #[test]
    fn validation() {
        assert!(WeightedSample::scalar(vec![]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], 1, vec![0.5, 0.6]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], 1, vec![1.5, -0.5]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0, 3.0], 2, vec![1.0]).is_err());
        assert!(WeightedSample::new(vec![1.0, 2.0], 1, vec![1.0]).is_err());
        let s = WeightedSample::uniform(vec![1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.row(1), &[3.0, 4.0]);
        assert_eq!(s.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn subset_by_batch() {
        let s = WeightedSample::scalar((1..=10).map(f64::from).collect()).unwrap();
        let sets = BatchScheme::leave_one_batch_out(5).unwrap().materialize(10).unwrap();
        let b = s.subset(&sets[2]).unwrap();
        assert_eq!(b.points(), &[1.0, 2.0, 3.0, 4.0, 7.0, 8.0, 9.0, 10.0]);
        assert!(b.weights().iter().all(|&w| w == 0.125));
    }
}
