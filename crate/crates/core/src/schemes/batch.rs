//! Batch schemes as unions of fractional intervals of `[0, 1]`.
//!
//! A batch is described independently of the data size `n`; batch `j` with
//! intervals `[a, b]` covers observations `⌊a n⌋ + 1 ..= ⌊b n⌋` (1-based).

use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::shape::{CovarianceShape, ShapeProvenance};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

/// Overlaps shorter than this are treated as touching endpoints.
const OVERLAP_EPS: f64 = 1e-12;
/// Slack added before flooring `a n`, absorbing representation error in `a`.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    #[inline]
    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    fn intersection(&self, other: &Interval) -> f64 {
        (self.end.min(other.end) - self.start.max(other.start)).max(0.0)
    }
}

/// One batch: disjoint, ordered intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    intervals: Vec<Interval>,
}

impl Batch {
    fn new(intervals: impl IntoIterator<Item = Interval>) -> Self {
        Batch {
            intervals: intervals.into_iter().filter(|iv| !iv.is_empty()).collect(),
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Fraction of the data in the batch (γ).
    pub fn length(&self) -> f64 {
        self.intervals.iter().map(Interval::len).sum()
    }

    /// Fraction of the data shared with `other` (β).
    pub fn shared_with(&self, other: &Batch) -> f64 {
        let mut total = 0.0;
        for a in &self.intervals {
            for b in &other.intervals {
                total += a.intersection(b);
            }
        }
        if total < OVERLAP_EPS {
            0.0
        } else {
            total
        }
    }
}

/// Serializable description of a scheme: kind, K and parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SchemeSpec {
    Equal { k: usize },
    Proportional { gammas: Vec<f64> },
    SuOverlapping { k: usize, gamma: f64 },
    Jackknife { k: usize },
}

/// A Stage-1 batching plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SchemeSpec", into = "SchemeSpec")]
pub struct BatchScheme {
    spec: SchemeSpec,
    batches: Vec<Batch>,
}

/// Index ranges (0-based, half-open) making up one materialized batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    ranges: Vec<Range<usize>>,
}

impl IndexSet {
    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    pub fn len(&self) -> usize {
        self.ranges.iter().map(|r| r.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ranges.iter().flat_map(|r| r.clone())
    }

    /// 1-based indices, as they are usually written.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }
}

impl BatchScheme {
    /// `K` contiguous batches of length `1/K`.
    pub fn equal_nonoverlapping(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::domain("K must be ≥ 2"));
        }
        let kf = k as f64;
        let batches = (0..k)
            .map(|j| {
                Batch::new([Interval {
                    start: j as f64 / kf,
                    end: if j + 1 == k { 1.0 } else { (j + 1) as f64 / kf },
                }])
            })
            .collect();
        Ok(BatchScheme {
            spec: SchemeSpec::Equal { k },
            batches,
        })
    }

    /// Contiguous non-overlapping batches with the given lengths.
    pub fn proportional_batches(gammas: &[f64]) -> Result<Self> {
        if gammas.len() < 2 {
            return Err(Error::domain("K must be ≥ 2"));
        }
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && g.is_finite())) {
            return Err(Error::domain(format!("batch fractions must be positive, got {g}")));
        }
        let total: f64 = gammas.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "batch fractions must sum to 1, got {total}"
            )));
        }
        let mut start = 0.0;
        let mut batches = Vec::with_capacity(gammas.len());
        for (j, g) in gammas.iter().enumerate() {
            let end = if j + 1 == gammas.len() { 1.0 } else { start + g };
            batches.push(Batch::new([Interval { start, end }]));
            start = end;
        }
        Ok(BatchScheme {
            spec: SchemeSpec::Proportional {
                gammas: gammas.to_vec(),
            },
            batches,
        })
    }

    /// Fractions `γ_j = j / (K(K+1)/2)`, growing linearly with the batch index.
    pub fn linear_gammas(k: usize) -> Vec<f64> {
        let total = (k * (k + 1) / 2) as f64;
        (1..=k).map(|j| j as f64 / total).collect()
    }

    /// Overlapping batches: batch 1 is the whole sample; batches `2..=K` have
    /// length `gamma` and start at `(j-2)(1-gamma)/(K-2)`.
    pub fn su_overlapping(k: usize, gamma: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::domain("overlapping batching needs K ≥ 3"));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::domain(format!(
                "overlapping batch fraction must lie in (0, 1), got {gamma}"
            )));
        }
        let step = (1.0 - gamma) / (k - 2) as f64;
        let mut batches = Vec::with_capacity(k);
        batches.push(Batch::new([Interval {
            start: 0.0,
            end: 1.0,
        }]));
        for j in 2..=k {
            let start = (j - 2) as f64 * step;
            let end = if j == k { 1.0 } else { (start + gamma).min(1.0) };
            let start = if j == k { 1.0 - gamma } else { start };
            batches.push(Batch::new([Interval { start, end }]));
        }
        Ok(BatchScheme {
            spec: SchemeSpec::SuOverlapping { k, gamma },
            batches,
        })
    }

    /// Batch `j` is everything except the `j`-th of `K` equal blocks.
    pub fn leave_one_batch_out(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::domain("the batched jackknife needs K ≥ 3"));
        }
        let kf = k as f64;
        let batches = (0..k)
            .map(|j| {
                let cut_lo = j as f64 / kf;
                let cut_hi = if j + 1 == k { 1.0 } else { (j + 1) as f64 / kf };
                Batch::new([
                    Interval {
                        start: 0.0,
                        end: cut_lo,
                    },
                    Interval {
                        start: cut_hi,
                        end: 1.0,
                    },
                ])
            })
            .collect();
        Ok(BatchScheme {
            spec: SchemeSpec::Jackknife { k },
            batches,
        })
    }

    pub fn from_spec(spec: &SchemeSpec) -> Result<Self> {
        match spec {
            SchemeSpec::Equal { k } => Self::equal_nonoverlapping(*k),
            SchemeSpec::Proportional { gammas } => Self::proportional_batches(gammas),
            SchemeSpec::SuOverlapping { k, gamma } => Self::su_overlapping(*k, *gamma),
            SchemeSpec::Jackknife { k } => Self::leave_one_batch_out(*k),
        }
    }

    pub fn spec(&self) -> &SchemeSpec {
        &self.spec
    }

    /// Number of batches, K.
    pub fn k(&self) -> usize {
        self.batches.len()
    }

    pub fn batches(&self) -> &[Batch] {
        &self.batches
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.batches.iter().map(Batch::length).collect()
    }

    /// β_ij; on the diagonal this is γ_i.
    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.batches[i].length()
        } else {
            self.batches[i].shared_with(&self.batches[j])
        }
    }

    /// `V_ii = 1/γ_i`, `V_ij = β_ij / (γ_i γ_j)`, verified SPD.
    pub fn covariance_shape(&self) -> Result<CovarianceShape> {
        let g = self.gammas();
        let m = SymMatrix::from_fn(self.k(), |i, j| {
            if i == j {
                1.0 / g[i]
            } else {
                self.overlap(i, j) / (g[i] * g[j])
            }
        });
        CovarianceShape::new(m, ShapeProvenance::BatchOverlap)
    }

    /// Maps every batch onto index ranges of a data set of size `n`.
    pub fn materialize(&self, n: usize) -> Result<Vec<IndexSet>> {
        if n < self.k() {
            return Err(Error::domain(format!(
                "data size {n} is smaller than the number of batches {}",
                self.k()
            )));
        }
        let nf = n as f64;
        let to_index = |x: f64| ((x * nf + FLOOR_SLACK).floor() as usize).min(n);
        self.batches
            .iter()
            .enumerate()
            .map(|(j, batch)| {
                let ranges: Vec<Range<usize>> = batch
                    .intervals
                    .iter()
                    .map(|iv| to_index(iv.start)..to_index(iv.end))
                    .filter(|r| !r.is_empty())
                    .collect();
                let set = IndexSet { ranges };
                if set.is_empty() {
                    Err(Error::domain(format!(
                        "batch {} is empty at data size {n}",
                        j + 1
                    )))
                } else {
                    Ok(set)
                }
            })
            .collect()
    }
}

impl TryFrom<SchemeSpec> for BatchScheme {
    type Error = Error;
    fn try_from(spec: SchemeSpec) -> Result<Self> {
        BatchScheme::from_spec(&spec)
    }
}

impl From<BatchScheme> for SchemeSpec {
    fn from(s: BatchScheme) -> SchemeSpec {
        s.spec
    }
}
