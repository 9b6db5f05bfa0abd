//! Resampling plans for the cheap bootstrap and its weighted variant.

use serde::{Deserialize, Serialize};

use super::shape::{cheap_bootstrap_shape, weighted_bootstrap_shape, CovarianceShape};
use crate::error::{Error, Result};
use crate::stats::{sample_dirichlet, sample_multinomial_counts, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResampleKind {
    /// With-replacement resampling: weights are multinomial counts / n.
    CheapBootstrap,
    /// Symmetric Dirichlet(a) weights.
    Weighted { a: f64 },
}

impl ResampleKind {
    /// `lim Var(n W₁)`: 1 for multinomial counts, `1/a` for Dirichlet(a).
    pub fn sigma_w_sq(&self) -> f64 {
        match self {
            ResampleKind::CheapBootstrap => 1.0,
            ResampleKind::Weighted { a } => 1.0 / a,
        }
    }

    pub fn covariance_shape(&self, k: usize) -> Result<CovarianceShape> {
        match self {
            ResampleKind::CheapBootstrap => cheap_bootstrap_shape(k),
            ResampleKind::Weighted { .. } => weighted_bootstrap_shape(k, self.sigma_w_sq()),
        }
    }
}

/// `K` weight vectors over the `n` observations. Slot 0 is the original
/// empirical distribution (uniform weights); slots `1..K` are resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct ResamplePlan {
    kind: ResampleKind,
    n: usize,
    weights: Vec<Vec<f64>>,
}

fn check(k: usize, n: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::domain("K must be ≥ 2"));
    }
    if n < 2 {
        return Err(Error::domain("resampling needs at least two observations"));
    }
    Ok(())
}

/// Resample `b` draws from `stream.substream(b)`, so plans for different `K`
/// share their leading resamples.
pub fn cheap_bootstrap_plan(stream: &RngStream, k: usize, n: usize) -> Result<ResamplePlan> {
    check(k, n)?;
    let mut weights = Vec::with_capacity(k);
    weights.push(vec![1.0 / n as f64; n]);
    for b in 1..k {
        let mut rng = stream.substream(b as u64).rng();
        let counts = sample_multinomial_counts(&mut rng, n)?;
        weights.push(counts.iter().map(|&c| c as f64 / n as f64).collect());
    }
    Ok(ResamplePlan {
        kind: ResampleKind::CheapBootstrap,
        n,
        weights,
    })
}

pub fn weighted_plan(stream: &RngStream, k: usize, n: usize, a: f64) -> Result<ResamplePlan> {
    check(k, n)?;
    let mut weights = Vec::with_capacity(k);
    weights.push(vec![1.0 / n as f64; n]);
    for b in 1..k {
        let mut rng = stream.substream(b as u64).rng();
        weights.push(sample_dirichlet(&mut rng, a, n)?);
    }
    Ok(ResamplePlan {
        kind: ResampleKind::Weighted { a },
        n,
        weights,
    })
}

impl ResamplePlan {
    pub fn kind(&self) -> ResampleKind {
        self.kind
    }

    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight vectors; index 0 is the original sample.
    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn resamples(&self) -> &[Vec<f64>] {
        &self.weights[1..]
    }

    pub fn sigma_w_sq(&self) -> f64 {
        self.kind.sigma_w_sq()
    }

    pub fn covariance_shape(&self) -> Result<CovarianceShape> {
        self.kind.covariance_shape(self.k())
    }
}
