use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, Cholesky, SymMatrix};

/// Where a covariance shape came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeProvenance {
    /// Derived from batch sizes and overlaps.
    BatchOverlap,
    CheapBootstrap,
    WeightedBootstrap,
    /// Supplied directly by the caller.
    User,
}

/// The joint CLT covariance of the Stage-1 estimates, known up to a positive
/// scale. Always symmetric positive definite; the Cholesky factor is kept.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceShape {
    matrix: SymMatrix,
    factor: Cholesky,
    provenance: ShapeProvenance,
}

impl CovarianceShape {
    pub fn new(matrix: SymMatrix, provenance: ShapeProvenance) -> Result<Self> {
        let factor = cholesky(&matrix)?;
        Ok(CovarianceShape {
            matrix,
            factor,
            provenance,
        })
    }

    pub fn from_user(matrix: SymMatrix) -> Result<Self> {
        Self::new(matrix, ShapeProvenance::User)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn factor(&self) -> &Cholesky {
        &self.factor
    }

    pub fn provenance(&self) -> ShapeProvenance {
        self.provenance
    }

    /// The same shape multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("scale must be positive, got {c}")));
        }
        Self::new(self.matrix.scaled(c), self.provenance)
    }
}

/// `V` for the sample-plus-resamples layout: `V_11 = 1`, `V_1i = V_ij = 1`,
/// `V_ii = 1 + sigma_w_sq` for `i >= 2`.
fn resample_matrix(k: usize, sigma_w_sq: f64) -> Result<SymMatrix> {
    if k < 2 {
        return Err(Error::domain("K must be ≥ 2"));
    }
    if !(sigma_w_sq > 0.0 && sigma_w_sq.is_finite()) {
        return Err(Error::domain(format!(
            "sigma_w_sq must be positive, got {sigma_w_sq}"
        )));
    }
    Ok(SymMatrix::from_fn(k, |i, j| {
        if i == j && i > 0 {
            1.0 + sigma_w_sq
        } else {
            1.0
        }
    }))
}

/// Covariance shape of `(ψ(P̂ₙ), ψ(P*¹), ..., ψ(P*ᴷ⁻¹))` for the cheap bootstrap.
pub fn cheap_bootstrap_shape(k: usize) -> Result<CovarianceShape> {
    CovarianceShape::new(resample_matrix(k, 1.0)?, ShapeProvenance::CheapBootstrap)
}

/// Covariance shape for the weighted cheap bootstrap with weight variance
/// limit `sigma_w_sq = lim Var(n W₁)`.
pub fn weighted_bootstrap_shape(k: usize, sigma_w_sq: f64) -> Result<CovarianceShape> {
    CovarianceShape::new(
        resample_matrix(k, sigma_w_sq)?,
        ShapeProvenance::WeightedBootstrap,
    )
}
