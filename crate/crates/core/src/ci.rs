//! Stage-2 interval formulas.
//!
//! Every function takes the `K` Stage-1 estimates and returns a symmetric
//! interval `center ± half_width`. [`ci_gs`] is the general construction for
//! an arbitrary covariance shape; the others are closed forms it reduces to
//! under the corresponding schemes, plus the overlapping-batch baseline with
//! simulated critical values.

use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::sample_mvn_with;
use crate::schemes::{CovarianceShape, ResampleKind, SchemeSpec};
use crate::stats::{t_quantile, Probability, RngStream};

/// Which formula produced an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiKind {
    General,
    StandardBatching,
    GeneralBatching,
    BatchedJackknife,
    CheapBootstrap,
    WeightedCheapBootstrap,
    OverlappingBatching,
}

/// A symmetric confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalResult {
    pub center: f64,
    pub half_width: f64,
    /// Nominal coverage, `1 - alpha`.
    pub level: Probability,
    pub kind: CiKind,
}

impl IntervalResult {
    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// How a Stage-1 vector was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOneSource {
    Batches(SchemeSpec),
    Resamples(ResampleKind),
    Unspecified,
}

/// The estimates `(ψ_1, ..., ψ_K)`, all finite, `K ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageOneVector {
    values: Vec<f64>,
    source: StageOneSource,
}

impl StageOneVector {
    pub fn new(values: Vec<f64>, source: StageOneSource) -> Result<Self> {
        check_estimates(&values, 2)?;
        Ok(StageOneVector { values, source })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn source(&self) -> &StageOneSource {
        &self.source
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for StageOneVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.values
    }
}

fn check_estimates(y: &[f64], min_k: usize) -> Result<()> {
    if y.len() < min_k {
        return Err(Error::domain(format!(
            "K must be ≥ {min_k}, got {}",
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "estimate {} is not finite ({})",
            i + 1,
            y[i]
        )));
    }
    Ok(())
}

fn t_critical(k: usize, alpha: Probability) -> Result<f64> {
    t_quantile(k - 1, alpha.upper_half())
}

/// Differences from the first estimate. Working with these keeps constant
/// input exactly degenerate.
fn deviations(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| v - y[0]).collect()
}

/// Mean and unbiased sample variance.
fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, ss / (n - 1.0))
}

fn result(center: f64, half_width: f64, alpha: Probability, kind: CiKind) -> IntervalResult {
    IntervalResult {
        center,
        half_width,
        level: alpha.complement(),
        kind,
    }
}

/// The general interval for estimates with covariance proportional to
/// `shape`:
///
/// `1ᵀΣ⁻¹Y/λ ± t_{K-1,1-α/2} / √(λ(K-1)) · √(rᵀΣ⁻¹r)`, `λ = 1ᵀΣ⁻¹1`,
/// `r = Y - center·1`.
///
/// ```
/// use cheapci::ci::{ci_gs, ci_standard_batching};
/// use cheapci::linalg::SymMatrix;
/// use cheapci::schemes::CovarianceShape;
/// use cheapci::stats::Probability;
///
/// let y = [1.0, 2.0, 4.0];
/// let alpha = Probability::new(0.1)?;
/// let shape = CovarianceShape::from_user(SymMatrix::identity(3))?;
/// let gs = ci_gs(&y, &shape, alpha)?;
/// let b = ci_standard_batching(&y, alpha)?;
/// assert!((gs.half_width - b.half_width).abs() < 1e-12);
/// # Ok::<(), cheapci::Error>(())
/// ```
pub fn ci_gs(y: &[f64], shape: &CovarianceShape, alpha: Probability) -> Result<IntervalResult> {
    check_estimates(y, 2)?;
    let k = y.len();
    if shape.dim() != k {
        return Err(Error::DimensionMismatch {
            expected: shape.dim(),
            found: k,
        });
    }
    let chol = shape.factor();
    let w = chol.solve(&vec![1.0; k])?;
    let lambda: f64 = w.iter().sum();
    let d = deviations(y);
    let shift = w.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() / lambda;
    let r: Vec<f64> = d.iter().map(|v| v - shift).collect();
    let q = chol.quad_form_inv(&r)?.max(0.0);
    let half = t_critical(k, alpha)? / (lambda * (k - 1) as f64).sqrt() * q.sqrt();
    Ok(result(y[0] + shift, half, alpha, CiKind::General))
}

/// `mean(Y) ± t_{K-1,1-α/2} S/√K` for non-overlapping equal batches.
pub fn ci_standard_batching(y: &[f64], alpha: Probability) -> Result<IntervalResult> {
    check_estimates(y, 2)?;
    let k = y.len();
    let (m, v) = mean_var(&deviations(y));
    let half = t_critical(k, alpha)? * (v / k as f64).sqrt();
    Ok(result(y[0] + m, half, alpha, CiKind::StandardBatching))
}

/// Checks batch fractions: `K` positive values summing to 1.
pub fn validate_gammas(gammas: &[f64]) -> Result<()> {
    if gammas.iter().any(|g| !(*g > 0.0 && g.is_finite())) {
        return Err(Error::domain("batch fractions must be positive"));
    }
    let total: f64 = gammas.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "batch fractions must sum to 1, got {total}"
        )));
    }
    Ok(())
}

/// Batches of unequal sizes `γ_j`:
/// `Σγ_jψ_j ± t_{K-1,1-α/2} √(Σγ_j(ψ_j - ψ̄)²) / √(K-1)`.
pub fn ci_general_batching(
    y: &[f64],
    gammas: &[f64],
    alpha: Probability,
) -> Result<IntervalResult> {
    check_estimates(y, 2)?;
    let k = y.len();
    if gammas.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: gammas.len(),
        });
    }
    validate_gammas(gammas)?;
    let d = deviations(y);
    let m: f64 = gammas.iter().zip(&d).map(|(g, v)| g * v).sum();
    let ss: f64 = gammas
        .iter()
        .zip(&d)
        .map(|(g, v)| g * (v - m) * (v - m))
        .sum();
    let half = t_critical(k, alpha)? * (ss / (k - 1) as f64).sqrt();
    Ok(result(y[0] + m, half, alpha, CiKind::GeneralBatching))
}

/// Leave-one-batch-out estimates: pseudo-values
/// `J_i = Σψ_j - (K-1)ψ_i`, then `mean(J) ± t_{K-1,1-α/2} S(J)/√K`.
pub fn ci_batched_jackknife(y: &[f64], alpha: Probability) -> Result<IntervalResult> {
    check_estimates(y, 3)?;
    let k = y.len();
    let d = deviations(y);
    let total: f64 = d.iter().sum();
    let km1 = (k - 1) as f64;
    let pseudo: Vec<f64> = d.iter().map(|v| total - km1 * v).collect();
    let (m, v) = mean_var(&pseudo);
    let half = t_critical(k, alpha)? * (v / k as f64).sqrt();
    Ok(result(y[0] + m, half, alpha, CiKind::BatchedJackknife))
}

fn resample_spread(y: &[f64]) -> f64 {
    let ss: f64 = y[1..].iter().map(|v| (v - y[0]) * (v - y[0])).sum();
    (ss / (y.len() - 1) as f64).sqrt()
}

/// `Y_1` is the full-sample estimate, `Y_2..Y_K` resample estimates:
/// `Y_1 ± t_{K-1,1-α/2} √(Σ_{b≥2}(Y_b - Y_1)² / (K-1))`.
pub fn ci_cheap_bootstrap(y: &[f64], alpha: Probability) -> Result<IntervalResult> {
    check_estimates(y, 2)?;
    let half = t_critical(y.len(), alpha)? * resample_spread(y);
    Ok(result(y[0], half, alpha, CiKind::CheapBootstrap))
}

/// Cheap bootstrap with random weights of variance limit `σ_W²`; the
/// half-width is divided by `σ_W`.
pub fn ci_weighted_cheap_bootstrap(
    y: &[f64],
    sigma_w_sq: f64,
    alpha: Probability,
) -> Result<IntervalResult> {
    check_estimates(y, 2)?;
    if !(sigma_w_sq > 0.0 && sigma_w_sq.is_finite()) {
        return Err(Error::domain(format!(
            "sigma_w_sq must be positive, got {sigma_w_sq}"
        )));
    }
    let half = t_critical(y.len(), alpha)? * resample_spread(y) / sigma_w_sq.sqrt();
    Ok(result(y[0], half, alpha, CiKind::WeightedCheapBootstrap))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "overlapping batch fraction must lie in (0, 1), got {gamma}"
        )))
    }
}

/// `S_OB = √(γ/(1-γ) · Σ_{j≥2}(Y_j - Y_1)² / (K-1))`.
fn ob_scale(y: &[f64], gamma: f64) -> f64 {
    (gamma / (1.0 - gamma)).sqrt() * resample_spread(y)
}

/// Overlapping-batch baseline: `Y_1 ± c · S_OB`, where `Y_1` is the
/// full-sample estimate, `Y_2..Y_K` come from overlapping batches of fraction
/// `gamma`, and `critical` was calibrated for `alpha`
/// (see [`calibrate_ob_critical`]).
pub fn ci_ob_su(
    y: &[f64],
    gamma: f64,
    critical: f64,
    alpha: Probability,
) -> Result<IntervalResult> {
    check_estimates(y, 3)?;
    check_gamma(gamma)?;
    if !(critical > 0.0 && critical.is_finite()) {
        return Err(Error::domain(format!(
            "critical value must be positive, got {critical}"
        )));
    }
    Ok(result(
        y[0],
        critical * ob_scale(y, gamma),
        alpha,
        CiKind::OverlappingBatching,
    ))
}

/// Smallest number of Monte Carlo draws accepted by [`calibrate_ob_critical`].
pub const OB_MIN_MC_REPS: usize = 100_000;

/// Draws per independently seeded chunk.
const OB_CHUNK: usize = 8192;

/// Sections used for the batch-means standard error.
const OB_SECTIONS: usize = 20;

/// A simulated critical value with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObCritical {
    pub value: f64,
    pub std_error: f64,
    pub mc_reps: usize,
}

fn order_statistic(sorted: &[f64], level: f64) -> f64 {
    let m = sorted.len();
    let idx = ((level * m as f64).ceil() as usize).clamp(1, m) - 1;
    sorted[idx]
}

/// The `1-α` quantile of `|Z_1 / S_OB(Z)|` for `Z ~ N(0, V_OB)`, estimated
/// from `mc_reps` draws.
///
/// Chunk `c` of draws uses `stream.substream(c)`, and the quantile is taken
/// after sorting, so the result does not depend on the number of threads.
/// The standard error comes from the spread of quantiles computed on 20
/// consecutive sections of the draws.
pub fn calibrate_ob_critical(
    v_ob: &CovarianceShape,
    gamma: f64,
    alpha: Probability,
    mc_reps: usize,
    stream: &RngStream,
) -> Result<ObCritical> {
    check_gamma(gamma)?;
    if v_ob.dim() < 3 {
        return Err(Error::domain("K must be ≥ 3"));
    }
    if mc_reps < OB_MIN_MC_REPS {
        return Err(Error::domain(format!(
            "mc_reps too small: need at least {OB_MIN_MC_REPS}, got {mc_reps}"
        )));
    }
    let chol = v_ob.factor();
    let chunks = mc_reps.div_ceil(OB_CHUNK);
    let draws: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = OB_CHUNK.min(mc_reps - c * OB_CHUNK);
            let mut rng = stream.substream(c as u64).rng();
            (0..len)
                .map(|_| {
                    let z = sample_mvn_with(&mut rng, chol);
                    (z[0] / ob_scale(&z, gamma)).abs()
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .concat();

    let level = alpha.complement().value();
    let section = draws.len() / OB_SECTIONS;
    let section_q: Vec<f64> = draws
        .chunks_exact(section)
        .take(OB_SECTIONS)
        .map(|s| {
            let mut s = s.to_vec();
            s.sort_unstable_by(f64::total_cmp);
            order_statistic(&s, level)
        })
        .collect();
    let (_, var) = mean_var(&section_q);

    let mut sorted = draws;
    sorted.sort_unstable_by(f64::total_cmp);
    Ok(ObCritical {
        value: order_statistic(&sorted, level),
        std_error: (var / OB_SECTIONS as f64).sqrt(),
        mc_reps,
    })
}
