//! Samplers driven by a caller-supplied generator.

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};

use crate::error::{Error, Result};

#[inline]
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Exponential with the given rate (mean `1 / rate`).
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::domain(format!("exponential rate must be positive, got {rate}")));
    }
    let dist = Exp::new(rate).map_err(|e| Error::domain(format!("exponential rate: {e}")))?;
    Ok(dist.sample(rng))
}

/// Standard lognormal, `exp(Z)` with `Z ~ N(0, 1)`.
#[inline]
pub fn lognormal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    standard_normal(rng).exp()
}

/// Counts of `n` uniform draws over `n` categories: multinomial(n; 1/n, ..., 1/n).
///
/// This is the count vector of one with-replacement resample of size `n`.
pub fn sample_multinomial_counts<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Vec<u32>> {
    if n == 0 {
        return Err(Error::domain("multinomial needs at least one trial"));
    }
    let mut counts = vec![0u32; n];
    for _ in 0..n {
        counts[rng.random_range(0..n)] += 1;
    }
    Ok(counts)
}

/// Symmetric Dirichlet(a, ..., a) weights of length `n`, normalized to sum to 1.
///
/// `Var(n W_1) = (n - 1) / (n a + 1)`, which tends to `1 / a`.
pub fn sample_dirichlet<R: Rng + ?Sized>(rng: &mut R, a: f64, n: usize) -> Result<Vec<f64>> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(format!(
            "Dirichlet concentration must be positive, got {a}"
        )));
    }
    if n < 2 {
        return Err(Error::domain("Dirichlet weights need at least two categories"));
    }
    let gamma = Gamma::new(a, 1.0).map_err(|e| Error::domain(e.to_string()))?;
    let mut w: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        // Only reachable for tiny `a` where every gamma draw underflows.
        return Err(Error::domain("Dirichlet draw underflowed; concentration too small"));
    }
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}
