//! Data generators for the experiments.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymMatrix};
use crate::stats::{exponential, lognormal, standard_normal, RngStream};

use super::WeightedSample;

/// `n` i.i.d. standard lognormal draws.
pub fn gen_lognormal(stream: &RngStream, n: usize) -> Result<WeightedSample> {
    let mut rng = stream.rng();
    WeightedSample::scalar((0..n).map(|_| lognormal(&mut rng)).collect())
}

/// `n` i.i.d. standard normal draws.
pub fn gen_normal(stream: &RngStream, n: usize) -> Result<WeightedSample> {
    let mut rng = stream.rng();
    WeightedSample::scalar((0..n).map(|_| standard_normal(&mut rng)).collect())
}

/// `n` i.i.d. exponential draws with the given rate.
pub fn gen_exponential(stream: &RngStream, n: usize, rate: f64) -> Result<WeightedSample> {
    let mut rng = stream.rng();
    let values = (0..n)
        .map(|_| exponential(&mut rng, rate))
        .collect::<Result<Vec<_>>>()?;
    WeightedSample::scalar(values)
}

/// System times (wait + service) of an M/M/1 queue that starts empty, via
/// the Lindley recursion `W_{k+1} = max(W_k + S_k − A_{k+1}, 0)`. The first
/// `warmup` customers are discarded; the remaining `n` form a dependent sequence.
pub fn gen_mm1_system_times(
    stream: &RngStream,
    n: usize,
    warmup: usize,
    lambda: f64,
    mu: f64,
) -> Result<WeightedSample> {
    if !(lambda > 0.0 && mu > 0.0) {
        return Err(Error::domain("arrival and service rates must be positive"));
    }
    if lambda >= mu {
        return Err(Error::domain(format!(
            "unstable queue: arrival rate {lambda} must be below service rate {mu}"
        )));
    }
    let mut rng = stream.rng();
    let mut out = Vec::with_capacity(n);
    let mut wait = 0.0_f64;
    for k in 0..warmup + n {
        let service = exponential(&mut rng, mu)?;
        if k >= warmup {
            out.push(wait + service);
        }
        let gap = exponential(&mut rng, lambda)?;
        wait = (wait + service - gap).max(0.0);
    }
    WeightedSample::scalar(out)
}

/// Rows `(x, y)` with `x ~ N(0, Σ)`, `Σ_ij = cov_scale · cov_decay^|i−j|`,
/// and `y ~ Bernoulli(1 / (1 + e^{−βᵀx}))`.
pub fn gen_logistic_data(
    stream: &RngStream,
    n: usize,
    beta: &[f64],
    cov_scale: f64,
    cov_decay: f64,
) -> Result<WeightedSample> {
    let d = beta.len();
    if d == 0 {
        return Err(Error::domain("need at least one coefficient"));
    }
    if !(cov_scale > 0.0) || !(cov_decay.abs() < 1.0) {
        return Err(Error::domain(
            "covariance needs a positive scale and |decay| < 1",
        ));
    }
    let cov = SymMatrix::from_fn(d, |i, j| cov_scale * cov_decay.powi((j - i) as i32));
    let chol = cholesky(&cov)?;
    let mut rng = stream.rng();
    let mut pts = Vec::with_capacity(n * (d + 1));
    let mut z = vec![0.0; d];
    for _ in 0..n {
        z.iter_mut().for_each(|v| *v = standard_normal(&mut rng));
        let x = chol.mul_lower(&z);
        let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
        let y = if rng.random::<f64>() < 1.0 / (1.0 + (-eta).exp()) {
            1.0
        } else {
            0.0
        };
        pts.extend_from_slice(&x);
        pts.push(y);
    }
    WeightedSample::uniform(pts, d + 1)
}
