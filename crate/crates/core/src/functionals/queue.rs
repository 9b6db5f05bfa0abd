//! Single-server FIFO queue driven by an input service-time distribution.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;

use crate::error::{Error, Result};
use crate::stats::{exponential, RngStream};

use super::{Functional, FunctionalProperties, WeightedSample};

/// ψ(Q) = expected mean waiting time of the first `customers` customers of
/// an initially empty queue with Poisson(`arrival_rate`) arrivals and
/// service times drawn from Q, estimated with `inner_reps` simulation runs.
#[derive(Debug, Clone, Copy)]
pub struct TransientWaitingTime {
    pub arrival_rate: f64,
    pub customers: usize,
    pub inner_reps: usize,
}

impl TransientWaitingTime {
    pub fn new(arrival_rate: f64, customers: usize, inner_reps: usize) -> Result<Self> {
        if !(arrival_rate > 0.0 && arrival_rate.is_finite()) {
            return Err(Error::domain("arrival rate must be positive"));
        }
        if customers == 0 || inner_reps == 0 {
            return Err(Error::domain("customers and inner_reps must be positive"));
        }
        Ok(TransientWaitingTime {
            arrival_rate,
            customers,
            inner_reps,
        })
    }
}

impl Functional for TransientWaitingTime {
    fn evaluate(&self, sample: &WeightedSample, stream: &RngStream) -> Result<f64> {
        let services = WeightedIndex::new(sample.weights())
            .map_err(|e| Error::Functional(format!("service distribution: {e}")))?;
        let mut rng = stream.rng();
        let mut total = 0.0;
        for _ in 0..self.inner_reps {
            let mut wait = 0.0_f64;
            for c in 0..self.customers {
                total += wait;
                if c + 1 < self.customers {
                    let service = sample.row(services.sample(&mut rng))[0];
                    let gap = exponential(&mut rng, self.arrival_rate)?;
                    wait = (wait + service - gap).max(0.0);
                }
            }
        }
        Ok(total / (self.inner_reps * self.customers) as f64)
    }

    fn properties(&self) -> FunctionalProperties {
        FunctionalProperties {
            deterministic: false,
            concurrent_safe: true,
        }
    }

    fn name(&self) -> String {
        format!("mean_wait_first_{}", self.customers)
    }
}

/// `E[(G_μ − G_λ)⁺]` for independent Erlang(j, μ) and Erlang(j, λ).
fn erlang_difference_positive_part(j: usize, lambda: f64, mu: f64) -> f64 {
    let r = lambda / (lambda + mu);
    let s = mu / (lambda + mu);
    let jf = j as f64;
    // binom(j + i - 1, i) s^i, built incrementally.
    let mut coef = 1.0;
    let mut first = 0.0;
    let mut second = 0.0;
    for i in 0..=j {
        if i > 0 {
            coef *= (jf + i as f64 - 1.0) / i as f64 * s;
        }
        first += coef;
        if i < j {
            second += (jf + i as f64) * coef;
        }
    }
    r.powi(j as i32) * (jf / mu * first - second / (lambda + mu))
}

/// Exact `E[(1/c) Σ_{k=1}^{c} W_k]` for an M/M/1 queue starting empty.
///
/// `W_k` has the law of the running maximum of a `k-1` step random walk
/// with increments `S − A`, whose mean follows from Spitzer's identity
/// `E[M_m] = Σ_{j=1}^{m} E[S_j⁺] / j`.
pub fn mm1_transient_mean_wait(lambda: f64, mu: f64, customers: usize) -> f64 {
    let terms: Vec<f64> = (1..customers)
        .map(|j| erlang_difference_positive_part(j, lambda, mu) / j as f64)
        .collect();
    let mut total = 0.0;
    for k in 1..=customers {
        total += terms[..k - 1].iter().sum::<f64>();
    }
    total / customers as f64
}
