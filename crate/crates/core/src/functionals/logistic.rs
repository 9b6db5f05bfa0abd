//! Weighted logistic regression by iteratively reweighted least squares.
//!
//! Rows are `(x_1, ..., x_d, y)` with `y ∈ {0, 1}`; the model has no
//! intercept: `P(Y = 1 | x) = 1 / (1 + exp(-βᵀx))`.

use crate::error::{Error, Result};
use crate::linalg::{cholesky, SymMatrix};
use crate::stats::RngStream;

use super::{Functional, WeightedSample};

pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITER: usize = 100;
/// Coefficients beyond this magnitude indicate (quasi-)separation.
const DIVERGENCE_BOUND: f64 = 1e4;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticFit {
    pub coefficients: Vec<f64>,
    pub iterations: usize,
}

#[inline]
fn sigmoid(eta: f64) -> f64 {
    1.0 / (1.0 + (-eta).exp())
}

/// Gradient of the weighted log-likelihood `Σ wᵢ [yᵢ ηᵢ - log(1 + e^ηᵢ)]`.
pub fn log_likelihood_gradient(sample: &WeightedSample, beta: &[f64]) -> Vec<f64> {
    let d = beta.len();
    let mut g = vec![0.0; d];
    for (row, &w) in sample.rows().zip(sample.weights()) {
        if w == 0.0 {
            continue;
        }
        let x = &row[..d];
        let eta: f64 = x.iter().zip(beta).map(|(a, b)| a * b).sum();
        let r = w * (row[d] - sigmoid(eta));
        for (gj, xj) in g.iter_mut().zip(x) {
            *gj += r * xj;
        }
    }
    g
}

fn check_rows(sample: &WeightedSample) -> Result<usize> {
    if sample.width() < 2 {
        return Err(Error::domain(
            "logistic rows need at least one covariate and a response",
        ));
    }
    let d = sample.width() - 1;
    if sample.rows().any(|r| r[d] != 0.0 && r[d] != 1.0) {
        return Err(Error::domain("logistic responses must be 0 or 1"));
    }
    Ok(d)
}

/// Weighted maximum-likelihood fit. Converged when the largest coefficient
/// update is below [`IRLS_TOL`]; fails after [`IRLS_MAX_ITER`] iterations or
/// when coefficients diverge.
pub fn fit_logistic(sample: &WeightedSample) -> Result<LogisticFit> {
    let d = check_rows(sample)?;
    let mut beta = vec![0.0; d];
    let mut hess = vec![0.0; d * d];
    let mut grad = vec![0.0; d];
    for iteration in 1..=IRLS_MAX_ITER {
        hess.iter_mut().for_each(|h| *h = 0.0);
        grad.iter_mut().for_each(|g| *g = 0.0);
        for (row, &w) in sample.rows().zip(sample.weights()) {
            if w == 0.0 {
                continue;
            }
            let x = &row[..d];
            let eta: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
            let p = sigmoid(eta);
            let r = w * (row[d] - p);
            let v = w * p * (1.0 - p);
            for i in 0..d {
                grad[i] += r * x[i];
                let vxi = v * x[i];
                let hrow = &mut hess[i * d..i * d + i + 1];
                for (h, xj) in hrow.iter_mut().zip(x) {
                    *h += vxi * xj;
                }
            }
        }
        let h = SymMatrix::from_fn(d, |i, j| hess[j * d + i]);
        let step = cholesky(&h)
            .and_then(|c| c.solve(&grad))
            .map_err(|_| Error::Functional("logistic Hessian is singular".into()))?;
        let mut max_change = 0.0_f64;
        for (b, s) in beta.iter_mut().zip(&step) {
            *b += s;
            max_change = max_change.max(s.abs());
        }
        if beta.iter().any(|b| !b.is_finite() || b.abs() > DIVERGENCE_BOUND) {
            return Err(Error::Functional(
                "logistic fit diverged (separated data)".into(),
            ));
        }
        if max_change < IRLS_TOL {
            return Ok(LogisticFit {
                coefficients: beta,
                iterations: iteration,
            });
        }
    }
    Err(Error::Functional(format!(
        "logistic fit did not converge in {IRLS_MAX_ITER} iterations"
    )))
}

/// ψ(Q) = one coefficient (1-based `index`) of the logistic fit.
#[derive(Debug, Clone, Copy)]
pub struct LogisticCoefficient {
    pub index: usize,
}

impl LogisticCoefficient {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::domain("coefficient index is 1-based"));
        }
        Ok(LogisticCoefficient { index })
    }
}

impl Functional for LogisticCoefficient {
    fn evaluate(&self, sample: &WeightedSample, _stream: &RngStream) -> Result<f64> {
        if self.index >= sample.width() {
            return Err(Error::domain(format!(
                "coefficient {} out of range for {} covariates",
                self.index,
                sample.width() - 1
            )));
        }
        Ok(fit_logistic(sample)?.coefficients[self.index - 1])
    }

    fn name(&self) -> String {
        format!("logistic_beta_{}", self.index)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::gen_logistic_data;
    use crate::stats::sample_multinomial_counts;

    /// Plain Newton–Raphson on the unweighted likelihood of an explicitly
    /// expanded data set, solved by Gauss–Jordan elimination.
    fn reference_fit(rows: &[Vec<f64>]) -> Vec<f64> {
        let d = rows[0].len() - 1;
        let mut beta = vec![0.0; d];
        for _ in 0..200 {
            let mut a = vec![vec![0.0; d + 1]; d];
            for r in rows {
                let eta: f64 = (0..d).map(|j| r[j] * beta[j]).sum();
                let p = 1.0 / (1.0 + (-eta).exp());
                for i in 0..d {
                    a[i][d] += (r[d] - p) * r[i];
                    for j in 0..d {
                        a[i][j] += p * (1.0 - p) * r[i] * r[j];
                    }
                }
            }
            for c in 0..d {
                let piv = (c..d)
                    .max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs()))
                    .unwrap();
                a.swap(c, piv);
                let div = a[c][c];
                for v in a[c].iter_mut() {
                    *v /= div;
                }
                for r in 0..d {
                    if r != c {
                        let f = a[r][c];
                        for k in 0..=d {
                            a[r][k] -= f * a[c][k];
                        }
                    }
                }
            }
            let mut change = 0.0_f64;
            for i in 0..d {
                beta[i] += a[i][d];
                change = change.max(a[i][d].abs());
            }
            if change < 1e-13 {
                break;
            }
        }
        beta
    }

    fn data(n: usize, seed: u64) -> WeightedSample {
        let beta = [1.0, -0.5, 0.25];
        gen_logistic_data(&RngStream::new(seed, 0), n, &beta, 1.0, 0.5).unwrap()
    }

    #[test]
    fn uniform_weights_match_reference() {
        let s = data(2000, 1);
        let rows: Vec<Vec<f64>> = s.rows().map(|r| r.to_vec()).collect();
        let fit = fit_logistic(&s).unwrap();
        let reference = reference_fit(&rows);
        for (a, b) in fit.coefficients.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn count_weights_match_expanded_reference() {
        let s = data(600, 2);
        let mut rng = RngStream::new(2, 9).rng();
        let counts = sample_multinomial_counts(&mut rng, s.len()).unwrap();
        let weights: Vec<f64> = counts.iter().map(|&c| c as f64 / s.len() as f64).collect();
        let w = s.reweighted(&weights).unwrap();
        let mut expanded = Vec::new();
        for (row, &c) in s.rows().zip(&counts) {
            for _ in 0..c {
                expanded.push(row.to_vec());
            }
        }
        let fit = fit_logistic(&w).unwrap();
        let reference = reference_fit(&expanded);
        for (a, b) in fit.coefficients.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn first_order_optimality() {
        for seed in 0..5 {
            let s = data(1500, 10 + seed);
            let fit = fit_logistic(&s).unwrap();
            let g = log_likelihood_gradient(&s, &fit.coefficients);
            assert!(g.iter().all(|v| v.abs() < 1e-6), "{g:?}");
        }
    }

    #[test]
    fn symmetric_data_gives_zero() {
        // Every x appears once with y = 1 and once with y = 0.
        let mut pts = Vec::new();
        for i in 0..200 {
            let x = (i as f64 - 100.0) / 37.0;
            pts.extend_from_slice(&[x, 1.0, x, 0.0]);
        }
        let s = WeightedSample::uniform(pts, 2).unwrap();
        let b = LogisticCoefficient::new(1)
            .unwrap()
            .evaluate(&s, &RngStream::new(0, 0))
            .unwrap();
        assert!(b.abs() < 1e-10);
    }

    #[test]
    fn separation_is_reported() {
        let pts = vec![-2.0, 0.0, -1.0, 0.0, 1.0, 1.0, 2.0, 1.0];
        let s = WeightedSample::uniform(pts, 2).unwrap();
        assert!(matches!(fit_logistic(&s), Err(Error::Functional(_))));
    }

    #[test]
    fn rejects_bad_responses() {
        let s = WeightedSample::uniform(vec![1.0, 0.5, 2.0, 1.0], 2).unwrap();
        assert!(fit_logistic(&s).is_err());
        assert!(LogisticCoefficient::new(0).is_err());
    }
}
