//! Confidence intervals from a handful of black-box evaluations.
//!
//! A Stage-1 plan (batching, overlapping batching, the batched jackknife or a
//! cheap bootstrap) produces `K` estimates of a functional. Their joint
//! limiting covariance is known up to a scale, and a Stage-2 formula turns the
//! estimates into a t-calibrated interval. The crate provides
//!
//! * [`stats`]: reproducible random streams and the t, normal and chi-square
//!   distributions;
//! * [`linalg`]: small dense symmetric matrices and Cholesky solves;
//! * [`schemes`]: batch layouts, resampling plans and their covariance shapes;
//! * [`functionals`]: the black-box functional contract and built-in models;
//! * [`ci`]: the interval formulas;
//! * [`harness`]: coverage experiments.
//!
//! ```
//! use cheapci::ci::ci_cheap_bootstrap;
//! use cheapci::stats::Probability;
//!
//! let ci = ci_cheap_bootstrap(&[1.0, 1.5], Probability::new(0.05)?)?;
//! assert_eq!(ci.center, 1.0);
//! assert!((ci.half_width - 6.3531).abs() < 1e-4);
//! # Ok::<(), cheapci::Error>(())
//! ```

pub mod ci;
mod error;
pub mod functionals;
pub mod harness;
pub mod linalg;
pub mod schemes;
pub mod stats;

pub use error::{Error, Result};
