//! Reproducible randomness and the distributions the interval formulas need.

mod dist;
mod ks;
mod rng;
mod sample;
pub(crate) mod special;

pub use dist::{
    chi_square_cdf, chi_square_quantile, erf, normal_cdf, normal_pdf, normal_quantile, t_cdf,
    t_pdf, t_quantile, Probability,
};
pub use ks::{ks_one_sample, ks_two_sample};
pub use rng::{RngStream, StreamRng};
pub use sample::{
    exponential, lognormal, sample_dirichlet, sample_multinomial_counts, standard_normal,
};
