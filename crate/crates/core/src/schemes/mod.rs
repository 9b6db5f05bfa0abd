//! Stage-1 plans and the covariance shapes they induce.

mod batch;
mod resample;
mod shape;

pub use batch::{Batch, BatchScheme, IndexSet, Interval, SchemeSpec};
pub use resample::{cheap_bootstrap_plan, weighted_plan, ResampleKind, ResamplePlan};
pub use shape::{
    cheap_bootstrap_shape, weighted_bootstrap_shape, CovarianceShape, ShapeProvenance,
};
