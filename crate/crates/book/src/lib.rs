//! The guide's chapters, included so that `cargo test` runs every listing.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/stage_one.md")]
pub mod stage_one {}
#[doc = include_str!("../../../book/src/intervals.md")]
pub mod intervals {}
#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
