//! Kolmogorov-complexity estimation for numeric time series.
//!
//! Series go through reversible transformations (returns, differences,
//! discretization, bit packing), then through a battery of lossless coders.
//! A coder's compression rate, judged against a Monte-Carlo null of i.i.d.
//! uniform sequences, estimates how much structure is left; classical
//! statistical tests run alongside as baselines.

pub mod bitcodec;
pub mod codecs;
pub mod discretize;
pub mod error;
pub mod generators;
pub mod numeric;
mod pi;
pub mod pipeline;
pub mod series;
pub mod stats;

pub use error::{Error, Result};
