//! Streaming quantile sketches over `u64` keys.
//!
//! [`KllSketch`] is a KLL compactor hierarchy with a sampler in place of its
//! capacity-2 bottom heights. [`LinearSketch`] replaces the top `t` heights of
//! that hierarchy with a [`LinearCompactor`]: a sorted list of real-weighted
//! points whose rank function interpolates linearly between neighbours and
//! which halves itself by keeping the subset with the smallest supremum rank
//! error. With `t = 0` the two sketches coincide.
//!
//! Weights of the linear compactor are generic over [`Scalar`] (`f32` or
//! `f64`); the aliases below fix the scalar.

mod codec;
pub mod data;
pub mod error;
pub mod kll;
pub mod linear;
pub mod oracle;
pub mod scalar;
pub mod sketch;
pub mod view;

pub use error::{Error, Result};
pub use kll::KllSketch;
pub use linear::{LinearCompactor, RankFunction, WeightedPoint};
pub use oracle::{error_metrics, ErrorMetrics, EvalPoints, ExactRank, RankEstimate};
pub use scalar::Scalar;
pub use sketch::{LinearSketch, SketchParams, TopCompaction};
pub use view::RankView;

pub type LinearSketch64 = LinearSketch<f64>;
pub type LinearSketch32 = LinearSketch<f32>;
pub type LinearCompactor64 = LinearCompactor<f64>;
pub type LinearCompactor32 = LinearCompactor<f32>;
pub type WeightedPoint64 = WeightedPoint<f64>;
pub type WeightedPoint32 = WeightedPoint<f32>;
