//! Compactor hierarchy without the Greenwald-Khanna top: geometric capacities,
//! randomized even/odd compaction and a constant-space sampler for the
//! capacity-2 bottom heights.

mod compactor;
mod sampler;
mod sketch;

pub use compactor::KllCompactor;
pub use sampler::Sampler;
pub use sketch::{level_capacity, KllSketch, DEFAULT_SCALE, SAMPLER_WORDS};

pub(crate) use sketch::Promotion;
