//! Linear compactor: a weighted point list read as a monotone piecewise-linear
//! rank function, with rank-sum merging and minimum-supremum-error halving.

mod bruteforce;
mod compactor;
mod dp;
mod point;
mod rank;

pub use bruteforce::{bruteforce_compact, BRUTEFORCE_LIMIT};
pub use compactor::{Compaction, LinearCompactor, COMPACTION_RATIO};
pub use point::WeightedPoint;
pub use rank::{chord_deviation, sup_error, RankFunction};
