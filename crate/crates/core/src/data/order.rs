use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Order in which a dataset is streamed into a sketch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamOrder {
    /// Seeded uniform shuffle.
    Random(u64),
    Sorted,
    /// The smaller `ceil(n/2)` values ascending, then the rest descending.
    HalfSortedHalfReversed,
    /// Smallest, largest, second smallest, second largest, ...; odd lengths
    /// end with the median.
    FlipFlop,
}

impl StreamOrder {
    /// Report identifier; the random seed is reported separately.
    pub fn id(&self) -> &'static str {
        match self {
            StreamOrder::Random(_) => "random",
            StreamOrder::Sorted => "sorted",
            StreamOrder::HalfSortedHalfReversed => "half",
            StreamOrder::FlipFlop => "flipflop",
        }
    }

    /// Parses an order id; `random` takes `seed`.
    pub fn parse(s: &str, seed: u64) -> Result<Self> {
        match s {
            "random" => Ok(StreamOrder::Random(seed)),
            "sorted" => Ok(StreamOrder::Sorted),
            "half" => Ok(StreamOrder::HalfSortedHalfReversed),
            "flipflop" => Ok(StreamOrder::FlipFlop),
            _ => Err(Error::Unknown {
                kind: "order",
                name: s.to_string(),
            }),
        }
    }
}

impl fmt::Display for StreamOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for StreamOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, 0)
    }
}

/// Permutes `data` into `order`.
pub fn apply_order(data: &[u64], order: StreamOrder) -> Vec<u64> {
    let mut out = data.to_vec();
    match order {
        StreamOrder::Random(seed) => out.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        StreamOrder::Sorted => out.sort_unstable(),
        StreamOrder::HalfSortedHalfReversed => {
            out.sort_unstable();
            let half = out.len().div_ceil(2);
            out[half..].reverse();
        }
        StreamOrder::FlipFlop => {
            out.sort_unstable();
            let n = out.len();
            let mut mixed = Vec::with_capacity(n);
            let (mut lo, mut hi) = (0, n);
            while lo < hi {
                mixed.push(out[lo]);
                lo += 1;
                if lo < hi {
                    hi -= 1;
                    mixed.push(out[hi]);
                }
            }
            out = mixed;
        }
    }
    out
}
