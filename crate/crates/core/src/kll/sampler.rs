use rand::Rng;

/// Constant-space stand-in for the stack of capacity-2 compactors at the bottom
/// of the hierarchy.
///
/// With sample height `s` it emits one item of weight `2^s` for every `2^s`
/// units of input weight, each unit equally likely to be the one emitted. The
/// pending candidate is not visible to rank queries until it is emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sampler {
    height: u32,
    candidate: Option<u64>,
    accumulated: u64,
}

impl Default for Sampler {
    fn default() -> Self {
        Self::new(0)
    }
}

impl Sampler {
    pub fn new(height: u32) -> Self {
        Self {
            height,
            candidate: None,
            accumulated: 0,
        }
    }

    pub(crate) fn from_parts(height: u32, candidate: Option<u64>, accumulated: u64) -> Self {
        Self {
            height,
            candidate,
            accumulated,
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Weight `2^height` of each emitted item.
    pub fn sample_weight(&self) -> u64 {
        1u64 << self.height
    }

    pub fn candidate(&self) -> Option<u64> {
        self.candidate
    }

    /// Input weight absorbed since the last emission.
    pub fn pending_weight(&self) -> u64 {
        self.accumulated
    }

    /// Offers `x` carrying `weight` units. Returns the sampled item once a full
    /// block of `2^height` units has been seen.
    pub fn offer<R: Rng + ?Sized>(&mut self, x: u64, weight: u64, rng: &mut R) -> Option<u64> {
        let target = self.sample_weight();
        if self.accumulated == 0 && weight == target {
            return Some(x);
        }
        debug_assert!(self.accumulated + weight <= target);
        self.accumulated += weight;
        let replace = match self.candidate {
            None => true,
            Some(_) => rng.random_range(0..self.accumulated) < weight,
        };
        if replace {
            self.candidate = Some(x);
        }
        if self.accumulated == target {
            self.accumulated = 0;
            self.candidate.take()
        } else {
            None
        }
    }

    /// Doubles the block size, absorbing the (at most one) item that was
    /// sitting in the collapsed height with the old sample weight.
    pub(crate) fn raise<R: Rng + ?Sized>(&mut self, residual: Option<u64>, rng: &mut R) {
        let old_weight = self.sample_weight();
        self.height += 1;
        if let Some(x) = residual {
            let emitted = self.offer(x, old_weight, rng);
            debug_assert!(emitted.is_none());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn height_zero_passes_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut s = Sampler::new(0);
        assert_eq!(s.offer(7, 1, &mut rng), Some(7));
        assert_eq!(s.pending_weight(), 0);
    }

    #[test]
    fn emits_exactly_once_per_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut s = Sampler::new(3);
        let emitted: Vec<_> = (0..8).filter_map(|x| s.offer(x, 1, &mut rng)).collect();
        assert_eq!(emitted.len(), 1);
        assert_eq!(s.pending_weight(), 0);
        assert_eq!(s.candidate(), None);
    }

    #[test]
    fn block_members_are_equally_likely() {
        // Direct simulation: 10,000 blocks of 8 inputs, count which position wins.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let trials = 10_000;
        let mut counts = [0u32; 8];
        for _ in 0..trials {
            let mut s = Sampler::new(3);
            let mut out = None;
            for x in 0..8u64 {
                if let Some(v) = s.offer(x, 1, &mut rng) {
                    assert!(out.is_none());
                    out = Some(v);
                }
            }
            counts[out.unwrap() as usize] += 1;
        }
        let expected = trials as f64 / 8.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        // chi-square, 7 degrees of freedom, p = 0.001
        assert!(chi2 < 24.322, "chi2 = {chi2}, counts = {counts:?}");
    }

    #[test]
    fn raise_keeps_residual_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = Sampler::new(1);
        assert_eq!(s.offer(10, 1, &mut rng), None);
        s.raise(Some(20), &mut rng);
        assert_eq!(s.height(), 2);
        assert_eq!(s.pending_weight(), 3);
        assert!(s.offer(30, 1, &mut rng).is_some());
    }
}
