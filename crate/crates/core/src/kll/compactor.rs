use rand::Rng;

use crate::error::{Error, Result};

/// Fixed-capacity buffer of equal-weight items at one height of the hierarchy.
///
/// Every item stored at height `h` implicitly carries weight `2^h`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KllCompactor {
    height: u32,
    capacity: usize,
    buffer: Vec<u64>,
}

impl KllCompactor {
    pub fn new(height: u32, capacity: usize) -> Self {
        debug_assert!(capacity >= 2 && capacity.is_multiple_of(2));
        Self {
            height,
            capacity,
            buffer: Vec::with_capacity(capacity),
        }
    }

    pub(crate) fn from_parts(height: u32, capacity: usize, buffer: Vec<u64>) -> Self {
        Self {
            height,
            capacity,
            buffer,
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub(crate) fn set_capacity(&mut self, capacity: usize) {
        self.capacity = capacity;
    }

    /// Implicit weight `2^height` of every item in this compactor.
    pub fn weight(&self) -> u64 {
        1u64 << self.height
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buffer.len() >= self.capacity
    }

    /// Items in buffer order (unsorted between compactions).
    pub fn items(&self) -> &[u64] {
        &self.buffer
    }

    pub fn push(&mut self, x: u64) {
        self.buffer.push(x);
    }

    pub fn extend_from_slice(&mut self, xs: &[u64]) {
        self.buffer.extend_from_slice(xs);
    }

    pub fn count_le(&self, q: u64) -> usize {
        self.buffer.iter().filter(|&&x| x <= q).count()
    }

    /// Sorts the buffer and promotes either the even- or the odd-indexed half,
    /// chosen by one fair coin. The buffer is left empty; the returned items are
    /// sorted and belong at height `h + 1`.
    pub fn compact<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Vec<u64>> {
        if !self.buffer.len().is_multiple_of(2) {
            return Err(Error::OddBuffer(self.buffer.len()));
        }
        let take_odd = rng.random::<bool>();
        Ok(self.compact_with(take_odd))
    }

    /// Deterministic half of [`compact`](Self::compact): `take_odd` selects the
    /// items at sorted positions 1, 3, 5, ... instead of 0, 2, 4, ...
    pub fn compact_with(&mut self, take_odd: bool) -> Vec<u64> {
        debug_assert!(self.buffer.len().is_multiple_of(2));
        self.buffer.sort_unstable();
        let offset = usize::from(take_odd);
        let promoted = self
            .buffer
            .iter()
            .skip(offset)
            .step_by(2)
            .copied()
            .collect();
        self.buffer.clear();
        promoted
    }

    /// Compaction used by the sketch: with an odd number of items the largest
    /// one stays behind, the rest is halved as in [`compact`](Self::compact).
    pub(crate) fn compact_even_part<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<u64> {
        let held = if self.buffer.len() % 2 == 1 {
            self.buffer.sort_unstable();
            self.buffer.pop()
        } else {
            None
        };
        let take_odd = rng.random::<bool>();
        let promoted = self.compact_with(take_odd);
        self.buffer.extend(held);
        promoted
    }
}
