use crate::kll::KllSketch;
use crate::linear::RankFunction;
use crate::scalar::Scalar;

/// Immutable snapshot of a sketch's rank function, for answering many queries.
///
/// Ranks agree bit for bit with the owning sketch's `rank`.
#[derive(Debug, Clone)]
pub struct RankView<F> {
    values: Vec<u64>,
    cumulative: Vec<u64>,
    top: RankFunction<F>,
}

impl<F: Scalar> RankView<F> {
    pub(crate) fn new(kll: &KllSketch, top: RankFunction<F>) -> Self {
        let mut values = Vec::new();
        let mut cumulative: Vec<u64> = Vec::new();
        let mut acc = 0u64;
        for (x, w) in kll.weighted_items() {
            acc += w;
            if values.last() == Some(&x) {
                *cumulative.last_mut().expect("parallel vectors") = acc;
            } else {
                values.push(x);
                cumulative.push(acc);
            }
        }
        Self {
            values,
            cumulative,
            top,
        }
    }

    /// Integer-weighted part of the rank of `q`.
    pub fn discrete_rank(&self, q: u64) -> u64 {
        let i = self.values.partition_point(|&x| x <= q);
        if i == 0 {
            0
        } else {
            self.cumulative[i - 1]
        }
    }

    pub fn rank(&self, q: u64) -> F {
        F::from_count(self.discrete_rank(q)) + self.top.eval(q)
    }

    pub fn total_weight(&self) -> F {
        F::from_count(self.cumulative.last().copied().unwrap_or(0)) + self.top.total_weight()
    }

    /// Every stored value, ascending and without repeats.
    pub fn stored_values(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.values.len() + self.top.len());
        let (a, b) = (&self.values, self.top.breakpoints());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) => x.min(y),
                (Some(&x), None) => x,
                (None, Some(&y)) => y,
                (None, None) => unreachable!(),
            };
            if a.get(i) == Some(&next) {
                i += 1;
            }
            if b.get(j) == Some(&next) {
                j += 1;
            }
            out.push(next);
        }
        out
    }

    /// Smallest stored value whose rank is at least `target`, or the largest
    /// stored value when no rank reaches it. `None` when nothing is stored.
    pub fn quantile_at_rank(&self, target: F) -> Option<u64> {
        let values = self.stored_values();
        let i = values.partition_point(|&v| self.rank(v) < target);
        values.get(i).or(values.last()).copied()
    }
}
