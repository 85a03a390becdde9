use std::io::Write;

use super::dp;
use super::point::coalesce;
use super::{RankFunction, WeightedPoint};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The only compaction ratio implemented: half of the points are kept.
pub const COMPACTION_RATIO: f64 = 0.5;

/// Outcome of one linear compaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Compaction<F> {
    /// Indices, into the pre-compaction points, of the retained points.
    pub retained: Vec<usize>,
    /// Supremum rank error introduced, measured at the discarded breakpoints.
    pub sup_error: F,
}

/// Sorted list of weighted points whose rank function interpolates linearly
/// between neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCompactor<F> {
    capacity: usize,
    function: RankFunction<F>,
    compactions: u64,
}

impl<F: Scalar> LinearCompactor<F> {
    /// Empty compactor holding at most `capacity` points (even, at least 2).
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity < 2 || !capacity.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "linear compactor capacity must be even and >= 2, got {capacity}"
            )));
        }
        Ok(Self {
            capacity,
            function: RankFunction::default(),
            compactions: 0,
        })
    }

    /// Compactor initialised with `points` (strictly increasing values,
    /// positive weights, at most `capacity` of them).
    pub fn from_points(capacity: usize, points: &[WeightedPoint<F>]) -> Result<Self> {
        let mut c = Self::new(capacity)?;
        if points.len() > capacity {
            return Err(Error::CapacityExceeded {
                needed: points.len(),
                capacity,
            });
        }
        c.function = RankFunction::from_points(points)?;
        Ok(c)
    }

    pub(crate) fn from_parts(capacity: usize, function: RankFunction<F>, compactions: u64) -> Self {
        Self {
            capacity,
            function,
            compactions,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.function.len()
    }

    pub fn is_empty(&self) -> bool {
        self.function.is_empty()
    }

    pub fn total_weight(&self) -> F {
        self.function.total_weight()
    }

    /// Number of compactions performed so far.
    pub fn compaction_count(&self) -> u64 {
        self.compactions
    }

    pub fn rank_function(&self) -> &RankFunction<F> {
        &self.function
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = WeightedPoint<F>> + '_ {
        self.function.points()
    }

    /// Interpolated rank contribution of `q`.
    pub fn rank(&self, q: u64) -> F {
        self.function.eval(q)
    }

    /// Adds `incoming` (ascending, positive weights; equal values allowed).
    ///
    /// The result has a breakpoint at every value of either list, and at each
    /// of them its rank equals the sum of the two input rank functions. The
    /// new weight of breakpoint `u_i` is therefore the increase of that sum
    /// over `(u_{i-1}, u_i]`, accumulated piece by piece from each list.
    pub fn merge(&mut self, incoming: &[WeightedPoint<F>]) -> Result<()> {
        for (i, p) in incoming.iter().enumerate() {
            if p.weight <= F::zero() || !p.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "incoming point {i} has non-positive weight {}",
                    p.weight
                )));
            }
            if i > 0 && incoming[i - 1].value > p.value {
                return Err(Error::InvalidParameter(format!(
                    "incoming points must be ascending (index {i})"
                )));
            }
        }
        let incoming = RankFunction::from_sorted_unchecked(coalesce(incoming.iter().copied()));
        let needed = union_len(self.function.breakpoints(), incoming.breakpoints());
        if needed > self.capacity {
            return Err(Error::CapacityExceeded {
                needed,
                capacity: self.capacity,
            });
        }
        self.function = merge_functions(&self.function, &incoming);
        Ok(())
    }

    /// Keeps `max(ceil(len / 2), 2)` of the points, both extremes included,
    /// choosing the subset whose rank function deviates least (in supremum)
    /// from the current one. Each discarded point's weight moves to the next
    /// retained point on its right, so totals and the ranks of retained points
    /// are unchanged.
    pub fn compact(&mut self, alpha: f64) -> Result<Compaction<F>> {
        if alpha != COMPACTION_RATIO {
            return Err(Error::UnsupportedAlpha(alpha));
        }
        let m = self.len();
        let keep = target_len(m);
        if keep >= m {
            return Ok(Compaction {
                retained: (0..m).collect(),
                sup_error: F::zero(),
            });
        }
        let sel = dp::optimal_subset(
            self.function.breakpoints(),
            self.function.cumulative(),
            keep,
        );
        self.retain(&sel.retained);
        Ok(Compaction {
            retained: sel.retained,
            sup_error: sel.objective,
        })
    }

    /// Replaces the points by the subset `retained` (ascending indices that
    /// include both extremes), reassigning discarded weight rightwards.
    pub(crate) fn retain(&mut self, retained: &[usize]) {
        let weights = self.function.weights();
        let values = self.function.breakpoints();
        let mut prev: Option<usize> = None;
        let kept: Vec<WeightedPoint<F>> = retained
            .iter()
            .map(|&r| {
                let from = prev.map_or(0, |p| p + 1);
                prev = Some(r);
                let weight = weights[from..=r].iter().fold(F::zero(), |acc, &w| acc + w);
                WeightedPoint::new(values[r], weight)
            })
            .collect();
        self.function = RankFunction::from_sorted_unchecked(kept);
        self.compactions += 1;
    }

    /// Writes the `(value, weight, cumulative)` triples as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        self.function.write_csv(out)
    }
}

/// Number of points a compaction of `len` points keeps.
pub(crate) fn target_len(len: usize) -> usize {
    len.div_ceil(2).max(2)
}

fn union_len(a: &[u64], b: &[u64]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
            }
            (Some(x), Some(y)) if x < y => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
        n += 1;
    }
    n
}

fn merge_functions<F: Scalar>(a: &RankFunction<F>, b: &RankFunction<F>) -> RankFunction<F> {
    let (az, bz) = (a.breakpoints(), b.breakpoints());
    let mut out = Vec::with_capacity(az.len() + bz.len());
    let (mut i, mut j) = (0, 0);
    let mut prev = None;
    loop {
        let u = match (az.get(i), bz.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => break,
        };
        let weight = share(a, i, prev, u) + share(b, j, prev, u);
        if az.get(i) == Some(&u) {
            i += 1;
        }
        if bz.get(j) == Some(&u) {
            j += 1;
        }
        out.push(WeightedPoint::new(u, weight));
        prev = Some(u);
    }
    RankFunction::from_sorted_unchecked(out)
}

/// Rank mass that `f` places on `(prev, u]`, where `next` indexes the first
/// breakpoint of `f` at or above `u` and every breakpoint of `f` below `u` is
/// at or below `prev`.
fn share<F: Scalar>(f: &RankFunction<F>, next: usize, prev: Option<u64>, u: u64) -> F {
    let (z, w) = (f.breakpoints(), f.weights());
    match z.get(next) {
        None => F::zero(),
        Some(&hi) if next == 0 => {
            if hi == u {
                w[0]
            } else {
                F::zero()
            }
        }
        Some(&hi) => {
            let lo = z[next - 1];
            let prev = prev.expect("a breakpoint lies below u");
            w[next] * F::from_count(u - prev) / F::from_count(hi - lo)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(pairs: &[(u64, f64)]) -> Vec<WeightedPoint<f64>> {
        pairs
            .iter()
            .map(|&(v, w)| WeightedPoint::new(v, w))
            .collect()
    }

    fn lc(pairs: &[(u64, f64)]) -> LinearCompactor<f64> {
        LinearCompactor::from_points(64, &pts(pairs)).unwrap()
    }

    fn pairs(c: &LinearCompactor<f64>) -> Vec<(u64, f64)> {
        c.points().map(|p| (p.value, p.weight)).collect()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn rank_examples() {
        let c = lc(&[(10, 4.0), (20, 4.0), (30, 8.0)]);
        assert_eq!(c.rank(5), 0.0);
        assert_eq!(c.rank(25), 12.0);
        assert_eq!(c.rank(30), 16.0);
    }

    #[test]
    fn merge_disjoint_supports() {
        let mut c = lc(&[(10, 1.0)]);
        c.merge(&pts(&[(20, 1.0)])).unwrap();
        assert_eq!(pairs(&c), vec![(10, 1.0), (20, 1.0)]);
    }

    #[test]
    fn merge_interior_point_splits_weight() {
        // summed ranks at {0, 5, 10}: (1, 1.5, 2) + (0, 1, 1) = (1, 2.5, 3)
        let mut c = lc(&[(0, 1.0), (10, 1.0)]);
        c.merge(&pts(&[(5, 1.0)])).unwrap();
        assert_eq!(pairs(&c), vec![(0, 1.0), (5, 1.5), (10, 0.5)]);
    }

    #[test]
    fn merge_empty_is_identity() {
        let mut c = lc(&[(3, 2.0), (9, 0.25)]);
        let before = c.clone();
        c.merge(&[]).unwrap();
        assert_eq!(c, before);
    }

    #[test]
    fn merge_collapses_duplicates() {
        let mut c = lc(&[(5, 1.0)]);
        c.merge(&pts(&[(5, 2.0), (5, 1.0), (7, 1.0)])).unwrap();
        assert_eq!(pairs(&c), vec![(5, 4.0), (7, 1.0)]);
    }

    #[test]
    fn merge_checks_input_and_capacity() {
        let mut c = LinearCompactor::<f64>::new(2).unwrap();
        assert!(c.merge(&pts(&[(2, 1.0), (1, 1.0)])).is_err());
        assert!(c.merge(&pts(&[(1, -1.0)])).is_err());
        assert!(matches!(
            c.merge(&pts(&[(1, 1.0), (2, 1.0), (3, 1.0)])),
            Err(Error::CapacityExceeded {
                needed: 3,
                capacity: 2
            })
        ));
    }

    #[test]
    fn compact_uniform_is_exact() {
        let mut c = lc(&[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)]);
        let out = c.compact(0.5).unwrap();
        assert_eq!(out.retained, vec![0, 3]);
        assert_eq!(out.sup_error, 0.0);
        assert_eq!(pairs(&c), vec![(1, 1.0), (4, 3.0)]);
        assert_eq!(c.compaction_count(), 1);
    }

    #[test]
    fn compact_keeps_heavy_point() {
        let mut c = lc(&[(1, 1.0), (2, 5.0), (3, 1.0), (4, 1.0), (5, 1.0), (6, 1.0)]);
        let out = c.compact(0.5).unwrap();
        assert_eq!(out.sup_error, 0.0);
        assert_eq!(pairs(&c), vec![(1, 1.0), (2, 5.0), (6, 4.0)]);
    }

    #[test]
    fn compact_forced_extremes() {
        let mut c = lc(&[(1, 1.0), (2, 10.0), (3, 1.0), (4, 1.0)]);
        let out = c.compact(0.5).unwrap();
        assert_eq!(out.retained, vec![0, 3]);
        assert_eq!(out.sup_error, 6.0);
    }

    #[test]
    fn compact_rejects_other_ratios_and_skips_tiny_inputs() {
        let mut c = lc(&[(1, 1.0), (2, 1.0), (3, 1.0)]);
        assert!(matches!(c.compact(0.25), Err(Error::UnsupportedAlpha(_))));
        let mut one = lc(&[(1, 1.0)]);
        assert_eq!(one.compact(0.5).unwrap().retained, vec![0]);
        let mut two = lc(&[(1, 1.0), (2, 1.0)]);
        assert_eq!(two.compact(0.5).unwrap().retained, vec![0, 1]);
        assert_eq!(two.compaction_count(), 0);
    }

    #[test]
    fn capacity_validation() {
        assert!(LinearCompactor::<f64>::new(0).is_err());
        assert!(LinearCompactor::<f64>::new(3).is_err());
        assert!(
            LinearCompactor::<f64>::from_points(2, &pts(&[(1, 1.0), (2, 1.0), (3, 1.0)])).is_err()
        );
    }

    #[test]
    fn single_precision_weights() {
        let mut c = LinearCompactor::<f32>::from_points(
            8,
            &[WeightedPoint::new(0, 1.0f32), WeightedPoint::new(10, 1.0)],
        )
        .unwrap();
        c.merge(&[WeightedPoint::new(5, 1.0f32)]).unwrap();
        assert_eq!(c.rank(5), 2.5f32);
        assert_eq!(c.total_weight(), 3.0f32);
    }

    fn points_strategy(max: usize) -> impl Strategy<Value = Vec<WeightedPoint<f64>>> {
        proptest::collection::btree_map(0u64..10_000, 0.01f64..100.0, 1..max).prop_map(|m| {
            m.into_iter()
                .map(|(v, w)| WeightedPoint::new(v, w))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn merge_sums_rank_functions_at_breakpoints(a in points_strategy(40), b in points_strategy(40)) {
            let mut c = LinearCompactor::from_points(128, &a).unwrap();
            let left = c.clone();
            let right = LinearCompactor::from_points(128, &b).unwrap();
            c.merge(&b).unwrap();
            prop_assert!(close(c.total_weight(), left.total_weight() + right.total_weight()));
            for p in c.points() {
                prop_assert!(p.weight > 0.0);
                let expected = left.rank(p.value) + right.rank(p.value);
                prop_assert!(close(c.rank(p.value), expected), "at {}: {} vs {}", p.value, c.rank(p.value), expected);
            }
        }

        #[test]
        fn rank_is_monotone_and_continuous(a in points_strategy(30), q1 in 0u64..10_100, q2 in 0u64..10_100) {
            let c = LinearCompactor::from_points(64, &a).unwrap();
            let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
            prop_assert!(c.rank(lo) <= c.rank(hi));
            // no jumps inside [y_1, y_k]: a unit step moves the rank by at most
            // the largest weight density
            let f = c.rank_function();
            let z = f.breakpoints();
            let q = lo.clamp(z[0], *z.last().unwrap());
            if q < *z.last().unwrap() {
                let i = z.partition_point(|&v| v <= q);
                let density = f.weights()[i] / (z[i] - z[i - 1]) as f64;
                prop_assert!(c.rank(q + 1) - c.rank(q) <= density * (1.0 + 1e-9));
            }
        }

        #[test]
        fn compaction_contract(a in points_strategy(40)) {
            prop_assume!(a.len() >= 3);
            let mut c = LinearCompactor::from_points(64, &a).unwrap();
            let before = c.clone();
            let out = c.compact(0.5).unwrap();
            prop_assert_eq!(c.len(), target_len(before.len()));
            prop_assert!(close(c.total_weight(), before.total_weight()));
            let original: Vec<u64> = before.points().map(|p| p.value).collect();
            for (p, &r) in c.points().zip(&out.retained) {
                prop_assert_eq!(p.value, original[r]);
                prop_assert!(close(c.rank(p.value), before.rank(p.value)));
            }
            let measured = crate::linear::sup_error(before.rank_function(), c.rank_function()).unwrap();
            prop_assert!(close(measured, out.sup_error), "{} vs {}", measured, out.sup_error);
        }
    }
}
