use std::io::Write;

use super::WeightedPoint;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Piecewise-linear rank function over breakpoints `z_1 < ... < z_m`.
///
/// Below `z_1` the rank is zero and `w_1` is a point mass at `z_1`. Between
/// breakpoints the weight of the right endpoint is spread uniformly over the
/// gap, so `f(q) = F(z_{i-1}) + w_i (q - z_{i-1}) / (z_i - z_{i-1})` for
/// `z_{i-1} <= q < z_i`, and `f(q) = F(z_m)` from `z_m` on.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RankFunction<F> {
    values: Vec<u64>,
    weights: Vec<F>,
    cumulative: Vec<F>,
}

impl<F: Scalar> RankFunction<F> {
    /// Builds the function from points with strictly increasing values and
    /// positive weights.
    pub fn from_points(points: &[WeightedPoint<F>]) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if p.weight <= F::zero() || !p.weight.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "point {i} has non-positive weight {}",
                    p.weight
                )));
            }
            if i > 0 && points[i - 1].value >= p.value {
                return Err(Error::InvalidParameter(format!(
                    "point values must be strictly increasing (index {i})"
                )));
            }
        }
        Ok(Self::from_sorted_unchecked(points.iter().copied()))
    }

    pub(crate) fn from_sorted_unchecked(
        points: impl IntoIterator<Item = WeightedPoint<F>>,
    ) -> Self {
        let mut f = Self::default();
        let mut acc = F::zero();
        for p in points {
            acc = acc + p.weight;
            f.values.push(p.value);
            f.weights.push(p.weight);
            f.cumulative.push(acc);
        }
        f
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Breakpoints `z`.
    pub fn breakpoints(&self) -> &[u64] {
        &self.values
    }

    pub fn weights(&self) -> &[F] {
        &self.weights
    }

    /// `F(z_j) = w_1 + ... + w_j`.
    pub fn cumulative(&self) -> &[F] {
        &self.cumulative
    }

    pub fn total_weight(&self) -> F {
        self.cumulative.last().copied().unwrap_or_else(F::zero)
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = WeightedPoint<F>> + '_ {
        self.values
            .iter()
            .zip(&self.weights)
            .map(|(&value, &weight)| WeightedPoint { value, weight })
    }

    /// Interpolated rank of `q`.
    pub fn eval(&self, q: u64) -> F {
        // index of the first breakpoint strictly above q
        let next = self.values.partition_point(|&z| z <= q);
        if next == 0 {
            return F::zero();
        }
        if next == self.values.len() {
            return self.total_weight();
        }
        let (lo, hi) = (self.values[next - 1], self.values[next]);
        let frac = F::from_count(q - lo) / F::from_count(hi - lo);
        self.cumulative[next - 1] + self.weights[next] * frac
    }

    /// Writes `value,weight,cumulative` rows with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "value,weight,cumulative")?;
        for ((z, w), c) in self.values.iter().zip(&self.weights).zip(&self.cumulative) {
            writeln!(out, "{z},{w},{c}")?;
        }
        Ok(())
    }
}

/// Largest absolute rank difference between `before` and `after`, evaluated at
/// the breakpoints of `before`.
///
/// When `after`'s breakpoints are a subset of `before`'s, both functions are
/// linear between consecutive breakpoints of `before`, so this is the supremum
/// of the difference over `[z_1, z_m]`.
pub fn sup_error<F: Scalar>(before: &RankFunction<F>, after: &RankFunction<F>) -> Result<F> {
    let mut it = before.breakpoints().iter().peekable();
    for &z in after.breakpoints() {
        loop {
            match it.next() {
                Some(&b) if b == z => break,
                Some(&b) if b < z => continue,
                _ => return Err(Error::BreakpointMismatch),
            }
        }
    }
    Ok(before
        .breakpoints()
        .iter()
        .map(|&z| (before.eval(z) - after.eval(z)).abs())
        .fold(F::zero(), F::max))
}

/// Vertical distance at breakpoint `j` between the rank function and the chord
/// joining breakpoints `a < j < b`:
/// `|F(z_j) - F(z_a) - (F(z_b) - F(z_a)) (z_j - z_a) / (z_b - z_a)|`.
///
/// This is the error that discarding every breakpoint strictly between `a`
/// and `b` introduces at `z_j`.
#[inline]
pub fn chord_deviation<F: Scalar>(z: &[u64], cum: &[F], a: usize, b: usize, j: usize) -> F {
    let span = F::from_count(z[b] - z[a]);
    let offset = F::from_count(z[j] - z[a]);
    (cum[j] - cum[a] - (cum[b] - cum[a]) * offset / span).abs()
}
