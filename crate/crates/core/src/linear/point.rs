use crate::scalar::Scalar;

/// A stream value paired with the (possibly fractional) number of stream items
/// it stands for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPoint<F> {
    pub value: u64,
    pub weight: F,
}

impl<F: Scalar> WeightedPoint<F> {
    pub fn new(value: u64, weight: F) -> Self {
        Self { value, weight }
    }
}

/// Merges adjacent points with equal values by summing their weights. The
/// input must be sorted ascending.
pub(crate) fn coalesce<F: Scalar>(
    points: impl IntoIterator<Item = WeightedPoint<F>>,
) -> Vec<WeightedPoint<F>> {
    let mut out: Vec<WeightedPoint<F>> = Vec::new();
    for p in points {
        match out.last_mut() {
            Some(last) if last.value == p.value => last.weight = last.weight + p.weight,
            _ => out.push(p),
        }
    }
    out
}
