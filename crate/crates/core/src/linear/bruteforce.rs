use itertools::Itertools;

use super::compactor::{target_len, Compaction, COMPACTION_RATIO};
use super::rank::chord_deviation;
use super::LinearCompactor;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest input accepted by [`bruteforce_compact`].
pub const BRUTEFORCE_LIMIT: usize = 16;

/// Reference compaction by exhaustive search: tries every retained subset of
/// the required size that contains both extremes, in lexicographic order, and
/// keeps the first one with the smallest supremum error. Exponential; inputs
/// are limited to [`BRUTEFORCE_LIMIT`] points.
pub fn bruteforce_compact<F: Scalar>(
    compactor: &LinearCompactor<F>,
    alpha: f64,
) -> Result<(LinearCompactor<F>, Compaction<F>)> {
    if alpha != COMPACTION_RATIO {
        return Err(Error::UnsupportedAlpha(alpha));
    }
    let m = compactor.len();
    if m > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge(m));
    }
    let mut out = compactor.clone();
    let keep = target_len(m);
    if keep >= m {
        return Ok((
            out,
            Compaction {
                retained: (0..m).collect(),
                sup_error: F::zero(),
            },
        ));
    }

    let f = compactor.rank_function();
    let (z, cum) = (f.breakpoints(), f.cumulative());
    let mut best: Option<(F, Vec<usize>)> = None;
    for interior in (1..m - 1).combinations(keep - 2) {
        let mut set = Vec::with_capacity(keep);
        set.push(0);
        set.extend(interior);
        set.push(m - 1);
        let mut worst = F::zero();
        for pair in set.windows(2) {
            for j in pair[0] + 1..pair[1] {
                worst = worst.max(chord_deviation(z, cum, pair[0], pair[1], j));
            }
        }
        if best.as_ref().is_none_or(|(b, _)| worst < *b) {
            best = Some((worst, set));
        }
    }
    let (sup_error, retained) = best.expect("at least one subset");
    out.retain(&retained);
    Ok((
        out,
        Compaction {
            retained,
            sup_error,
        },
    ))
}
