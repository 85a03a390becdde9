//! Space-error envelopes of a scatter and error-ratio hulls between two
//! envelopes. Between vertices, envelopes are interpolated linearly in
//! (log space, log error); a segment touching zero error is interpolated
//! linearly in error instead.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FrontierError {
    #[error("a frontier needs at least two distinct space values")]
    Degenerate,
    #[error("space and error values must be finite, space positive and error non-negative")]
    InvalidPoint,
    #[error("frontiers do not share a space range")]
    NoOverlap,
    #[error("ratio grid needs at least one point")]
    EmptyGrid,
}

/// Lower and upper envelopes of a `(space, error)` scatter, as vertices
/// sorted by space.
///
/// The lower envelope at `s` is the least error among points with space at
/// most `s`, reduced to the points where it drops, plus a closing vertex at
/// the largest space. The upper envelope is the same with the greatest error.
#[derive(Debug, Clone, PartialEq)]
pub struct Frontier {
    pub lower: Vec<(f64, f64)>,
    pub upper: Vec<(f64, f64)>,
}

pub fn compute_frontier(points: &[(f64, f64)]) -> Result<Frontier, FrontierError> {
    if points
        .iter()
        .any(|&(s, e)| !(s.is_finite() && e.is_finite() && s > 0.0 && e >= 0.0))
    {
        return Err(FrontierError::InvalidPoint);
    }
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let (first, last) = match (sorted.first(), sorted.last()) {
        (Some(f), Some(l)) if f.0 < l.0 => (f.0, l.0),
        _ => return Err(FrontierError::Degenerate),
    };
    debug_assert!(first < last);
    Ok(Frontier {
        lower: staircase(&sorted, |new, best| new < best),
        upper: staircase(&sorted, |new, best| new > best),
    })
}

/// Vertices where the running best (by `better`) over increasing space
/// changes, plus a closing vertex at the largest space.
fn staircase(sorted: &[(f64, f64)], better: impl Fn(f64, f64) -> bool) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let space = sorted[i].0;
        let mut group_best = sorted[i].1;
        while i < sorted.len() && sorted[i].0 == space {
            if better(sorted[i].1, group_best) {
                group_best = sorted[i].1;
            }
            i += 1;
        }
        match out.last() {
            None => out.push((space, group_best)),
            Some(&(_, best)) if better(group_best, best) => out.push((space, group_best)),
            _ => {}
        }
    }
    let max_space = sorted[sorted.len() - 1].0;
    let &(last_space, best) = out.last().expect("non-empty");
    if last_space < max_space {
        out.push((max_space, best));
    }
    out
}

impl Frontier {
    /// Space range covered by the envelopes.
    pub fn space_range(&self) -> (f64, f64) {
        (self.lower[0].0, self.lower[self.lower.len() - 1].0)
    }

    /// Lower envelope at `space`, `None` outside [`space_range`](Self::space_range).
    pub fn lower_at(&self, space: f64) -> Option<f64> {
        interpolate(&self.lower, space)
    }

    pub fn upper_at(&self, space: f64) -> Option<f64> {
        interpolate(&self.upper, space)
    }
}

fn interpolate(vertices: &[(f64, f64)], s: f64) -> Option<f64> {
    let (lo, hi) = (vertices[0].0, vertices[vertices.len() - 1].0);
    if !(lo..=hi).contains(&s) {
        return None;
    }
    let i = vertices.partition_point(|v| v.0 < s);
    if vertices[i].0 == s {
        return Some(vertices[i].1);
    }
    let ((s0, e0), (s1, e1)) = (vertices[i - 1], vertices[i]);
    if e0 == e1 {
        return Some(e0);
    }
    let frac = (s.ln() - s0.ln()) / (s1.ln() - s0.ln());
    if e0 > 0.0 && e1 > 0.0 {
        Some((e0.ln() + frac * (e1.ln() - e0.ln())).exp())
    } else {
        let frac = (s - s0) / (s1 - s0);
        Some(e0 + frac * (e1 - e0))
    }
}

/// Bounds on the error ratio of one algorithm to another at one space value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullPoint {
    pub space: f64,
    /// `lower_a / upper_b`.
    pub low: f64,
    /// `upper_a / lower_b`.
    pub high: f64,
}

/// Ratio hull of `a` (numerator) over `b` (denominator) on `grid` log-spaced
/// space values spanning the shared range. `0 / 0` counts as 1.
pub fn ratio_hull(
    a: &Frontier,
    b: &Frontier,
    grid: usize,
) -> Result<Vec<HullPoint>, FrontierError> {
    if grid == 0 {
        return Err(FrontierError::EmptyGrid);
    }
    let (a0, a1) = a.space_range();
    let (b0, b1) = b.space_range();
    let (lo, hi) = (a0.max(b0), a1.min(b1));
    if lo > hi {
        return Err(FrontierError::NoOverlap);
    }
    let spaces: Vec<f64> = if grid == 1 || lo == hi {
        vec![lo]
    } else {
        (0..grid)
            .map(|i| {
                if i == 0 {
                    lo
                } else if i + 1 == grid {
                    hi
                } else {
                    (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (grid - 1) as f64).exp()
                }
            })
            .collect()
    };
    Ok(spaces
        .into_iter()
        .map(|s| {
            let ratio = |num: f64, den: f64| {
                if num == 0.0 && den == 0.0 {
                    1.0
                } else {
                    num / den
                }
            };
            let at = |f: &Frontier, lower: bool| {
                if lower { f.lower_at(s) } else { f.upper_at(s) }.expect("inside shared range")
            };
            HullPoint {
                space: s,
                low: ratio(at(a, true), at(b, false)),
                high: ratio(at(a, false), at(b, true)),
            }
        })
        .collect())
}
