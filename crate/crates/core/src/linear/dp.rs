//! Minimum-supremum-error subset selection for linear compaction.
//!
//! Retaining breakpoints `r_1 = 0 < r_2 < ... < r_K = m - 1` splits the rest
//! into runs; the error of a run `(a, b)` is the largest [`chord_deviation`]
//! of its interior breakpoints and the objective is the largest run error.
//! This is a bottleneck path problem on the DAG of runs with an exact node
//! count, solved by bisecting over the run costs and testing, for each
//! threshold, which path lengths reach every node (one bitset per node).
//!
//! Only runs no costlier than an evenly spread reference selection can be
//! part of an optimum. For a fixed left end `a`, the cheapest chord from `a`
//! over interior points `a+1..=j` is a lower bound for every run `(a, b)` with
//! `b > j`; the scan over `b` stops once that bound exceeds the reference.

use crate::linear::rank::chord_deviation;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub(crate) struct Selection<F> {
    pub retained: Vec<usize>,
    pub objective: F,
}

type Adjacency<F> = Vec<Vec<(usize, F)>>;

/// Chooses `keep` of the `m` breakpoints, both extremes included, minimising
/// the largest run error. Among optimal choices the lexicographically
/// smallest index set wins.
pub(crate) fn optimal_subset<F: Scalar>(z: &[u64], cum: &[F], keep: usize) -> Selection<F> {
    let m = z.len();
    assert!(keep >= 2 && keep < m, "keep {keep} of {m}");

    let spread: Vec<usize> = (0..keep).map(|i| i * (m - 1) / (keep - 1)).collect();
    let bound = spread
        .windows(2)
        .map(|p| run_cost(z, cum, p[0], p[1]))
        .fold(F::zero(), F::max);

    let edges = candidate_runs(z, cum, bound);
    let mut costs: Vec<F> = edges.iter().flatten().map(|&(_, c)| c).collect();
    costs.sort_by(|a, b| a.partial_cmp(b).expect("finite costs"));
    costs.dedup();

    // costs.last() == bound, which the spread selection attains
    let (mut lo, mut hi) = (0, costs.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if reaches_with(&edges, keep, costs[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let objective = costs[hi];
    Selection {
        retained: first_path(&edges, keep, objective),
        objective,
    }
}

pub(crate) fn run_cost<F: Scalar>(z: &[u64], cum: &[F], a: usize, b: usize) -> F {
    (a + 1..b)
        .map(|j| chord_deviation(z, cum, a, b, j))
        .fold(F::zero(), F::max)
}

fn candidate_runs<F: Scalar>(z: &[u64], cum: &[F], bound: F) -> Adjacency<F> {
    let m = z.len();
    let total = cum[m - 1];
    // widened so that rounding in the slope bounds never prunes a run whose
    // computed cost is within `bound`
    let slack = bound + F::from_f64_lossy(1e-9) * (F::one() + total);
    let mut edges: Adjacency<F> = Vec::with_capacity(m);
    for a in 0..m - 1 {
        let mut adj = vec![(a + 1, F::zero())];
        let (mut min_slope, mut max_slope) = (F::neg_infinity(), F::infinity());
        for b in a + 2..m {
            let j = b - 1;
            let dz = F::from_count(z[j] - z[a]);
            let dy = cum[j] - cum[a];
            min_slope = min_slope.max((dy - slack) / dz);
            max_slope = max_slope.min((dy + slack) / dz);
            if min_slope > max_slope {
                break;
            }
            let mut cost = F::zero();
            let within = (a + 1..b).all(|j| {
                let d = chord_deviation(z, cum, a, b, j);
                cost = cost.max(d);
                d <= bound
            });
            if within {
                adj.push((b, cost));
            }
        }
        edges.push(adj);
    }
    edges.push(Vec::new());
    edges
}

/// Bitset row per node; bit `c` set when some path from node 0 (forward) or
/// to node m-1 (backward) with `c` nodes exists.
struct PathCounts {
    words: usize,
    bits: Vec<u64>,
}

impl PathCounts {
    fn new(nodes: usize, keep: usize) -> Self {
        let words = keep / 64 + 1;
        Self {
            words,
            bits: vec![0; nodes * words],
        }
    }

    fn set(&mut self, node: usize, count: usize) {
        self.bits[node * self.words + count / 64] |= 1 << (count % 64);
    }

    fn get(&self, node: usize, count: usize) -> bool {
        self.bits[node * self.words + count / 64] >> (count % 64) & 1 == 1
    }

    fn row_is_empty(&self, node: usize) -> bool {
        self.bits[node * self.words..(node + 1) * self.words]
            .iter()
            .all(|&w| w == 0)
    }

    /// `row[dst] |= row[src] << 1`
    fn extend(&mut self, src: usize, dst: usize) {
        let w = self.words;
        let (src_row, dst_row) = if src < dst {
            let (lo, hi) = self.bits.split_at_mut(dst * w);
            (&lo[src * w..(src + 1) * w], &mut hi[..w])
        } else {
            let (lo, hi) = self.bits.split_at_mut(src * w);
            (&hi[..w], &mut lo[dst * w..(dst + 1) * w])
        };
        let mut carry = 0;
        for (d, &s) in dst_row.iter_mut().zip(src_row.iter()) {
            *d |= (s << 1) | carry;
            carry = s >> 63;
        }
    }
}

fn reaches_with<F: Scalar>(edges: &Adjacency<F>, keep: usize, threshold: F) -> bool {
    let m = edges.len();
    let mut reach = PathCounts::new(m, keep);
    reach.set(0, 1);
    for (a, adj) in edges.iter().enumerate().take(m - 1) {
        if reach.row_is_empty(a) {
            continue;
        }
        for &(b, cost) in adj {
            if cost <= threshold {
                reach.extend(a, b);
            }
        }
    }
    reach.get(m - 1, keep)
}

fn first_path<F: Scalar>(edges: &Adjacency<F>, keep: usize, threshold: F) -> Vec<usize> {
    let m = edges.len();
    let mut tail = PathCounts::new(m, keep);
    tail.set(m - 1, 1);
    for a in (0..m - 1).rev() {
        for &(b, cost) in &edges[a] {
            if cost <= threshold {
                tail.extend(b, a);
            }
        }
    }
    let mut path = Vec::with_capacity(keep);
    path.push(0);
    let mut at = 0;
    while at != m - 1 {
        let need = keep - path.len();
        at = edges[at]
            .iter()
            .find(|&&(b, cost)| cost <= threshold && tail.get(b, need))
            .map(|&(b, _)| b)
            .expect("a path of the requested length exists");
        path.push(at);
    }
    debug_assert_eq!(path.len(), keep);
    path
}
