//! Exact ranks over a materialized dataset and error metrics for sketches.

use crate::error::{Error, Result};
use crate::kll::KllSketch;
use crate::scalar::Scalar;
use crate::sketch::LinearSketch;
use crate::view::RankView;

/// Size of the evaluation set used when a dataset has too many distinct values.
pub const DEFAULT_EVAL_LIMIT: usize = 1 << 20;

/// Exact rank oracle: `rank(q) = |{x : x <= q}|`.
#[derive(Debug, Clone)]
pub struct ExactRank {
    sorted: Vec<u64>,
}

impl ExactRank {
    pub fn new(data: &[u64]) -> Self {
        let mut sorted = data.to_vec();
        sorted.sort_unstable();
        Self { sorted }
    }

    pub fn from_sorted(sorted: Vec<u64>) -> Self {
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        Self { sorted }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn sorted(&self) -> &[u64] {
        &self.sorted
    }

    pub fn rank(&self, q: u64) -> u64 {
        self.sorted.partition_point(|&x| x <= q) as u64
    }

    pub fn distinct(&self) -> Vec<u64> {
        let mut out = self.sorted.clone();
        out.dedup();
        out
    }
}

/// Which query points the error is measured at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalPoints {
    /// All distinct values if there are at most [`DEFAULT_EVAL_LIMIT`],
    /// otherwise that many evenly spaced distinct values.
    Auto,
    AllDistinct,
    /// `n` evenly spaced distinct values (all of them if there are fewer).
    Grid(usize),
}

impl EvalPoints {
    pub fn select(&self, oracle: &ExactRank) -> Vec<u64> {
        let distinct = oracle.distinct();
        let limit = match *self {
            EvalPoints::Auto => DEFAULT_EVAL_LIMIT,
            EvalPoints::AllDistinct => return distinct,
            EvalPoints::Grid(n) => n.max(1),
        };
        if distinct.len() <= limit {
            return distinct;
        }
        if limit == 1 {
            return vec![distinct[distinct.len() - 1]];
        }
        (0..limit)
            .map(|i| distinct[i * (distinct.len() - 1) / (limit - 1)])
            .collect()
    }
}

/// Rank errors of a sketch over an evaluation set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMetrics {
    /// Mean absolute rank error.
    pub avg_l1: f64,
    /// Sum of absolute rank errors.
    pub sum_l1: f64,
    /// Largest absolute rank error.
    pub sup: f64,
    /// Size of the evaluation set.
    pub points: usize,
}

/// Anything that can estimate ranks for error measurement.
pub trait RankEstimate {
    /// Estimated ranks of the ascending `queries`.
    fn estimate_ranks(&self, queries: &[u64]) -> Vec<f64>;
}

impl<F: Scalar> RankEstimate for RankView<F> {
    fn estimate_ranks(&self, queries: &[u64]) -> Vec<f64> {
        queries.iter().map(|&q| self.rank(q).as_f64()).collect()
    }
}

impl<F: Scalar> RankEstimate for LinearSketch<F> {
    fn estimate_ranks(&self, queries: &[u64]) -> Vec<f64> {
        self.view().estimate_ranks(queries)
    }
}

impl RankEstimate for KllSketch {
    fn estimate_ranks(&self, queries: &[u64]) -> Vec<f64> {
        RankView::<f64>::new(self, Default::default()).estimate_ranks(queries)
    }
}

pub fn error_metrics<S: RankEstimate + ?Sized>(
    oracle: &ExactRank,
    sketch: &S,
    eval: EvalPoints,
) -> Result<ErrorMetrics> {
    if oracle.is_empty() {
        return Err(Error::Empty);
    }
    let queries = eval.select(oracle);
    let estimates = sketch.estimate_ranks(&queries);
    let (mut sum, mut sup) = (0.0f64, 0.0f64);
    for (&q, est) in queries.iter().zip(estimates) {
        let err = (oracle.rank(q) as f64 - est).abs();
        sum += err;
        sup = sup.max(err);
    }
    Ok(ErrorMetrics {
        avg_l1: sum / queries.len() as f64,
        sum_l1: sum,
        sup,
        points: queries.len(),
    })
}
