use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use linsketch::data::{apply_order, DatasetSpec, StreamOrder};
use linsketch::sketch::MAX_LINEAR_HEIGHTS;
use linsketch::{EvalPoints, ExactRank, LinearSketch64, SketchParams};
use log::{error, info};
use rayon::prelude::*;

use crate::report::ErrorReport;

/// Sketch variant under test: plain KLL or a linear top of `t` heights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Kll,
    Linear(u32),
}

impl Algorithm {
    pub fn t(&self) -> u32 {
        match *self {
            Algorithm::Kll => 0,
            Algorithm::Linear(t) => t,
        }
    }

    pub fn from_t(t: u32) -> Self {
        if t == 0 {
            Algorithm::Kll
        } else {
            Algorithm::Linear(t)
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Kll => f.write_str("kll"),
            Algorithm::Linear(t) => write!(f, "linear-t{t}"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "kll" {
            return Ok(Algorithm::Kll);
        }
        s.strip_prefix("linear-t")
            .and_then(|t| t.parse::<u32>().ok())
            .filter(|t| (1..=MAX_LINEAR_HEIGHTS).contains(t))
            .map(Algorithm::Linear)
            .ok_or_else(|| format!("unknown algorithm {s:?} (expected kll or linear-t1..linear-t{MAX_LINEAR_HEIGHTS})"))
    }
}

/// A grid of sweep cells. Every combination of dataset, order, algorithm,
/// k and seed is one cell; the seed drives the random order and the sketch.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub datasets: Vec<DatasetSpec>,
    pub orders: Vec<String>,
    pub algorithms: Vec<Algorithm>,
    pub ks: Vec<u32>,
    pub seeds: Vec<u64>,
    pub c: f64,
    pub eval: EvalPoints,
    /// Record wall-clock milliseconds per cell.
    pub timing: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), String> {
        let empty = [
            ("datasets", self.datasets.is_empty()),
            ("orders", self.orders.is_empty()),
            ("algorithms", self.algorithms.is_empty()),
            ("k values", self.ks.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(format!("sweep needs at least one of: {name}"));
        }
        for o in &self.orders {
            StreamOrder::parse(o, 0).map_err(|e| e.to_string())?;
        }
        for &a in &self.algorithms {
            for &k in &self.ks {
                SketchParams::new(k, a.t(), 0)
                    .with_scale(self.c)
                    .validate()
                    .map_err(|e| format!("{a} with k={k}: {e}"))?;
            }
        }
        Ok(())
    }
}

struct Cell<'a> {
    dataset: usize,
    order: &'a str,
    algorithm: Algorithm,
    k: u32,
    seed: u64,
}

/// Runs every cell and returns one report per cell, in config order
/// (datasets, then orders, algorithms, k values, seeds). Datasets that fail
/// to load are logged and skipped.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<ErrorReport>, String> {
    cfg.validate()?;
    let mut out = Vec::new();
    for (di, spec) in cfg.datasets.iter().enumerate() {
        let data = match spec.load() {
            Ok(d) if !d.is_empty() => d,
            Ok(_) => {
                error!("dataset {}: no keys, skipped", spec.id());
                continue;
            }
            Err(e) => {
                error!("dataset {}: {e}, skipped", spec.id());
                continue;
            }
        };
        info!("dataset {}: {} keys", spec.id(), data.len());
        let oracle = ExactRank::new(&data);
        let queries = cfg.eval.select(&oracle);
        let exact: Vec<u64> = queries.iter().map(|&q| oracle.rank(q)).collect();
        let cells: Vec<Cell<'_>> = cfg
            .orders
            .iter()
            .flat_map(|o| {
                cfg.algorithms.iter().flat_map(move |&a| {
                    cfg.ks.iter().flat_map(move |&k| {
                        cfg.seeds.iter().map(move |&seed| Cell {
                            dataset: di,
                            order: o,
                            algorithm: a,
                            k,
                            seed,
                        })
                    })
                })
            })
            .collect();
        let rows: Vec<ErrorReport> = cells
            .par_iter()
            .map(|cell| run_cell(cfg, cell, &data, &queries, &exact))
            .collect();
        out.extend(rows);
    }
    Ok(out)
}

fn run_cell(
    cfg: &SweepConfig,
    cell: &Cell<'_>,
    data: &[u64],
    queries: &[u64],
    exact: &[u64],
) -> ErrorReport {
    let order = StreamOrder::parse(cell.order, cell.seed).expect("validated order");
    let stream = apply_order(data, order);
    let params = SketchParams::new(cell.k, cell.algorithm.t(), cell.seed).with_scale(cfg.c);
    let start = Instant::now();
    let mut sketch = LinearSketch64::new(params).expect("validated parameters");
    for &x in &stream {
        sketch.update(x);
    }
    let view = sketch.view();
    let (mut sum, mut sup) = (0.0f64, 0.0f64);
    for (&q, &r) in queries.iter().zip(exact) {
        let err = (r as f64 - view.rank(q)).abs();
        sum += err;
        sup = sup.max(err);
    }
    let wall = start.elapsed().as_secs_f64() * 1e3;
    ErrorReport {
        algorithm: cell.algorithm.to_string(),
        dataset: cfg.datasets[cell.dataset].id(),
        order: order.id().to_string(),
        k: cell.k,
        t: cell.algorithm.t(),
        c: cfg.c,
        seed: cell.seed,
        n: stream.len() as u64,
        space_words: sketch.space() as u64,
        avg_l1: sum / queries.len() as f64,
        sum_l1: sum,
        sup_error: sup,
        eval_points: queries.len() as u64,
        wall_ms: cfg.timing.then_some(wall),
    }
}
