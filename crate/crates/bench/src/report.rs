use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One row of a sweep: a sketch run on one (dataset, order, params, seed) cell.
///
/// `avg_l1` is the mean absolute rank error over the evaluation points and
/// `sum_l1` their sum; `sup_error` is the largest. `wall_ms` is only written
/// when timing is requested, so that reruns produce identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub algorithm: String,
    pub dataset: String,
    pub order: String,
    pub k: u32,
    pub t: u32,
    pub c: f64,
    pub seed: u64,
    pub n: u64,
    pub space_words: u64,
    pub avg_l1: f64,
    pub sum_l1: f64,
    pub sup_error: f64,
    pub eval_points: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<f64>,
}

impl ErrorReport {
    pub fn metric(&self, metric: Metric) -> f64 {
        match metric {
            Metric::AvgL1 => self.avg_l1,
            Metric::SupError => self.sup_error,
        }
    }
}

/// Error column used for frontiers and ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    AvgL1,
    SupError,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "avg_l1" => Ok(Metric::AvgL1),
            "sup_error" => Ok(Metric::SupError),
            _ => Err(format!(
                "unknown metric {s:?} (expected avg_l1 or sup_error)"
            )),
        }
    }
}

/// Writes reports as CSV with a header row.
pub fn write_reports<W: Write>(out: W, reports: &[ErrorReport]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        w.serialize(r)?;
    }
    if reports.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush()?;
    Ok(())
}

const HEADER: [&str; 13] = [
    "algorithm",
    "dataset",
    "order",
    "k",
    "t",
    "c",
    "seed",
    "n",
    "space_words",
    "avg_l1",
    "sum_l1",
    "sup_error",
    "eval_points",
];

pub fn read_reports<R: Read>(input: R) -> csv::Result<Vec<ErrorReport>> {
    csv::Reader::from_reader(input).deserialize().collect()
}
