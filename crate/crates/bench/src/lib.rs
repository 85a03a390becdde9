//! Space/error benchmark harness: parameter sweeps, error-report CSV,
//! space-error frontiers and error-ratio hulls.

pub mod frontier;
pub mod report;
pub mod sweep;

pub use frontier::{compute_frontier, ratio_hull, Frontier, FrontierError, HullPoint};
pub use report::{read_reports, write_reports, ErrorReport, Metric};
pub use sweep::{run_sweep, Algorithm, SweepConfig};
