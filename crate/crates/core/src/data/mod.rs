//! Dataset loading, synthetic generators and stream orders.

mod dataset;
mod order;

pub use dataset::{load_sosd, write_sosd, DatasetSpec, Generator, Source};
pub use order::{apply_order, StreamOrder};
