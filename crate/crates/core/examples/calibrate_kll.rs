//! Monte Carlo calibration of the KLL sup rank error.
//!
//! Usage: calibrate_kll <n> <k> <first_seed> <seeds>
//!
//! For each seed `s`, streams `n` uniform keys (generated with seed `s`) in
//! random order (shuffled with seed `s`) into a KLL sketch seeded with `s`,
//! and prints the 50th/90th/99th percentiles and maximum of the sup error
//! over all distinct keys.

use linsketch::data::{apply_order, Generator, StreamOrder};
use linsketch::{error_metrics, EvalPoints, ExactRank, KllSketch};

fn main() {
    let args: Vec<u64> = std::env::args()
        .skip(1)
        .map(|a| a.parse().expect("numeric argument"))
        .collect();
    let [n, k, first, seeds] = args[..] else {
        eprintln!("usage: calibrate_kll <n> <k> <first_seed> <seeds>");
        std::process::exit(2);
    };
    let mut sups: Vec<f64> = (first..first + seeds)
        .map(|s| {
            let data = Generator::Uniform.generate(n as usize, s);
            let mut sketch = KllSketch::new(k as u32, s).expect("valid k");
            for x in apply_order(&data, StreamOrder::Random(s)) {
                sketch.update(x);
            }
            error_metrics(&ExactRank::new(&data), &sketch, EvalPoints::AllDistinct)
                .expect("non-empty")
                .sup
        })
        .collect();
    sups.sort_by(|a, b| a.total_cmp(b));
    let pct = |p: f64| sups[((p * sups.len() as f64).ceil() as usize).clamp(1, sups.len()) - 1];
    println!(
        "n={n} k={k} seeds={first}..{} p50={} p90={} p99={} max={}",
        first + seeds,
        pct(0.5),
        pct(0.9),
        pct(0.99),
        sups[sups.len() - 1]
    );
}
