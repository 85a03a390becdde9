//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Thresholds and calibration constants are pinned below.

use std::time::{Duration, Instant};

use itertools::Itertools;
use linsketch::data::DatasetSpec;
use linsketch::data::{apply_order, load_sosd, Generator, StreamOrder};
use linsketch::linear::{
    bruteforce_compact, sup_error, LinearCompactor, RankFunction, WeightedPoint,
};
use linsketch::{error_metrics, EvalPoints, ExactRank, KllSketch, LinearSketch64, SketchParams};
use linsketch_bench::{
    compute_frontier, ratio_hull, run_sweep, Algorithm, ErrorReport, Frontier, SweepConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// 99th percentile (nearest rank) of the KLL sup error over seeds 0..200,
/// n = 10^6 uniform keys in random order, k = 64
/// (`cargo run --release -p linsketch --example calibrate_kll 1000000 64 0 200`).
const KLL_E_STAR: f64 = 45032.0;
const KLL_E_STAR_SLACK: f64 = 1.2;

const REL_TOL: f64 = 1e-9;
const GRID_TOL: f64 = 1e-6;
const FRONTIER_KS: [u32; 6] = [32, 64, 128, 256, 512, 1024];
const FRONTIER_SEEDS: [u64; 3] = [0, 1, 2];
const FRONTIER_SHARE: f64 = 0.8;
const FRONTIER_FACTOR: f64 = 3.0;
const FLIPFLOP_FACTOR: f64 = 3.0;
/// Environment variable naming an SOSD key file to include in the frontier run.
const SOSD_ENV: &str = "LINSKETCH_SOSD";

type Outcome = Result<String, String>;
type Check = (&'static str, Duration, fn() -> Outcome);

fn main() {
    let checks: [Check; 9] = [
        ("dp-vs-oracle", Duration::from_secs(60), dp_vs_oracle),
        (
            "compaction-contract-fuzz",
            Duration::from_secs(300),
            compaction_fuzz,
        ),
        (
            "top-compaction-bounds",
            Duration::from_secs(600),
            instrumented_stream,
        ),
        ("t0-equivalence", Duration::from_secs(600), t0_equivalence),
        (
            "kll-statistical-error",
            Duration::from_secs(600),
            kll_statistical,
        ),
        (
            "frontier-envelopes",
            Duration::from_secs(1800),
            frontier_envelopes,
        ),
        ("flipflop-robustness", Duration::from_secs(600), flipflop),
        (
            "frontier-ratio-units",
            Duration::from_secs(10),
            frontier_units,
        ),
        ("lossless-small-streams", Duration::from_secs(10), lossless),
    ];
    let filter = std::env::args().nth(1).filter(|a| !a.starts_with('-'));
    let mut failed = 0;
    for (name, budget, check) in checks {
        if filter.as_deref().is_some_and(|f| !name.contains(f)) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(d) if took > budget => Err(format!("{d}; took {took:.1?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({took:.1?})"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({took:.1?})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

fn compactor(values: &[u64], weights: &[f64]) -> LinearCompactor<f64> {
    let pts: Vec<_> = values
        .iter()
        .zip(weights)
        .map(|(&v, &w)| WeightedPoint::new(v, w))
        .collect();
    LinearCompactor::from_points(values.len().max(2).next_multiple_of(2), &pts)
        .expect("valid points")
}

fn dp_matches(c: &LinearCompactor<f64>) -> Result<(), String> {
    let (_, brute) = bruteforce_compact(c, 0.5).map_err(|e| e.to_string())?;
    let mut dp = c.clone();
    let out = dp.compact(0.5).map_err(|e| e.to_string())?;
    if out.sup_error != brute.sup_error || out.retained != brute.retained {
        return Err(format!(
            "{:?}: dp {:?}/{} vs brute force {:?}/{}",
            c.points().collect::<Vec<_>>(),
            out.retained,
            out.sup_error,
            brute.retained,
            brute.sup_error
        ));
    }
    Ok(())
}

fn dp_vs_oracle() -> Outcome {
    let mut count = 0;
    for n in [6usize, 8] {
        let values: Vec<u64> = (1..=n as u64).collect();
        for weights in std::iter::repeat_n([1.0, 2.0, 10.0], n).multi_cartesian_product() {
            dp_matches(&compactor(&values, &weights))?;
            count += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..1000 {
        let n = rng.random_range(8..=12);
        let mut values: Vec<u64> = (0..1000).collect();
        values = rand::seq::index::sample(&mut rng, 1000, n)
            .into_iter()
            .map(|i| values[i])
            .sorted()
            .collect();
        let weights: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.random_range(-2.0..2.0)))
            .collect();
        dp_matches(&compactor(&values, &weights))?;
        count += 1;
    }
    Ok(format!(
        "{count} instances, objective and retained set equal"
    ))
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn compaction_fuzz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let calls = 1_000_000;
    for call in 0..calls {
        let n = rng.random_range(3..=48);
        let span = 1u64 << rng.random_range(6..40);
        let values: Vec<u64> = rand::seq::index::sample(&mut rng, span.min(1 << 20) as usize, n)
            .into_iter()
            .map(|i| i as u64 * (span >> 20).max(1))
            .sorted()
            .collect();
        let weights: Vec<f64> = (0..n)
            .map(|_| 10f64.powf(rng.random_range(-3.0..3.0)))
            .collect();
        let before = compactor(&values, &weights);
        let mut after = before.clone();
        let out = after.compact(0.5).map_err(|e| e.to_string())?;
        if !rel_close(before.total_weight(), after.total_weight()) {
            return Err(format!(
                "call {call}: weight {} -> {}",
                before.total_weight(),
                after.total_weight()
            ));
        }
        let kept: Vec<u64> = after.points().map(|p| p.value).collect();
        let subset: Vec<u64> = out.retained.iter().map(|&i| values[i]).collect();
        if kept != subset || !out.retained.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("call {call}: retained points are not a subset"));
        }
        for &v in &kept {
            if !rel_close(before.rank(v), after.rank(v)) {
                return Err(format!(
                    "call {call}: rank at {v} moved {} -> {}",
                    before.rank(v),
                    after.rank(v)
                ));
            }
        }
    }
    Ok(format!("{calls} compactions; conservation and rank preservation within {REL_TOL:e} relative, subsets exact"))
}

/// Largest total weight of a maximal run of discarded breakpoints.
fn max_run_weight(before: &RankFunction<f64>, after: &RankFunction<f64>) -> f64 {
    let kept = after.breakpoints();
    let (mut best, mut run) = (0.0f64, 0.0);
    for (z, w) in before.breakpoints().iter().zip(before.weights()) {
        if kept.binary_search(z).is_ok() {
            best = best.max(run);
            run = 0.0;
        } else {
            run += w;
        }
    }
    best.max(run)
}

/// Largest deviation over 10 evenly spaced queries per breakpoint interval,
/// breakpoints included.
fn dense_grid_sup(before: &RankFunction<f64>, after: &RankFunction<f64>) -> f64 {
    let z = before.breakpoints();
    let dev = |q: u64| (before.eval(q) - after.eval(q)).abs();
    let mut sup = dev(z[z.len() - 1]);
    for w in z.windows(2) {
        for s in 0..10u64 {
            sup = sup.max(dev(w[0] + ((w[1] - w[0]) as u128 * s as u128 / 10) as u64));
        }
    }
    sup
}

fn instrumented_stream() -> Outcome {
    let mut sketch =
        LinearSketch64::new(SketchParams::new(128, 2, 41)).map_err(|e| e.to_string())?;
    sketch.enable_trace();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let n = 10_000_000u64;
    let (mut count, mut worst_31, mut worst_32, mut worst_34, mut worst_33) =
        (0, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut violations = Vec::new();
    for i in 0..n {
        sketch.update(rng.random_range(0..1u64 << 56));
        if i % 1_000_000 != 999_999 {
            continue;
        }
        for c in sketch.take_trace() {
            count += 1;
            let intake = c.intake_weight as f64;
            let runs = max_run_weight(&c.before, &c.after);
            worst_31 = worst_31.max(c.sup_error / runs);
            if c.sup_error > runs * (1.0 + REL_TOL) {
                violations.push(format!(
                    "3.1 at compaction {}: {} > run weight {runs}",
                    c.index, c.sup_error
                ));
            }
            let grid = dense_grid_sup(&c.before, &c.after);
            let breakpoint = sup_error(&c.before, &c.after).map_err(|e| e.to_string())?;
            let rel = (grid - breakpoint).abs() / breakpoint.max(f64::MIN_POSITIVE);
            worst_32 = worst_32.max(rel);
            if rel > GRID_TOL {
                violations.push(format!(
                    "3.2 at compaction {}: grid {grid} vs breakpoints {breakpoint}",
                    c.index
                ));
            }
            let bound = (c.index + 1) as f64 * 2.0 * intake;
            worst_34 = worst_34.max(c.sup_error / bound);
            if c.sup_error > bound {
                violations.push(format!(
                    "3.4 at compaction {}: {} > {bound}",
                    c.index, c.sup_error
                ));
            }
            let mut weights = c.after.weights().to_vec();
            weights.sort_by(f64::total_cmp);
            let half = weights[weights.len().div_ceil(2) - 1];
            let limit = (2 * c.index + 3) as f64 * intake;
            worst_33 = worst_33.max(half / limit);
            if half > limit {
                violations.push(format!(
                    "3.3 after compaction {}: median-rank weight {half} > {limit}",
                    c.index
                ));
            }
        }
    }
    if count == 0 {
        return Err("no top compactions happened".into());
    }
    if !violations.is_empty() {
        return Err(format!(
            "{} violations, first: {}",
            violations.len(),
            violations[0]
        ));
    }
    Ok(format!(
        "{count} top compactions over {n} items; worst ratios to bound: run weight {worst_31:.3}, \
         grid rel diff {worst_32:.1e}, per-compaction {worst_34:.3}, half-weight {worst_33:.3}"
    ))
}

fn t0_equivalence() -> Outcome {
    for seed in 0..100u64 {
        let gen = Generator::ALL[seed as usize % 4];
        let data = apply_order(&gen.generate(100_000, seed), StreamOrder::Random(seed));
        let mut kll = KllSketch::new(64, seed).map_err(|e| e.to_string())?;
        let mut lin =
            LinearSketch64::new(SketchParams::new(64, 0, seed)).map_err(|e| e.to_string())?;
        for &x in &data {
            kll.update(x);
            lin.update(x);
        }
        if kll.to_bytes() != lin.to_bytes() {
            return Err(format!("stream {seed}: serialized states differ"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
        for _ in 0..1000 {
            let q = if rng.random::<bool>() {
                data[rng.random_range(0..data.len())]
            } else {
                rng.random()
            };
            if lin.rank(q) != kll.rank(q) as f64 {
                return Err(format!(
                    "stream {seed}: rank({q}) {} vs {}",
                    lin.rank(q),
                    kll.rank(q)
                ));
            }
        }
    }
    Ok("100 streams of 1e5 items: identical blobs and 1000 identical ranks each".into())
}

fn kll_statistical() -> Outcome {
    let mut sups: Vec<f64> = (1000..1200u64)
        .map(|s| {
            let data = Generator::Uniform.generate(1_000_000, s);
            let mut sketch = KllSketch::new(64, s).expect("valid k");
            for x in apply_order(&data, StreamOrder::Random(s)) {
                sketch.update(x);
            }
            error_metrics(&ExactRank::new(&data), &sketch, EvalPoints::AllDistinct)
                .expect("non-empty")
                .sup
        })
        .collect();
    sups.sort_by(f64::total_cmp);
    let p99 = sups[(0.99 * sups.len() as f64).ceil() as usize - 1];
    let limit = KLL_E_STAR_SLACK * KLL_E_STAR;
    let detail =
        format!("p99 sup error {p99} over seeds 1000..1200 vs {KLL_E_STAR_SLACK} x reference {KLL_E_STAR} = {limit}");
    if p99 <= limit {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn envelope_points(rows: &[ErrorReport], dataset: &str, algorithm: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.dataset == dataset && r.algorithm == algorithm)
        .map(|r| (r.space_words as f64, r.avg_l1))
        .collect()
}

/// Share of the log-space grid where `a`'s lower envelope is at or below
/// `b`'s, and the largest ratio of the two lower envelopes.
fn compare_lower(a: &Frontier, b: &Frontier) -> Result<(f64, f64), String> {
    let hull = ratio_hull(a, b, 200).map_err(|e| e.to_string())?;
    let ratios: Vec<f64> = hull
        .iter()
        .map(|p| a.lower_at(p.space).unwrap() / b.lower_at(p.space).unwrap())
        .collect();
    let share = ratios.iter().filter(|&&r| r <= 1.0).count() as f64 / ratios.len() as f64;
    Ok((share, ratios.iter().copied().fold(0.0, f64::max)))
}

fn frontier_envelopes() -> Outcome {
    let mut datasets = vec![DatasetSpec::synthetic(Generator::Lognormal, 1_000_000, 4)];
    let sosd = std::env::var(SOSD_ENV).ok();
    if let Some(path) = &sosd {
        load_sosd(path.as_ref(), Some(1)).map_err(|e| format!("{SOSD_ENV}={path}: {e}"))?;
        datasets.push(DatasetSpec::file(path, Some(1_000_000)));
    }
    let cfg = SweepConfig {
        datasets: datasets.clone(),
        orders: ["random", "sorted", "half", "flipflop"]
            .map(String::from)
            .to_vec(),
        algorithms: vec![Algorithm::Kll, Algorithm::Linear(2)],
        ks: FRONTIER_KS.to_vec(),
        seeds: FRONTIER_SEEDS.to_vec(),
        c: linsketch::kll::DEFAULT_SCALE,
        eval: EvalPoints::Auto,
        timing: false,
    };
    let rows = run_sweep(&cfg)?;
    let mut details = Vec::new();
    let mut failures = Vec::new();
    for (i, spec) in datasets.iter().enumerate() {
        let id = spec.id();
        let kll =
            compute_frontier(&envelope_points(&rows, &id, "kll")).map_err(|e| e.to_string())?;
        let lin = compute_frontier(&envelope_points(&rows, &id, "linear-t2"))
            .map_err(|e| e.to_string())?;
        let (share, worst) = compare_lower(&lin, &kll)?;
        details.push(format!(
            "{id}: linear-t2 lower envelope <= kll on {:.0}% of shared space, max ratio {worst:.2}",
            share * 100.0
        ));
        // the share criterion applies to the smooth synthetic dataset only
        if i == 0 && share < FRONTIER_SHARE {
            failures.push(format!("{id}: share {share:.2} < {FRONTIER_SHARE}"));
        }
        if worst > FRONTIER_FACTOR {
            failures.push(format!(
                "{id}: envelope ratio {worst:.2} > {FRONTIER_FACTOR}"
            ));
        }
    }
    if sosd.is_none() {
        details.push(format!("SOSD dataset skipped ({SOSD_ENV} not set)"));
    }
    if failures.is_empty() {
        Ok(details.join("; "))
    } else {
        Err(format!("{}; {}", failures.join("; "), details.join("; ")))
    }
}

fn flipflop() -> Outcome {
    let data = Generator::Lognormal.generate(1_000_000, 4);
    let oracle = ExactRank::new(&data);
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for k in FRONTIER_KS {
        let sup = |order: StreamOrder| {
            let mut s = LinearSketch64::new(SketchParams::new(k, 2, 3)).expect("valid params");
            apply_order(&data, order)
                .into_iter()
                .for_each(|x| s.update(x));
            error_metrics(&oracle, &s, EvalPoints::Auto)
                .expect("non-empty")
                .sup
        };
        let (ff, random) = (sup(StreamOrder::FlipFlop), sup(StreamOrder::Random(3)));
        worst = worst.max(ff / random);
        if ff > FLIPFLOP_FACTOR * random {
            failures.push(format!(
                "k={k}: flip-flop {ff} > {FLIPFLOP_FACTOR} x random {random}"
            ));
        }
    }
    if failures.is_empty() {
        Ok(format!(
            "worst flip-flop/random sup ratio {worst:.2} over k in {FRONTIER_KS:?}"
        ))
    } else {
        Err(failures.join("; "))
    }
}

fn frontier_units() -> Outcome {
    let pareto = compute_frontier(&[(10.0, 5.0), (20.0, 2.0)]).map_err(|e| e.to_string())?;
    if pareto.lower != [(10.0, 5.0), (20.0, 2.0)] {
        return Err(format!("Pareto pair: {:?}", pareto.lower));
    }
    let stairs = compute_frontier(&[(10.0, 5.0), (20.0, 7.0)]).map_err(|e| e.to_string())?;
    if stairs.lower != [(10.0, 5.0), (20.0, 5.0)] || stairs.upper != [(10.0, 5.0), (20.0, 7.0)] {
        return Err(format!("staircase: {stairs:?}"));
    }
    let scatter = [
        (12.0, 9.0),
        (15.0, 14.0),
        (20.0, 4.0),
        (33.0, 6.0),
        (40.0, 3.0),
        (90.0, 1.0),
        (90.0, 2.5),
    ];
    let f = compute_frontier(&scatter).map_err(|e| e.to_string())?;
    for &(s, e) in &scatter {
        if f.lower_at(s).unwrap() > e || f.upper_at(s).unwrap() < e {
            return Err(format!("envelope does not bound ({s}, {e})"));
        }
    }
    let mut dominated = scatter.to_vec();
    dominated.extend([(25.0, 4.5), (40.0, 3.5), (90.0, 7.0)]);
    if compute_frontier(&dominated)
        .map_err(|e| e.to_string())?
        .lower
        != f.lower
    {
        return Err("dominated points moved the lower envelope".into());
    }
    for p in ratio_hull(&f, &f, 50).map_err(|e| e.to_string())? {
        if !(p.low <= 1.0 && 1.0 <= p.high) {
            return Err(format!(
                "self-ratio hull misses 1 at space {}: {p:?}",
                p.space
            ));
        }
    }
    if compute_frontier(&[(5.0, 1.0), (5.0, 2.0)]).is_ok() {
        return Err("identical spaces accepted".into());
    }
    Ok("staircase, Pareto, bounding, dominance and self-ratio checks exact".into())
}

fn lossless() -> Outcome {
    for t in 0..=3u32 {
        // below the bottom capacity k c^t nothing is ever compacted
        let data = Generator::Uniform.generate(10, u64::from(t));
        let mut s = LinearSketch64::new(SketchParams::new(64, t, 1)).map_err(|e| e.to_string())?;
        data.iter().for_each(|&x| s.update(x));
        let m = error_metrics(&ExactRank::new(&data), &s, EvalPoints::Auto)
            .map_err(|e| e.to_string())?;
        if (m.avg_l1, m.sup) != (0.0, 0.0) {
            return Err(format!("t={t}: {m:?}"));
        }
    }
    Ok("streams below the bottom capacity have zero error for t = 0..3".into())
}
