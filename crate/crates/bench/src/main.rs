use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use linsketch::data::DatasetSpec;
use linsketch::kll::DEFAULT_SCALE;
use linsketch::EvalPoints;
use linsketch_bench::{
    compute_frontier, ratio_hull, read_reports, run_sweep, write_reports, Algorithm, ErrorReport,
    Frontier, Metric, SweepConfig,
};

/// Space/error benchmarks for KLL and linear-compactor sketches.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a parameter sweep and write one CSV row per cell and seed.
    Sweep(SweepArgs),
    /// Lower and upper space-error envelopes per algorithm from sweep CSV.
    Frontier(FrontierArgs),
    /// Error-ratio hulls between two algorithms from sweep CSV.
    Ratio(RatioArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Generator id (uniform, lognormal, gmm, zipf) or SOSD file path; repeatable.
    #[arg(long = "dataset", required = true)]
    datasets: Vec<String>,
    /// Keys per synthetic dataset.
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    /// Stride-subsample file datasets to this many keys.
    #[arg(long)]
    limit: Option<usize>,
    /// Seed of the synthetic generators.
    #[arg(long, default_value_t = 0)]
    data_seed: u64,
    /// Stream orders: random, sorted, half, flipflop.
    #[arg(long, value_delimiter = ',', default_value = "random")]
    orders: Vec<String>,
    /// Algorithm ids: kll, linear-t1, linear-t2, linear-t3.
    #[arg(long, value_delimiter = ',')]
    algorithms: Vec<Algorithm>,
    /// Linear compactor heights; 0 means kll. Added to --algorithms.
    #[arg(long = "t", value_delimiter = ',')]
    ts: Vec<u32>,
    /// Top compactor capacities.
    #[arg(long = "k", value_delimiter = ',', required = true)]
    ks: Vec<u32>,
    /// Seeds; each drives the random order and the sketch.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Capacity decay per height.
    #[arg(long, default_value_t = DEFAULT_SCALE)]
    c: f64,
    /// Evaluation points: auto, all, or a count of evenly spaced distinct keys.
    #[arg(long, default_value = "auto")]
    eval_points: String,
    /// Add a wall_ms column (makes output machine-dependent).
    #[arg(long)]
    timing: bool,
    /// Output CSV path; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FrontierArgs {
    /// Sweep CSV.
    #[arg(long, short)]
    input: PathBuf,
    /// Error column: avg_l1 or sup_error.
    #[arg(long, default_value = "avg_l1")]
    metric: Metric,
    /// Keep stream orders apart instead of pooling them per dataset.
    #[arg(long)]
    by_order: bool,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RatioArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    numerator: Algorithm,
    #[arg(long)]
    denominator: Algorithm,
    #[arg(long, default_value = "avg_l1")]
    metric: Metric,
    #[arg(long)]
    by_order: bool,
    /// Log-spaced space values per hull.
    #[arg(long, default_value_t = 50)]
    grid: usize,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Frontier(args) => frontier(args),
        Command::Ratio(args) => ratio(args),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn parse_eval(s: &str) -> Result<EvalPoints> {
    Ok(match s {
        "auto" => EvalPoints::Auto,
        "all" => EvalPoints::AllDistinct,
        n => EvalPoints::Grid(n.parse().ok().filter(|&n: &usize| n > 0).with_context(|| {
            format!("--eval-points must be auto, all or a positive count, got {n:?}")
        })?),
    })
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut algorithms = args.algorithms;
    algorithms.extend(args.ts.iter().map(|&t| Algorithm::from_t(t)));
    if algorithms.is_empty() {
        algorithms = vec![Algorithm::Kll, Algorithm::Linear(2)];
    }
    let mut seen = Vec::new();
    algorithms.retain(|a| {
        let fresh = !seen.contains(a);
        seen.push(*a);
        fresh
    });
    let datasets: Vec<DatasetSpec> = args
        .datasets
        .iter()
        .map(|d| {
            let spec = DatasetSpec::parse(d, None, args.data_seed);
            let n = match spec.source {
                linsketch::data::Source::Synthetic(_) => Some(args.n),
                linsketch::data::Source::File(_) => args.limit,
            };
            DatasetSpec { n, ..spec }
        })
        .collect();
    let cfg = SweepConfig {
        datasets,
        orders: args.orders,
        algorithms,
        ks: args.ks,
        seeds: args.seeds,
        c: args.c,
        eval: parse_eval(&args.eval_points)?,
        timing: args.timing,
    };
    let rows = run_sweep(&cfg).map_err(anyhow::Error::msg)?;
    if rows.is_empty() {
        bail!("no dataset could be loaded");
    }
    write_reports(output(&args.output)?, &rows)?;
    Ok(())
}

type Group = (String, String);

/// Groups `(space, error)` points by (dataset, order or "all", algorithm).
fn group(
    rows: &[ErrorReport],
    metric: Metric,
    by_order: bool,
) -> BTreeMap<(Group, String), Vec<(f64, f64)>> {
    let mut groups: BTreeMap<(Group, String), Vec<(f64, f64)>> = BTreeMap::new();
    for r in rows {
        let order = if by_order {
            r.order.clone()
        } else {
            "all".to_string()
        };
        groups
            .entry(((r.dataset.clone(), order), r.algorithm.clone()))
            .or_default()
            .push((r.space_words as f64, r.metric(metric)));
    }
    groups
}

fn load(path: &PathBuf) -> Result<Vec<ErrorReport>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_reports(file).with_context(|| format!("reading {}", path.display()))
}

fn frontier(args: FrontierArgs) -> Result<()> {
    let rows = load(&args.input)?;
    let mut w = csv::Writer::from_writer(output(&args.output)?);
    w.write_record([
        "dataset",
        "order",
        "algorithm",
        "envelope",
        "space",
        "error",
    ])?;
    for (((dataset, order), algorithm), pts) in group(&rows, args.metric, args.by_order) {
        let f =
            compute_frontier(&pts).with_context(|| format!("{algorithm} on {dataset}/{order}"))?;
        for (name, vertices) in [("lower", &f.lower), ("upper", &f.upper)] {
            for &(s, e) in vertices.iter() {
                w.write_record([
                    &dataset,
                    &order,
                    &algorithm,
                    name,
                    &s.to_string(),
                    &e.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn ratio(args: RatioArgs) -> Result<()> {
    let rows = load(&args.input)?;
    let groups = group(&rows, args.metric, args.by_order);
    let mut frontiers: BTreeMap<Group, BTreeMap<String, Frontier>> = BTreeMap::new();
    for ((g, algorithm), pts) in groups {
        let f =
            compute_frontier(&pts).with_context(|| format!("{algorithm} on {}/{}", g.0, g.1))?;
        frontiers.entry(g).or_default().insert(algorithm, f);
    }
    let (num, den) = (args.numerator.to_string(), args.denominator.to_string());
    let mut w = csv::Writer::from_writer(output(&args.output)?);
    w.write_record([
        "dataset",
        "order",
        "numerator",
        "denominator",
        "space",
        "ratio_low",
        "ratio_high",
    ])?;
    let mut any = false;
    for ((dataset, order), by_alg) in &frontiers {
        let (Some(a), Some(b)) = (by_alg.get(&num), by_alg.get(&den)) else {
            continue;
        };
        for (top, bottom, na, nb) in [(a, b, &num, &den), (b, a, &den, &num)] {
            let hull = ratio_hull(top, bottom, args.grid)
                .with_context(|| format!("{na} / {nb} on {dataset}/{order}"))?;
            for p in hull {
                w.write_record([
                    dataset,
                    order,
                    na,
                    nb,
                    &p.space.to_string(),
                    &p.low.to_string(),
                    &p.high.to_string(),
                ])?;
            }
        }
        any = true;
    }
    if !any {
        bail!("no dataset has rows for both {num} and {den}");
    }
    w.flush()?;
    Ok(())
}
