use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal, Zipf};

use crate::error::{Error, Result};

/// Synthetic key distributions, one per CDF shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Uniform over `[0, 2^40)`.
    Uniform,
    /// Quantized log-normal; a smooth, skewed CDF.
    Lognormal,
    /// Quantized mixture of five Gaussians; a CDF with several steep regions.
    Gmm,
    /// Zipf-distributed ranks spread over the key space; a step CDF with heavy
    /// duplicates.
    Zipf,
}

impl Generator {
    pub const ALL: [Generator; 4] = [
        Generator::Uniform,
        Generator::Lognormal,
        Generator::Gmm,
        Generator::Zipf,
    ];

    pub fn id(&self) -> &'static str {
        match self {
            Generator::Uniform => "uniform",
            Generator::Lognormal => "lognormal",
            Generator::Gmm => "gmm",
            Generator::Zipf => "zipf",
        }
    }

    /// `n` keys drawn with a generator seeded by `seed`.
    pub fn generate(&self, n: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            Generator::Uniform => (0..n).map(|_| rng.random_range(0..1u64 << 40)).collect(),
            Generator::Lognormal => {
                let d = LogNormal::new(0.0, 2.0).expect("valid parameters");
                (0..n).map(|_| quantize(d.sample(&mut rng) * 1e9)).collect()
            }
            Generator::Gmm => {
                const MEANS: [f64; 5] = [0.05, 0.2, 0.45, 0.7, 0.9];
                const SDS: [f64; 5] = [0.01, 0.05, 0.002, 0.1, 0.02];
                let comps: Vec<Normal<f64>> = MEANS
                    .iter()
                    .zip(SDS)
                    .map(|(&m, s)| {
                        Normal::new(m * 2f64.powi(40), s * 2f64.powi(40)).expect("valid parameters")
                    })
                    .collect();
                (0..n)
                    .map(|_| quantize(comps[rng.random_range(0..comps.len())].sample(&mut rng)))
                    .collect()
            }
            Generator::Zipf => {
                let d = Zipf::new(10_000.0, 1.1).expect("valid parameters");
                (0..n)
                    .map(|_| {
                        let r: f64 = d.sample(&mut rng);
                        // scatter ranks so that key order differs from popularity order
                        (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 24
                    })
                    .collect()
            }
        }
    }
}

fn quantize(x: f64) -> u64 {
    // `as` saturates: negatives map to 0, overflow to u64::MAX
    x.round() as u64
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL
            .into_iter()
            .find(|g| g.id() == s)
            .ok_or_else(|| Error::Unknown {
                kind: "generator",
                name: s.to_string(),
            })
    }
}

/// Where a dataset's keys come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    /// SOSD binary file: little-endian `u64` count followed by that many
    /// little-endian `u64` keys.
    File(PathBuf),
    Synthetic(Generator),
}

/// A dataset to load: its source, the number of keys wanted and the
/// generator seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSpec {
    pub source: Source,
    /// Keys to generate, or for files the stride-subsample size (`None` loads
    /// the whole file).
    pub n: Option<usize>,
    pub seed: u64,
}

impl DatasetSpec {
    pub fn synthetic(generator: Generator, n: usize, seed: u64) -> Self {
        Self {
            source: Source::Synthetic(generator),
            n: Some(n),
            seed,
        }
    }

    pub fn file(path: impl Into<PathBuf>, limit: Option<usize>) -> Self {
        Self {
            source: Source::File(path.into()),
            n: limit,
            seed: 0,
        }
    }

    /// Parses a CLI dataset string: a generator id, or a file path optionally
    /// prefixed with `file:`.
    pub fn parse(s: &str, n: Option<usize>, seed: u64) -> Self {
        let source = match s.strip_prefix("file:") {
            Some(path) => Source::File(path.into()),
            None => s
                .parse::<Generator>()
                .map(Source::Synthetic)
                .unwrap_or_else(|_| Source::File(s.into())),
        };
        Self { source, n, seed }
    }

    /// Identifier used in reports: the generator id or the file stem.
    pub fn id(&self) -> String {
        match &self.source {
            Source::Synthetic(g) => g.id().to_string(),
            Source::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }

    pub fn load(&self) -> Result<Vec<u64>> {
        match &self.source {
            Source::Synthetic(g) => {
                let n = self.n.unwrap_or(0);
                if n == 0 {
                    return Err(Error::InvalidParameter(
                        "synthetic datasets need n >= 1".to_string(),
                    ));
                }
                Ok(g.generate(n, self.seed))
            }
            Source::File(p) => load_sosd(p, self.n),
        }
    }
}

/// Reads a SOSD key file. With `limit` below the key count, returns the keys
/// at positions `floor(i * count / limit)` for `i < limit`.
pub fn load_sosd(path: &Path, limit: Option<usize>) -> Result<Vec<u64>> {
    let file = File::open(path)?;
    let len = file.metadata()?.len();
    let mut r = BufReader::with_capacity(1 << 20, file);
    let mut word = [0u8; 8];
    if len < 8 {
        return Err(Error::format(
            len,
            "file shorter than the 8-byte count header",
        ));
    }
    r.read_exact(&mut word)?;
    let count = u64::from_le_bytes(word);
    let expected = count
        .checked_mul(8)
        .and_then(|b| b.checked_add(8))
        .ok_or_else(|| Error::format(0, format!("count {count} overflows")))?;
    if len < expected {
        return Err(Error::format(
            len,
            format!(
                "truncated: header promises {count} keys but only {} are present",
                (len - 8) / 8
            ),
        ));
    }
    if len > expected {
        return Err(Error::format(
            expected,
            format!(
                "count mismatch: {} trailing bytes after {count} keys",
                len - expected
            ),
        ));
    }
    let count = usize::try_from(count).map_err(|_| Error::TooLarge(usize::MAX))?;
    let take = limit.map_or(count, |l| l.min(count));
    let mut out = Vec::with_capacity(take);
    let mut pos = 0usize;
    for i in 0..take {
        let target = if take == count {
            i
        } else {
            (i as u128 * count as u128 / take as u128) as usize
        };
        while pos < target {
            r.read_exact(&mut word)?;
            pos += 1;
        }
        r.read_exact(&mut word)?;
        pos += 1;
        out.push(u64::from_le_bytes(word));
    }
    Ok(out)
}

/// Writes keys in the SOSD layout.
pub fn write_sosd(path: &Path, keys: &[u64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(keys.len() as u64).to_le_bytes())?;
    for &k in keys {
        w.write_all(&k.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}
