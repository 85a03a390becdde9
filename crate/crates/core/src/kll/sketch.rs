use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{KllCompactor, Sampler};
use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};

/// Default capacity decay between adjacent heights.
pub const DEFAULT_SCALE: f64 = 2.0 / 3.0;

/// Words charged for the sampler (candidate, pending weight, height).
pub const SAMPLER_WORDS: usize = 3;

const MAGIC: &[u8; 4] = b"QKLL";
const VERSION: u8 = 1;

/// Capacity of a compactor `depth` heights below the top of the hierarchy:
/// `max(ceil(k * c^depth), 2)`, rounded up to an even number.
pub fn level_capacity(k: u32, c: f64, depth: u32) -> usize {
    let raw = (f64::from(k) * c.powi(depth.min(i32::MAX as u32) as i32)).ceil();
    let cap = if raw > 2.0 { raw as usize } else { 2 };
    cap + cap % 2
}

/// Batch handed past the top compactor when the top heights are reserved for
/// another summary.
#[derive(Debug, Clone)]
pub(crate) struct Promotion {
    pub weight: u64,
    pub items: Vec<u64>,
}

/// KLL quantile sketch over `u64` items.
///
/// Compactors occupy contiguous heights starting at the sampler height. The
/// capacity at height `h` is [`level_capacity`] of its depth below the top of
/// the hierarchy, so every growth step shrinks all existing compactors; the
/// ones pushed over their new capacity are compacted before the update
/// returns.
#[derive(Debug, Clone)]
pub struct KllSketch {
    k: u32,
    c: f64,
    seed: u64,
    /// Heights above the top compactor that belong to an external summary.
    reserved: u32,
    sampler: Sampler,
    levels: Vec<KllCompactor>,
    rng: ChaCha8Rng,
    n: u64,
    compactions: Vec<u64>,
}

impl KllSketch {
    pub fn new(k: u32, seed: u64) -> Result<Self> {
        Self::with_scale(k, DEFAULT_SCALE, seed)
    }

    pub fn with_scale(k: u32, c: f64, seed: u64) -> Result<Self> {
        Self::build(k, c, seed, 0)
    }

    pub(crate) fn build(k: u32, c: f64, seed: u64, reserved: u32) -> Result<Self> {
        validate(k, c)?;
        let base = KllCompactor::new(0, level_capacity(k, c, reserved));
        Ok(Self {
            k,
            c,
            seed,
            reserved,
            sampler: Sampler::new(0),
            levels: vec![base],
            rng: ChaCha8Rng::seed_from_u64(seed),
            n: 0,
            compactions: Vec::new(),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn scale(&self) -> f64 {
        self.c
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub(crate) fn reserved(&self) -> u32 {
        self.reserved
    }

    /// Items ingested so far.
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of heights `H` in the hierarchy, including sampled and reserved ones.
    pub fn height(&self) -> u32 {
        self.top_height() + 1 + self.reserved
    }

    fn top_height(&self) -> u32 {
        self.levels.last().expect("at least one compactor").height()
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    /// Compactors ordered by height, lowest first.
    pub fn compactors(&self) -> &[KllCompactor] {
        &self.levels
    }

    /// Number of compactions performed at each height, indexed by height.
    pub fn compaction_counts(&self) -> &[u64] {
        &self.compactions
    }

    /// Capacity of the compactor at `height` under the current hierarchy height.
    pub fn capacity_at(&self, height: u32) -> usize {
        let depth = self.height().saturating_sub(1 + height);
        level_capacity(self.k, self.c, depth)
    }

    pub fn update(&mut self, x: u64) {
        let mut overflow = Vec::new();
        self.insert(x, &mut overflow);
        debug_assert!(overflow.is_empty());
    }

    pub(crate) fn insert(&mut self, x: u64, overflow: &mut Vec<Promotion>) {
        self.n += 1;
        if let Some(item) = self.sampler.offer(x, 1, &mut self.rng) {
            self.levels[0].push(item);
            self.settle(overflow);
        }
    }

    /// Adds a compactor on top, recomputes every capacity and compacts whatever
    /// no longer fits.
    pub(crate) fn grow(&mut self, overflow: &mut Vec<Promotion>) {
        let h = self.top_height() + 1;
        self.levels.push(KllCompactor::new(h, 2));
        self.refresh_capacities();
        self.settle(overflow);
    }

    fn settle(&mut self, overflow: &mut Vec<Promotion>) {
        let mut i = 0;
        while i < self.levels.len() {
            if self.levels[i].is_full() {
                let h = self.levels[i].height();
                let promoted = self.levels[i].compact_even_part(&mut self.rng);
                self.count_compaction(h);
                if i + 1 < self.levels.len() {
                    self.levels[i + 1].extend_from_slice(&promoted);
                } else if self.reserved == 0 {
                    let mut top = KllCompactor::new(h + 1, 2);
                    top.extend_from_slice(&promoted);
                    self.levels.push(top);
                    self.refresh_capacities();
                    i = 0;
                    continue;
                } else {
                    overflow.push(Promotion {
                        weight: 1u64 << (h + 1),
                        items: promoted,
                    });
                }
            }
            i += 1;
        }
        self.collapse_sampled_levels();
    }

    fn refresh_capacities(&mut self) {
        let caps: Vec<usize> = self
            .levels
            .iter()
            .map(|l| self.capacity_at(l.height()))
            .collect();
        for (level, cap) in self.levels.iter_mut().zip(caps) {
            level.set_capacity(cap);
        }
    }

    fn collapse_sampled_levels(&mut self) {
        while self.levels.len() > 1 && self.levels[0].capacity() <= 2 {
            let bottom = self.levels.remove(0);
            debug_assert!(bottom.len() <= 1);
            self.sampler
                .raise(bottom.items().first().copied(), &mut self.rng);
        }
    }

    fn count_compaction(&mut self, height: u32) {
        let h = height as usize;
        if self.compactions.len() <= h {
            self.compactions.resize(h + 1, 0);
        }
        self.compactions[h] += 1;
    }

    /// Sum of the weights of all retained items `<= q`. The sampler's pending
    /// candidate is not counted.
    pub fn rank(&self, q: u64) -> u64 {
        self.levels
            .iter()
            .map(|l| l.count_le(q) as u64 * l.weight())
            .sum()
    }

    /// Total weight of retained items; equals `n` minus the sampler's pending weight.
    pub fn total_weight(&self) -> u64 {
        self.levels
            .iter()
            .map(|l| l.len() as u64 * l.weight())
            .sum()
    }

    pub fn retained(&self) -> usize {
        self.levels.iter().map(KllCompactor::len).sum()
    }

    /// Space in 64-bit words: one per retained item plus [`SAMPLER_WORDS`].
    /// Compaction counters are instrumentation and are not charged.
    pub fn space(&self) -> usize {
        self.retained() + SAMPLER_WORDS
    }

    /// Sum of the capacities of the current compactors.
    pub fn capacity_sum(&self) -> usize {
        self.levels.iter().map(KllCompactor::capacity).sum()
    }

    /// Retained `(value, weight)` pairs sorted by value.
    pub fn weighted_items(&self) -> Vec<(u64, u64)> {
        let mut out: Vec<(u64, u64)> = self
            .levels
            .iter()
            .flat_map(|l| l.items().iter().map(move |&x| (x, l.weight())))
            .collect();
        out.sort_unstable();
        out
    }

    /// Encodes the full state, generator position included, as a
    /// little-endian blob (layout in the repository README).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u32(self.k);
        w.f64(self.c);
        w.u64(self.seed);
        w.u32(self.reserved);
        w.u64(self.n);
        w.bytes(&self.rng.get_seed());
        w.u64(self.rng.get_stream());
        w.u128(self.rng.get_word_pos());
        w.u32(self.sampler.height());
        w.u8(u8::from(self.sampler.candidate().is_some()));
        w.u64(self.sampler.candidate().unwrap_or(0));
        w.u64(self.sampler.pending_weight());
        w.len_u32(self.levels.len());
        for level in &self.levels {
            w.u32(level.height());
            w.len_u32(level.capacity());
            w.len_u32(level.len());
            for &x in level.items() {
                w.u64(x);
            }
        }
        w.len_u32(self.compactions.len());
        for &m in &self.compactions {
            w.u64(m);
        }
        w.finish()
    }

    /// Decodes a blob produced by [`to_bytes`](Self::to_bytes).
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = ByteReader::new(bytes);
        let sketch = Self::decode(&mut r)?;
        r.finish()?;
        if sketch.reserved != 0 {
            return Err(Error::format(
                22,
                "blob belongs to a sketch with a linear top section",
            ));
        }
        Ok(sketch)
    }

    pub(crate) fn is_blob(bytes: &[u8]) -> bool {
        bytes.starts_with(MAGIC)
    }

    pub(crate) fn decode(r: &mut ByteReader<'_>) -> Result<Self> {
        r.expect_magic(MAGIC, VERSION)?;
        let k = r.u32()?;
        let c = r.f64()?;
        validate(k, c).map_err(|e| Error::format(5, e.to_string()))?;
        let seed = r.u64()?;
        let reserved = r.u32()?;
        let n = r.u64()?;
        let mut rng = ChaCha8Rng::from_seed(r.array::<32>()?);
        rng.set_stream(r.u64()?);
        rng.set_word_pos(r.u128()?);
        let sampler_height = r.u32()?;
        let has_candidate = r.u8()? != 0;
        let candidate = r.u64()?;
        let pending = r.u64()?;
        if sampler_height >= 63 || (pending > 0 && pending >= 1u64 << sampler_height) {
            return Err(Error::format(r.offset(), "inconsistent sampler state"));
        }
        let sampler =
            Sampler::from_parts(sampler_height, has_candidate.then_some(candidate), pending);

        let count_at = r.offset();
        let level_count = r.count(12)?;
        if level_count == 0 {
            return Err(Error::format(count_at, "sketch has no compactors"));
        }
        let mut levels = Vec::with_capacity(level_count);
        for i in 0..level_count {
            let at = r.offset();
            let height = r.u32()?;
            let capacity = r.u32()? as usize;
            let len = r.count(8)?;
            if height != sampler_height + i as u32 || height >= 63 {
                return Err(Error::format(at, "compactor heights are not contiguous"));
            }
            let items = (0..len).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
            levels.push(KllCompactor::from_parts(height, capacity, items));
        }
        let counts_len = r.count(8)?;
        let compactions = (0..counts_len)
            .map(|_| r.u64())
            .collect::<Result<Vec<_>>>()?;

        let sketch = Self {
            k,
            c,
            seed,
            reserved,
            sampler,
            levels,
            rng,
            n,
            compactions,
        };
        for level in &sketch.levels {
            if level.capacity() != sketch.capacity_at(level.height()) || level.is_full() {
                return Err(Error::format(
                    count_at,
                    format!(
                        "compactor at height {} violates its capacity",
                        level.height()
                    ),
                ));
            }
        }
        Ok(sketch)
    }
}

fn validate(k: u32, c: f64) -> Result<()> {
    if k < 4 {
        return Err(Error::InvalidParameter(format!(
            "k must be at least 4, got {k}"
        )));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "scale c must lie in (0, 1), got {c}"
        )));
    }
    Ok(())
}
