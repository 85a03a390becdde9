use crate::codec::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::kll::{KllSketch, Promotion, DEFAULT_SCALE};
use crate::linear::{LinearCompactor, RankFunction, WeightedPoint, COMPACTION_RATIO};
use crate::scalar::Scalar;
use crate::view::RankView;

const MAGIC: &[u8; 4] = b"QLIN";
const VERSION: u8 = 1;

/// Largest supported number of replaced top heights.
pub const MAX_LINEAR_HEIGHTS: u32 = 3;

/// Construction parameters of a [`LinearSketch`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchParams {
    /// Capacity of the highest compactor.
    pub k: u32,
    /// Capacity decay per height below the top.
    pub c: f64,
    /// Number of top heights replaced by the linear compactor; 0 is plain KLL.
    pub t: u32,
    pub seed: u64,
}

impl SketchParams {
    pub fn new(k: u32, t: u32, seed: u64) -> Self {
        Self {
            k,
            c: DEFAULT_SCALE,
            t,
            seed,
        }
    }

    pub fn with_scale(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 4 {
            return Err(Error::InvalidParameter(format!(
                "k must be at least 4, got {}",
                self.k
            )));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "scale c must lie in (0, 1), got {}",
                self.c
            )));
        }
        if self.t > MAX_LINEAR_HEIGHTS {
            return Err(Error::InvalidParameter(format!(
                "t must be at most {MAX_LINEAR_HEIGHTS}, got {}",
                self.t
            )));
        }
        if (u64::from(self.t) * u64::from(self.k)) % 2 != 0 {
            return Err(Error::InvalidParameter(format!(
                "t * k must be even, got t={} k={}",
                self.t, self.k
            )));
        }
        Ok(())
    }

    /// Report identifier: `kll` for `t = 0`, otherwise `linear-t{t}`.
    pub fn algorithm_id(&self) -> String {
        if self.t == 0 {
            "kll".to_string()
        } else {
            format!("linear-t{}", self.t)
        }
    }
}

/// Record of one compaction of the linear top compactor, kept when tracing
/// is enabled.
#[derive(Debug, Clone)]
pub struct TopCompaction<F> {
    /// 1-based index among this sketch's top compactions.
    pub index: u64,
    /// Weight carried by points promoted into the top at the time.
    pub intake_weight: u64,
    /// Points delivered since the previous compaction.
    pub delivered: u64,
    pub before: RankFunction<F>,
    pub after: RankFunction<F>,
    pub sup_error: F,
}

/// Quantile sketch whose top `t` heights are one linear compactor of
/// capacity `t * k` fed by a KLL hierarchy.
///
/// With `t = 0` it is exactly [`KllSketch`]: same state, same ranks, same
/// serialized bytes.
#[derive(Debug, Clone)]
pub struct LinearSketch<F = f64> {
    params: SketchParams,
    kll: KllSketch,
    top: Option<LinearCompactor<F>>,
    delivered_since: u64,
    trace: Option<Vec<TopCompaction<F>>>,
}

impl<F: Scalar> LinearSketch<F> {
    pub fn new(params: SketchParams) -> Result<Self> {
        params.validate()?;
        let kll = KllSketch::build(params.k, params.c, params.seed, params.t)?;
        let top = if params.t == 0 {
            None
        } else {
            Some(LinearCompactor::new((params.t * params.k) as usize)?)
        };
        Ok(Self {
            params,
            kll,
            top,
            delivered_since: 0,
            trace: None,
        })
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    /// The KLL hierarchy below the linear compactor.
    pub fn kll(&self) -> &KllSketch {
        &self.kll
    }

    /// The linear top compactor; `None` when `t = 0`.
    pub fn top(&self) -> Option<&LinearCompactor<F>> {
        self.top.as_ref()
    }

    pub fn n(&self) -> u64 {
        self.kll.n()
    }

    /// Hierarchy height `H`, the linear heights included.
    pub fn height(&self) -> u32 {
        self.kll.height()
    }

    /// Weight of each point promoted into the top: `2^(H - t)`.
    pub fn intake_weight(&self) -> u64 {
        1u64 << (self.height() - self.params.t)
    }

    /// Points delivered to the top since its last compaction.
    pub fn delivered_since_compaction(&self) -> u64 {
        self.delivered_since
    }

    /// Starts recording every top compaction.
    pub fn enable_trace(&mut self) {
        self.trace.get_or_insert_with(Vec::new);
    }

    /// Recorded top compactions, oldest first.
    pub fn trace(&self) -> &[TopCompaction<F>] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn take_trace(&mut self) -> Vec<TopCompaction<F>> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn update(&mut self, x: u64) {
        let mut overflow = Vec::new();
        self.kll.insert(x, &mut overflow);
        self.absorb(&mut overflow);
    }

    fn absorb(&mut self, overflow: &mut Vec<Promotion>) {
        if self.top.is_none() {
            return;
        }
        loop {
            for batch in overflow.drain(..) {
                self.deliver(batch);
            }
            if self.top_weight() < self.growth_threshold() {
                break;
            }
            self.kll.grow(overflow);
        }
    }

    /// Merges a promoted batch into the top, compacting whenever the top is
    /// full and points remain, so the top never holds more than `t * k` points.
    fn deliver(&mut self, batch: Promotion) {
        let weight = F::from_count(batch.weight);
        let mut rest = &batch.items[..];
        while !rest.is_empty() {
            let top = self.top.as_mut().expect("linear top present");
            if top.len() == top.capacity() {
                self.compact_top();
                continue;
            }
            let top = self.top.as_mut().expect("linear top present");
            let take = rest.len().min(top.capacity() - top.len());
            let chunk: Vec<WeightedPoint<F>> = rest[..take]
                .iter()
                .map(|&x| WeightedPoint::new(x, weight))
                .collect();
            top.merge(&chunk).expect("chunk fits and is sorted");
            self.delivered_since += take as u64;
            rest = &rest[take..];
        }
    }

    fn compact_top(&mut self) {
        let intake_weight = self.intake_weight();
        let delivered = std::mem::take(&mut self.delivered_since);
        let top = self.top.as_mut().expect("linear top present");
        let before = self.trace.is_some().then(|| top.rank_function().clone());
        let outcome = top.compact(COMPACTION_RATIO).expect("supported ratio");
        if let (Some(trace), Some(before)) = (self.trace.as_mut(), before) {
            trace.push(TopCompaction {
                index: top.compaction_count(),
                intake_weight,
                delivered,
                before,
                after: top.rank_function().clone(),
                sup_error: outcome.sup_error,
            });
        }
    }

    fn top_weight(&self) -> F {
        self.top
            .as_ref()
            .map_or_else(F::zero, LinearCompactor::total_weight)
    }

    /// Weight the replaced heights would hold if every one of them were full;
    /// the hierarchy grows once the top reaches it.
    fn growth_threshold(&self) -> F {
        let base = self.height() - self.params.t;
        (base..self.height())
            .map(|h| F::from_count(self.kll.capacity_at(h) as u64 * (1u64 << h)))
            .fold(F::zero(), |a, b| a + b)
    }

    /// Estimated rank of `q`: integer KLL weights `<= q` plus the linear
    /// compactor's interpolated rank.
    pub fn rank(&self, q: u64) -> F {
        let top = self.top.as_ref().map_or_else(F::zero, |t| t.rank(q));
        F::from_count(self.kll.rank(q)) + top
    }

    /// Total weight represented by the stored points.
    pub fn total_weight(&self) -> F {
        F::from_count(self.kll.total_weight()) + self.top_weight()
    }

    /// Snapshot for answering many rank queries.
    pub fn view(&self) -> RankView<F> {
        let top = self
            .top
            .as_ref()
            .map(|t| t.rank_function().clone())
            .unwrap_or_default();
        RankView::new(&self.kll, top)
    }

    /// Smallest stored value `v` with `rank(v) >= phi * n`; the largest stored
    /// value when no stored rank reaches that.
    pub fn quantile(&self, phi: f64) -> Result<u64> {
        if !(0.0..=1.0).contains(&phi) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in [0, 1], got {phi}"
            )));
        }
        let target = F::from_f64_lossy(phi * self.n() as f64);
        self.view().quantile_at_rank(target).ok_or(Error::Empty)
    }

    /// Space in 64-bit words: the KLL space plus two words (value and weight)
    /// per linear compactor point.
    pub fn space(&self) -> usize {
        self.kll.space() + 2 * self.top.as_ref().map_or(0, LinearCompactor::len)
    }

    /// Serializes the sketch. With `t = 0` the bytes are the KLL blob.
    /// Trace records are not included.
    pub fn to_bytes(&self) -> Vec<u8> {
        let Some(top) = &self.top else {
            return self.kll.to_bytes();
        };
        let kll = self.kll.to_bytes();
        let mut w = ByteWriter::new();
        w.bytes(MAGIC);
        w.u8(VERSION);
        w.u8(std::mem::size_of::<F>() as u8);
        w.u32(self.params.t);
        w.u64(self.delivered_since);
        w.u64(kll.len() as u64);
        w.bytes(&kll);
        w.len_u32(top.capacity());
        w.u64(top.compaction_count());
        w.len_u32(top.len());
        for p in top.points() {
            w.u64(p.value);
            w.f64(p.weight.as_f64());
        }
        w.finish()
    }

    /// Decodes either blob kind produced by [`to_bytes`](Self::to_bytes).
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if KllSketch::is_blob(bytes) {
            let kll = KllSketch::from_bytes(bytes)?;
            let params = SketchParams::new(kll.k(), 0, kll.seed()).with_scale(kll.scale());
            return Ok(Self {
                params,
                kll,
                top: None,
                delivered_since: 0,
                trace: None,
            });
        }
        let mut r = ByteReader::new(bytes);
        r.expect_magic(MAGIC, VERSION)?;
        let width = r.u8()?;
        if usize::from(width) != std::mem::size_of::<F>() {
            return Err(Error::format(
                5,
                format!("blob stores {width}-byte weights"),
            ));
        }
        let t = r.u32()?;
        let delivered_since = r.u64()?;
        let kll_at = r.offset();
        let kll_len = r.u64()?;
        let kll_bytes = r.take(
            usize::try_from(kll_len).map_err(|_| Error::format(kll_at, "length overflow"))?,
        )?;
        let mut inner = ByteReader::new(kll_bytes);
        let kll = KllSketch::decode(&mut inner)
            .and_then(|k| inner.finish().map(|()| k))
            .map_err(|e| match e {
                Error::Format { offset, message } => Error::format(kll_at + 8 + offset, message),
                other => other,
            })?;
        let params = SketchParams {
            k: kll.k(),
            c: kll.scale(),
            t,
            seed: kll.seed(),
        };
        if t == 0 || kll.reserved() != t || params.validate().is_err() {
            return Err(Error::format(
                6,
                "linear height does not match the KLL section",
            ));
        }
        let cap_at = r.offset();
        let capacity = r.u32()? as usize;
        if capacity != (t * params.k) as usize {
            return Err(Error::format(cap_at, "linear compactor capacity mismatch"));
        }
        let compactions = r.u64()?;
        let len_at = r.offset();
        let len = r.count(16)?;
        if len > capacity {
            return Err(Error::format(len_at, "linear compactor over capacity"));
        }
        let mut points = Vec::with_capacity(len);
        for _ in 0..len {
            let value = r.u64()?;
            let weight = F::from_f64_lossy(r.f64()?);
            points.push(WeightedPoint::new(value, weight));
        }
        r.finish()?;
        let function =
            RankFunction::from_points(&points).map_err(|e| Error::format(len_at, e.to_string()))?;
        Ok(Self {
            params,
            kll,
            top: Some(LinearCompactor::from_parts(capacity, function, compactions)),
            delivered_since,
            trace: None,
        })
    }
}
