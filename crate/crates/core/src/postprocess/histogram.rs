use crate::error::{Error, Result};
use crate::montecarlo::EventStream;

/// Default half-span of start–stop pairing, ±500 ns.
pub const DEFAULT_SPAN_PS: u64 = 500_000;

/// Default bin width: ten bins per 1.07 ns window.
pub const DEFAULT_BIN_PS: u64 = 107;

/// Counts of channel-1 minus channel-0 detection-time differences δt.
///
/// Bin `k` (index `k + half_bins`) is centred at `k·bin_width_ps` and
/// holds integer δt in `[k·w − ⌊w/2⌋, k·w − ⌊w/2⌋ + w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceHistogram {
    pub bin_width_ps: u64,
    pub half_bins: i64,
    pub span_ps: u64,
    pub counts: Vec<u64>,
    /// Singles per channel of the source stream.
    pub singles: [u64; 2],
}

impl CoincidenceHistogram {
    pub fn empty(bin_width_ps: u64, span_ps: u64) -> Result<Self> {
        if bin_width_ps == 0 {
            return Err(Error::InvalidArgument("bin width must be positive".into()));
        }
        if span_ps == 0 {
            return Err(Error::InvalidArgument("histogram span must be positive".into()));
        }
        let half_bins = span_ps.div_ceil(bin_width_ps) as i64;
        Ok(Self {
            bin_width_ps,
            half_bins,
            span_ps,
            counts: vec![0; (2 * half_bins + 1) as usize],
            singles: [0, 0],
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_width_ps as f64 * 1e-12
    }

    /// Lower edge of the first bin (s).
    pub fn origin(&self) -> f64 {
        self.lower_edge_ps(-self.half_bins) as f64 * 1e-12
    }

    fn lower_edge_ps(&self, k: i64) -> i64 {
        k * self.bin_width_ps as i64 - (self.bin_width_ps / 2) as i64
    }

    /// Bin number `k` containing `dt_ps`, if inside the histogram.
    pub fn bin_of(&self, dt_ps: i64) -> Option<i64> {
        let w = self.bin_width_ps as i64;
        let k = (dt_ps + w / 2).div_euclid(w);
        (k.abs() <= self.half_bins).then_some(k)
    }

    pub fn bin_centre_ps(&self, k: i64) -> i64 {
        k * self.bin_width_ps as i64
    }

    pub fn count(&self, k: i64) -> u64 {
        self.counts[(k + self.half_bins) as usize]
    }

    /// Bin range as (number, count) pairs.
    pub fn bins(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().enumerate().map(move |(i, &c)| (i as i64 - self.half_bins, c))
    }

    pub fn add(&mut self, dt_ps: i64, n: u64) {
        if dt_ps.unsigned_abs() > self.span_ps {
            return;
        }
        if let Some(k) = self.bin_of(dt_ps) {
            self.counts[(k + self.half_bins) as usize] += n;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Bin-wise sum of a histogram over another time shard.
    pub fn merge(&mut self, other: &CoincidenceHistogram) -> Result<()> {
        if other.bin_width_ps != self.bin_width_ps || other.span_ps != self.span_ps {
            return Err(Error::InvalidArgument("cannot merge histograms with different binning".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.singles[0] += other.singles[0];
        self.singles[1] += other.singles[1];
        Ok(())
    }
}

/// Start–stop histogram over ±500 ns; see [`histogram_with_span`].
pub fn histogram(events: &EventStream, bin_width_ps: u64) -> Result<CoincidenceHistogram> {
    histogram_with_span(events, bin_width_ps, DEFAULT_SPAN_PS)
}

/// Every channel-0 record is paired with every channel-1 record within
/// `±span_ps`, accumulating `δt = t₁ − t₀`.
pub fn histogram_with_span(events: &EventStream, bin_width_ps: u64, span_ps: u64) -> Result<CoincidenceHistogram> {
    events.check_sorted()?;
    let mut h = CoincidenceHistogram::empty(bin_width_ps, span_ps)?;
    let (starts, stops): (Vec<u64>, Vec<u64>) = {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for r in &events.records {
            if r.channel == 0 {
                a.push(r.timestamp);
            } else {
                b.push(r.timestamp);
            }
        }
        (a, b)
    };
    h.singles = [starts.len() as u64, stops.len() as u64];
    let span = span_ps as i64;
    let mut first = 0usize;
    for &t0 in &starts {
        let t0 = t0 as i64;
        while first < stops.len() && (stops[first] as i64) < t0 - span {
            first += 1;
        }
        for &t1 in &stops[first..] {
            let dt = t1 as i64 - t0;
            if dt > span {
                break;
            }
            h.add(dt, 1);
        }
    }
    Ok(h)
}
