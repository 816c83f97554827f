use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use super::{EventRecord, EventStream, PairSampler};
use crate::error::{Error, Result};
use crate::observables::DelaySetting;
use crate::params::SourceParams;

/// Length of one independently seeded generation interval.
pub const SHARD_SECONDS: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SourceParams,
    pub delay: DelaySetting,
    /// Pairs/s.
    pub pair_rate: f64,
    /// Uncorrelated counts/s on each channel.
    pub background_rate: f64,
    /// Gaussian timing jitter per detection (s).
    pub jitter_sigma: f64,
    /// s
    pub duration: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            params: SourceParams::default(),
            delay: DelaySetting::derived(0, 0.0),
            pair_rate: 40e3,
            background_rate: 0.0,
            jitter_sigma: 350e-12,
            duration: 1.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.pair_rate) || !finite_nonneg(self.background_rate) {
            return Err(Error::InvalidParams("rates must be finite and non-negative".into()));
        }
        if !finite_nonneg(self.jitter_sigma) {
            return Err(Error::InvalidParams("jitter_sigma must be finite and non-negative".into()));
        }
        if !finite_nonneg(self.duration) {
            return Err(Error::InvalidParams("duration must be finite and non-negative".into()));
        }
        Ok(())
    }

    /// Expected counts per channel: each pair leaves one photon per channel
    /// on average.
    pub fn expected_counts_per_channel(&self) -> f64 {
        (self.pair_rate + self.background_rate) * self.duration
    }

    fn shard_count(&self) -> u64 {
        (self.duration / SHARD_SECONDS).ceil() as u64
    }
}

fn to_ps(t: f64) -> Result<u64> {
    let ps = (t * 1e12).round();
    if ps >= u64::MAX as f64 || !ps.is_finite() {
        return Err(Error::Overflow(t));
    }
    Ok(ps.max(0.0) as u64)
}

fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map_or(0, |d| d.sample(rng) as u64)
}

fn shard(cfg: &SimConfig, sampler: Option<&PairSampler>, index: u64) -> Result<Vec<EventRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let t0 = index as f64 * SHARD_SECONDS;
    let len = SHARD_SECONDS.min(cfg.duration - t0);
    let jitter = Normal::new(0.0, cfg.jitter_sigma).map_err(|e| Error::InvalidParams(e.to_string()))?;
    let jit = |rng: &mut ChaCha8Rng| if cfg.jitter_sigma > 0.0 { jitter.sample(rng) } else { 0.0 };
    let mut out = Vec::new();
    if let Some(s) = sampler {
        let n = poisson(cfg.pair_rate * len, &mut rng);
        out.reserve(2 * n as usize);
        for _ in 0..n {
            let t = t0 + rng.random::<f64>() * len;
            let p = s.sample(&mut rng);
            let (a, b) = (t + jit(&mut rng), t + p.tau + jit(&mut rng));
            out.push(EventRecord { channel: p.channels.0, timestamp: to_ps(a)? });
            out.push(EventRecord { channel: p.channels.1, timestamp: to_ps(b)? });
        }
    }
    for channel in 0..2u8 {
        let n = poisson(cfg.background_rate * len, &mut rng);
        for _ in 0..n {
            let t = t0 + rng.random::<f64>() * len + jit(&mut rng);
            out.push(EventRecord { channel, timestamp: to_ps(t)? });
        }
    }
    Ok(out)
}

/// Generates a sorted two-channel stream. Output depends only on the
/// configuration, not on the number of worker threads.
pub fn generate_stream(cfg: &SimConfig) -> Result<EventStream> {
    cfg.validate()?;
    let sampler = if cfg.pair_rate > 0.0 {
        Some(PairSampler::new(&cfg.delay, &cfg.params)?)
    } else {
        None
    };
    let n = cfg.shard_count();
    #[cfg(feature = "parallel")]
    let shards: Vec<Vec<EventRecord>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(|i| shard(cfg, sampler.as_ref(), i)).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let shards: Vec<Vec<EventRecord>> = (0..n).map(|i| shard(cfg, sampler.as_ref(), i)).collect::<Result<_>>()?;
    let mut stream = EventStream::new(shards.concat());
    stream.sort();
    Ok(stream)
}
