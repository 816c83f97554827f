//! Pair sampling after the beam splitter.
//!
//! The even comb's two-photon amplitude `A_e = F_e ⊛ Φ` is a train of
//! rectangles. For a delay Δt of the V photon, a pair leaves in opposite
//! ports with detection-time difference τ at density
//! `|A_e(τ+Δt) − A_e(−τ+Δt)|²` and in one port at `|A_e(τ+Δt) + A_e(−τ+Δt)|²`.
//! Both are piecewise constant, so τ is drawn exactly by inverse CDF over
//! the constant pieces. The odd (NOON) comb keeps its time structure and
//! is routed by the optical phase only.

use rand::Rng;

use crate::error::{Error, Result};
use crate::observables::DelaySetting;
use crate::params::SourceParams;
use crate::physics::{comb_weights, CombWeights, Parity, DEFAULT_TAIL_TOL};
use crate::postprocess::CoincidenceHistogram;

/// Piece of a piecewise-constant density on τ (s).
#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    density: f64,
}

/// Inverse-CDF sampler over constant pieces.
#[derive(Debug, Clone, Default)]
struct PieceTable {
    pieces: Vec<Piece>,
    cumulative: Vec<f64>,
}

impl PieceTable {
    fn push(&mut self, lo: f64, hi: f64, density: f64) {
        if hi > lo && density > 0.0 {
            let mass = density * (hi - lo);
            let total = self.total();
            self.pieces.push(Piece { lo, hi, density });
            self.cumulative.push(total + mass);
        }
    }

    fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = rng.random::<f64>() * self.total();
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.pieces.len() - 1);
        let p = self.pieces[i];
        p.lo + rng.random::<f64>() * (p.hi - p.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledPair {
    pub comb: Parity,
    /// Channels of the first and second photon.
    pub channels: (u8, u8),
    /// Second photon's detection time minus the first's (s).
    pub tau: f64,
}

impl SampledPair {
    pub fn is_coincidence(&self) -> bool {
        self.channels.0 != self.channels.1
    }
}

/// Precomputed densities for one delay setting.
#[derive(Debug, Clone)]
pub struct PairSampler {
    opposite: PieceTable,
    same: PieceTable,
    odd: PieceTable,
    /// Opposite-port fraction of even-comb pairs, `(1 − f)/2`.
    even_opposite: f64,
    /// Opposite-port fraction of odd-comb pairs, `sin²φ`.
    odd_opposite: f64,
}

impl PairSampler {
    pub fn new(delay: &DelaySetting, params: &SourceParams) -> Result<Self> {
        Self::with_tail_tol(delay, params, DEFAULT_TAIL_TOL)
    }

    pub fn with_tail_tol(delay: &DelaySetting, params: &SourceParams, tail_tol: f64) -> Result<Self> {
        params.validate()?;
        if params.filter_fwhm.is_some() {
            return Err(Error::InvalidArgument(
                "the pair sampler supports only the unfiltered rectangular amplitude".into(),
            ));
        }
        let even = comb_weights(Parity::Even, params, tail_tol)?;
        let odd = comb_weights(Parity::Odd, params, tail_tol)?;
        let dt = delay.total_delay(params);
        if dt.abs() > even.support() {
            return Err(Error::DelayOutsideComb {
                delay: dt,
                support: even.support(),
            });
        }
        let width = params.dip_half_width();
        let (opposite, same) = even_tables(&even, dt, width);
        let mut odd_table = PieceTable::default();
        for (_, centre, a) in odd.iter_delays() {
            odd_table.push(centre - 0.5 * width, centre + 0.5 * width, a * a);
        }
        let even_opposite = opposite.total() / (opposite.total() + same.total());
        Ok(Self {
            opposite,
            same,
            odd: odd_table,
            even_opposite,
            odd_opposite: delay.phase(params).sin().powi(2),
        })
    }

    /// Opposite-port fraction of even-comb pairs.
    pub fn even_opposite_fraction(&self) -> f64 {
        self.even_opposite
    }

    pub fn odd_opposite_fraction(&self) -> f64 {
        self.odd_opposite
    }

    /// Expected opposite-port fraction over all pairs.
    pub fn coincidence_fraction(&self) -> f64 {
        0.5 * self.even_opposite + 0.5 * self.odd_opposite
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SampledPair {
        if rng.random::<bool>() {
            if rng.random::<f64>() < self.even_opposite {
                SampledPair {
                    comb: Parity::Even,
                    channels: (0, 1),
                    tau: self.opposite.sample(rng),
                }
            } else {
                let c = u8::from(rng.random::<bool>());
                SampledPair {
                    comb: Parity::Even,
                    channels: (c, c),
                    tau: self.same.sample(rng),
                }
            }
        } else {
            let tau = self.odd.sample(rng);
            let channels = if rng.random::<f64>() < self.odd_opposite {
                (0, 1)
            } else {
                let c = u8::from(rng.random::<bool>());
                (c, c)
            };
            SampledPair {
                comb: Parity::Odd,
                channels,
                tau,
            }
        }
    }

    /// Expected channel-1 minus channel-0 histogram for `n_pairs` pairs,
    /// rounded to whole counts (no background).
    pub fn expected_histogram(&self, n_pairs: f64, bin_width_ps: u64, span_ps: u64) -> Result<CoincidenceHistogram> {
        let mut h = CoincidenceHistogram::empty(bin_width_ps, span_ps)?;
        let mut acc = vec![0.0f64; h.counts.len()];
        let even_scale = 0.5 * self.even_opposite * n_pairs / self.opposite.total();
        let odd_scale = 0.5 * self.odd_opposite * n_pairs / self.odd.total();
        for (table, scale) in [(&self.opposite, even_scale), (&self.odd, odd_scale)] {
            if scale.is_nan() || scale <= 0.0 {
                continue;
            }
            for p in &table.pieces {
                deposit(&h, &mut acc, p, scale);
            }
        }
        for (c, a) in h.counts.iter_mut().zip(acc) {
            *c = a.round() as u64;
        }
        Ok(h)
    }
}

/// Spreads one piece's mass over the integer-picosecond bins it covers.
fn deposit(h: &CoincidenceHistogram, acc: &mut [f64], p: &Piece, scale: f64) {
    let span = h.span_ps as f64;
    let lo = (p.lo * 1e12).max(-span - 0.5);
    let hi = (p.hi * 1e12).min(span + 0.5);
    if hi <= lo {
        return;
    }
    let w = h.bin_width_ps as f64;
    let half = (h.bin_width_ps / 2) as f64;
    // bin k holds integer δt in [k·w − half, k·w − half + w); on the
    // continuum, δt rounds to the nearest integer first.
    let edge = |k: i64| k as f64 * w - half - 0.5;
    let k_lo = ((lo + half + 0.5) / w).floor() as i64;
    let k_hi = ((hi + half + 0.5) / w).floor() as i64;
    for k in k_lo..=k_hi {
        if k.abs() > h.half_bins {
            continue;
        }
        let a = lo.max(edge(k));
        let b = hi.min(edge(k + 1));
        if b > a {
            acc[(k + h.half_bins) as usize] += p.density * (b - a) * 1e-12 * scale;
        }
    }
}

/// Opposite- and same-port τ densities of the even comb at delay `dt`.
fn even_tables(even: &CombWeights, dt: f64, width: f64) -> (PieceTable, PieceTable) {
    let tp = even.t_round_physical();
    // comb 1: copy m at τ = 2m·T_p − Δt; comb 2: copy m' at 2m'·T_p + Δt.
    // Copy m of comb 1 meets copy m − k of comb 2, offset r.
    let k = (dt / tp).round() as i64;
    let r = 2.0 * dt - 2.0 * k as f64 * tp;
    let big_m = even.entries.last().map_or(0, |e| e.0);
    let (m_lo, m_hi) = ((-big_m).min(k - big_m), big_m.max(k + big_m));
    let mut opposite = PieceTable::default();
    let mut same = PieceTable::default();
    for m in m_lo..=m_hi {
        let a = even.amplitude_at(2 * m);
        let b = even.amplitude_at(2 * (m - k));
        if a == 0.0 && b == 0.0 {
            continue;
        }
        let c1 = 2.0 * m as f64 * tp - dt;
        let (lo1, hi1) = (c1 - 0.5 * width, c1 + 0.5 * width);
        let (lo2, hi2) = (lo1 + r, hi1 + r);
        let (ilo, ihi) = (lo1.max(lo2), hi1.min(hi2));
        for (table, sign) in [(&mut opposite, -1.0), (&mut same, 1.0)] {
            if ihi > ilo {
                table.push(lo1, ilo, a * a);
                table.push(ihi, hi1, a * a);
                table.push(lo2, ilo, b * b);
                table.push(ihi, hi2, b * b);
                table.push(ilo, ihi, (a + sign * b).powi(2));
            } else {
                table.push(lo1, hi1, a * a);
                table.push(lo2, hi2, b * b);
            }
        }
    }
    (opposite, same)
}

/// Draws one pair; builds the sampler on every call, so prefer
/// [`PairSampler`] for repeated draws.
pub fn sample_pair<R: Rng + ?Sized>(delay: &DelaySetting, params: &SourceParams, rng: &mut R) -> Result<SampledPair> {
    Ok(PairSampler::new(delay, params)?.sample(rng))
}
