use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::SourceParams;

/// Default discarded squared-amplitude mass of a truncated comb.
pub const DEFAULT_TAIL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Multiple of T_p at which comb entry `m` sits.
    pub fn multiple(self, m: i64) -> i64 {
        match self {
            Parity::Even => 2 * m,
            Parity::Odd => 2 * m + 1,
        }
    }

    pub fn of_multiple(k: i64) -> Self {
        if k.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => Err(Error::InvalidArgument(format!("parity must be even or odd, got {s:?}"))),
        }
    }
}

/// Damped delta comb `F_e` or `F_o`: amplitude `e^{-πγ|k|T_p}` at delay
/// `k·T_p`, with `k = 2m` (even) or `k = 2m + 1` (odd).
#[derive(Debug, Clone)]
pub struct CombWeights {
    pub parity: Parity,
    /// `(m, amplitude)` sorted by `m`, contiguous.
    pub entries: Vec<(i64, f64)>,
    t_round_physical: f64,
}

impl CombWeights {
    pub fn t_round_physical(&self) -> f64 {
        self.t_round_physical
    }

    /// Largest `|k|` kept.
    pub fn max_multiple(&self) -> i64 {
        self.entries
            .iter()
            .map(|&(m, _)| self.parity.multiple(m).abs())
            .max()
            .unwrap_or(0)
    }

    /// Extent `max|k|·T_p` of the truncated comb.
    pub fn support(&self) -> f64 {
        self.max_multiple() as f64 * self.t_round_physical
    }

    /// Amplitude at multiple `k` of T_p, zero for the other parity or
    /// outside the truncation.
    pub fn amplitude_at(&self, k: i64) -> f64 {
        if Parity::of_multiple(k) != self.parity {
            return 0.0;
        }
        let m = (k - self.parity.multiple(0)) / 2;
        let first = self.entries[0].0;
        match usize::try_from(m - first) {
            Ok(i) if i < self.entries.len() => self.entries[i].1,
            _ => 0.0,
        }
    }

    /// `(delay, amplitude)` pairs.
    pub fn iter_delays(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.entries.iter().map(move |&(m, a)| {
            let k = self.parity.multiple(m);
            (k, k as f64 * self.t_round_physical, a)
        })
    }

    pub fn squared_mass(&self) -> f64 {
        self.entries.iter().map(|&(_, a)| a * a).sum()
    }
}

/// Truncated comb weights for the given parity.
///
/// The cut is the smallest symmetric one whose discarded squared mass is
/// below `tail_tol` of the infinite comb's.
pub fn comb_weights(parity: Parity, params: &SourceParams, tail_tol: f64) -> Result<CombWeights> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tail_tol must lie in (0, 1), got {tail_tol}")));
    }
    let tp = params.t_round_physical;
    let decay = PI * params.gamma_cavity * tp;
    // squared amplitude ratio between neighbouring entries of one comb
    let rho = (-4.0 * decay).exp();
    let discarded = |big_m: i64| -> f64 {
        match parity {
            // tail 2ρ^{M+1}/(1−ρ) over total (1+ρ)/(1−ρ)
            Parity::Even => 2.0 * rho.powi((big_m + 1) as i32) / (1.0 + rho),
            // |k| ≤ 2M+1 kept; tail r^{2M+3}·2/(1−ρ) over 2r/(1−ρ)
            Parity::Odd => rho.powi((big_m + 1) as i32),
        }
    };
    let mut big_m = 0i64;
    while discarded(big_m) >= tail_tol {
        big_m += 1;
        if big_m > 100_000_000 {
            return Err(Error::InvalidArgument("comb truncation does not terminate".into()));
        }
    }
    let lo = match parity {
        Parity::Even => -big_m,
        Parity::Odd => -big_m - 1,
    };
    let entries = (lo..=big_m)
        .map(|m| (m, (-decay * parity.multiple(m).abs() as f64).exp()))
        .collect();
    Ok(CombWeights {
        parity,
        entries,
        t_round_physical: tp,
    })
}
