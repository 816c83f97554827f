//! Measurable curves: integrated coincidence probability, singles rates
//! and visibilities, plus the three-stage delay line.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::params::{SourceParams, SPEED_OF_LIGHT};
use crate::physics::DipModel;

/// Points with `f_ee` below this count as baseline for visibilities.
pub const BASELINE_F_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseMode {
    /// φ = ω0·Δt + fine phase.
    DerivedFromDelay,
    /// φ held at the stored fine phase.
    Locked,
}

/// Delay of the V photon in front of the beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySetting {
    /// Fibre delay in units of the physical round trip T_p.
    pub coarse_half_roundtrips: i64,
    /// Translation-stage delay (s).
    pub intermediate: f64,
    /// Piezo phase (rad); the full phase when locked.
    pub fine_phase: f64,
    pub phase_mode: PhaseMode,
}

impl DelaySetting {
    pub fn locked(coarse_half_roundtrips: i64, intermediate: f64, phase: f64) -> Self {
        Self {
            coarse_half_roundtrips,
            intermediate,
            fine_phase: phase,
            phase_mode: PhaseMode::Locked,
        }
    }

    pub fn derived(coarse_half_roundtrips: i64, intermediate: f64) -> Self {
        Self {
            coarse_half_roundtrips,
            intermediate,
            fine_phase: 0.0,
            phase_mode: PhaseMode::DerivedFromDelay,
        }
    }

    /// Holds the phase currently implied by this setting.
    pub fn lock_phase(self, params: &SourceParams) -> Self {
        Self {
            fine_phase: self.phase(params),
            phase_mode: PhaseMode::Locked,
            ..self
        }
    }

    /// Envelope delay Δt = coarse·T_p + intermediate.
    pub fn total_delay(&self, params: &SourceParams) -> f64 {
        self.coarse_half_roundtrips as f64 * params.t_round_physical + self.intermediate
    }

    /// Coarse delay in effective round trips T.
    pub fn coarse_round_trips(&self) -> f64 {
        0.5 * self.coarse_half_roundtrips as f64
    }

    /// Optical phase φ in [0, 2π).
    pub fn phase(&self, params: &SourceParams) -> f64 {
        match self.phase_mode {
            PhaseMode::Locked => self.fine_phase.rem_euclid(TAU),
            PhaseMode::DerivedFromDelay => {
                // ω0·Δt is ~10⁷ rad at one round trip; reduce the two
                // parts separately to keep the fraction accurate.
                let w = params.omega0();
                let coarse = (w * self.coarse_half_roundtrips as f64 * params.t_round_physical).rem_euclid(TAU);
                (coarse + w * self.intermediate + self.fine_phase).rem_euclid(TAU)
            }
        }
    }

    /// Equivalent free-space path difference c·Δt (m).
    pub fn path_difference(&self, params: &SourceParams) -> f64 {
        SPEED_OF_LIGHT * self.total_delay(params)
    }
}

/// Delay from the three actuators: `coarse` fibre lengths of T_p, a
/// double-pass translation stage and a double-pass piezo mirror.
pub fn compose_delay(coarse: i64, stage_position: f64, piezo_position: f64, params: &SourceParams) -> DelaySetting {
    DelaySetting {
        coarse_half_roundtrips: coarse,
        intermediate: 2.0 * stage_position / SPEED_OF_LIGHT,
        fine_phase: params.omega0() * 2.0 * piezo_position / SPEED_OF_LIGHT,
        phase_mode: PhaseMode::DerivedFromDelay,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Detector {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Coincidence,
    SinglesDet1,
    SinglesDet2,
    PostselectedCoincidence,
}

#[derive(Debug, Clone)]
pub struct TraceResult {
    pub delays: Vec<DelaySetting>,
    pub values: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub kind: TraceKind,
}

impl TraceResult {
    pub fn new(kind: TraceKind) -> Self {
        Self {
            delays: Vec::new(),
            values: Vec::new(),
            sigmas: Vec::new(),
            kind,
        }
    }

    pub fn push(&mut self, delay: DelaySetting, value: f64, sigma: f64) {
        self.delays.push(delay);
        self.values.push(value);
        self.sigmas.push(sigma);
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// NOON-state term ½ sin²φ of the coincidence probability.
pub fn noon_term(phase: f64) -> f64 {
    0.5 * phase.sin().powi(2)
}

impl DipModel {
    pub fn coincidence_probability(&self, d: &DelaySetting) -> f64 {
        let p = self.params();
        0.25 * (1.0 - self.f_ee(2.0 * d.total_delay(p))) + noon_term(d.phase(p))
    }

    pub fn postselected_coincidence(&self, d: &DelaySetting) -> f64 {
        0.5 * (1.0 - self.f_ee(2.0 * d.total_delay(self.params())))
    }

    pub fn singles_rate(&self, detector: Detector, d: &DelaySetting) -> f64 {
        let p = self.params();
        let fringe = d.phase(p).cos() * self.f_eo_envelope(d.total_delay(p));
        match detector {
            Detector::One => 1.0 + fringe,
            Detector::Two => 1.0 - fringe,
        }
    }

    /// Evaluates one observable over a list of delays (σ = 0).
    pub fn trace(&self, kind: TraceKind, delays: &[DelaySetting]) -> TraceResult {
        let mut out = TraceResult::new(kind);
        for d in delays {
            let v = match kind {
                TraceKind::Coincidence => self.coincidence_probability(d),
                TraceKind::PostselectedCoincidence => self.postselected_coincidence(d),
                TraceKind::SinglesDet1 => self.singles_rate(Detector::One, d),
                TraceKind::SinglesDet2 => self.singles_rate(Detector::Two, d),
            };
            out.push(*d, v, 0.0);
        }
        out
    }
}

/// Integrated coincidence probability `¼(1 − f_ee(2Δt)) + ½ sin²φ`.
pub fn coincidence_probability(d: &DelaySetting, params: &SourceParams) -> f64 {
    DipModel::new_unchecked(params).coincidence_probability(d)
}

/// Even-comb coincidence signal after peak filtering, rescaled to 0.5
/// away from any revival: `(1 − f_ee(2Δt))/2`.
pub fn postselected_coincidence(d: &DelaySetting, params: &SourceParams) -> f64 {
    DipModel::new_unchecked(params).postselected_coincidence(d)
}

/// Normalized singles rate `1 ± cos φ · f_eo(Δt)`; detector 1 takes `+`.
pub fn singles_rate(detector: Detector, d: &DelaySetting, params: &SourceParams) -> f64 {
    DipModel::new_unchecked(params).singles_rate(detector, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Visibility {
    pub value: f64,
    pub sigma: f64,
}

/// Dip visibility `(P_max − P_min)/P_max` of a coincidence trace.
///
/// `P_max` is the mean over points where the dip kernel vanishes
/// (`f_ee < 1e-6`); `P_min` is the smallest value in the trace.
pub fn hom_visibility(trace: &TraceResult, params: &SourceParams) -> Result<Visibility> {
    if trace.is_empty() {
        return Err(Error::NoBaseline("empty trace".into()));
    }
    let model = DipModel::new_unchecked(params);
    let baseline: Vec<usize> = (0..trace.len())
        .filter(|&i| model.f_ee(2.0 * trace.delays[i].total_delay(params)) < BASELINE_F_THRESHOLD)
        .collect();
    if baseline.is_empty() {
        return Err(Error::NoBaseline("no trace point lies outside the dip kernel".into()));
    }
    let n = baseline.len() as f64;
    let p_max = baseline.iter().map(|&i| trace.values[i]).sum::<f64>() / n;
    let sigma_max = baseline.iter().map(|&i| trace.sigmas[i].powi(2)).sum::<f64>().sqrt() / n;
    let (i_min, p_min) = trace
        .values
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if p_max <= 0.0 {
        return Err(Error::NoBaseline(format!("baseline level {p_max} is not positive")));
    }
    let sigma_min = trace.sigmas[i_min];
    let value = (p_max - p_min) / p_max;
    let sigma = ((sigma_min / p_max).powi(2) + (p_min * sigma_max / (p_max * p_max)).powi(2)).sqrt();
    Ok(Visibility { value, sigma })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisibilityRow {
    /// Delay in effective round trips T.
    pub delay_rt: f64,
    /// Theoretical visibility `f_ee(2Δt)` (fraction, not percent).
    pub v_theory: f64,
}

/// Theoretical dip visibility at each delay given in units of T.
pub fn visibility_table(delays_rt: &[f64], params: &SourceParams) -> Vec<VisibilityRow> {
    let model = DipModel::new_unchecked(params);
    delays_rt
        .iter()
        .map(|&rt| VisibilityRow {
            delay_rt: rt,
            v_theory: model.f_ee(2.0 * rt * params.t_round()),
        })
        .collect()
}

/// Delays of the published visibility table, in units of T.
pub const PAPER_TABLE_DELAYS_RT: [f64; 7] = [0.0, 0.5, 1.0, 2.0, 4.0, 40.0, 42.0];

/// Parses a delay in round trips: `"42"`, `"0.5"` or `"1/2"`.
pub fn parse_round_trips(s: &str) -> Result<f64> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("cannot parse round-trip delay {s:?}"));
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| bad())?;
            let d: f64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0.0 {
                return Err(bad());
            }
            n / d
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

/// Phase that makes the NOON term vanish (0) or maximal (π/2).
pub const NOON_BRIGHT_PHASE: f64 = 0.5 * PI;
