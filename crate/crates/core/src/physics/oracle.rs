//! Direct numerical evaluation of the comb overlap integrals.
//!
//! The two-photon amplitude is `A = F ⊛ Φ`, a train of copies of the
//! free-running amplitude `Φ` weighted by the damped comb. The overlap
//! `∫ A(τ + s) B(τ) dτ` is summed pair by pair over comb entries, each
//! pair integral done by composite Simpson quadrature on the raw `Φ`
//! (rectangle, or rectangle convolved with a single-pole filter
//! response). Nothing here uses the triangular kernel or the
//! `e^{-x}(1+x)` envelope.

use crate::error::{Error, Result};
use crate::params::SourceParams;

use super::comb::{comb_weights, CombWeights, Parity};
use super::kernel::simpson;

/// Maximum change allowed when the quadrature step is halved.
pub const ORACLE_CONVERGENCE_TOL: f64 = 1e-6;

/// Filter decay times kept in the filtered amplitude's tail.
const FILTER_TAIL: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FKind {
    /// `f_ee(s)`, even-even overlap; `s = 2Δt`.
    Ee,
    /// `f_eo(s)`, even-odd overlap normalized by `√(f_ee(0) f_oo(0))`; `s = Δt`.
    Eo,
    /// `f_oo(s)`, odd-odd overlap.
    Oo,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleGrid {
    /// Quadrature step (s); must not exceed `1/(20 δν)`.
    pub step: f64,
    /// Comb truncation for the oracle.
    pub tail_tol: f64,
}

impl OracleGrid {
    pub fn for_params(params: &SourceParams) -> Self {
        Self {
            step: 1.0 / (20.0 * params.pm_bandwidth),
            tail_tol: 1e-12,
        }
    }
}

/// Free-running two-photon amplitude Φ(τ).
#[derive(Debug, Clone, Copy)]
enum Amplitude {
    /// Unit rectangle of the given full width centred on zero.
    Rect { width: f64 },
    /// Rectangle convolved with `e^{-t/τ}/τ θ(t)`.
    Filtered { width: f64, tau: f64 },
}

impl Amplitude {
    fn new(params: &SourceParams) -> Self {
        let width = params.dip_half_width();
        match params.filter_decay_time() {
            None => Amplitude::Rect { width },
            Some(tau) => Amplitude::Filtered { width, tau },
        }
    }

    fn eval(&self, t: f64) -> f64 {
        match *self {
            Amplitude::Rect { width } => {
                if t.abs() <= 0.5 * width {
                    1.0
                } else {
                    0.0
                }
            }
            Amplitude::Filtered { width, tau } => {
                let a = -0.5 * width;
                let b = 0.5 * width;
                if t < a {
                    0.0
                } else if t <= b {
                    1.0 - (-(t - a) / tau).exp()
                } else {
                    ((width / tau).exp_m1()) * (-(t - a) / tau).exp()
                }
            }
        }
    }

    fn extent(&self) -> (f64, f64) {
        match *self {
            Amplitude::Rect { width } => (-0.5 * width, 0.5 * width),
            Amplitude::Filtered { width, tau } => (-0.5 * width, 0.5 * width + FILTER_TAIL * tau),
        }
    }

    fn kinks(&self) -> [f64; 2] {
        match *self {
            Amplitude::Rect { width } | Amplitude::Filtered { width, .. } => [-0.5 * width, 0.5 * width],
        }
    }

    /// `∫ Φ(x + r) Φ(x) dx` by piecewise Simpson with panel width ≤ `step`
    /// (and ≤ τ/64 for the filtered amplitude).
    fn overlap(&self, r: f64, step: f64) -> f64 {
        let step = match *self {
            Amplitude::Rect { .. } => step,
            Amplitude::Filtered { tau, .. } => step.min(tau / 64.0),
        };
        let (lo, hi) = self.extent();
        let a = lo.max(lo - r);
        let b = hi.min(hi - r);
        if b <= a {
            return 0.0;
        }
        let mut cuts = vec![a, b];
        for k in self.kinks() {
            for c in [k, k - r] {
                if c > a && c < b {
                    cuts.push(c);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.windows(2)
            .map(|c| {
                let n = ((c[1] - c[0]) / step).ceil() as usize;
                simpson(|x| self.eval(x + r) * self.eval(x), c[0], c[1], n)
            })
            .sum()
    }
}

/// `∫ A(τ + s) B(τ) dτ` for two truncated combs sharing the amplitude Φ.
fn comb_overlap(a: &CombWeights, b: &CombWeights, phi: &Amplitude, s: f64, step: f64) -> f64 {
    let tp = a.t_round_physical();
    let (lo, hi) = phi.extent();
    let reach = ((hi - lo) / tp).ceil() as i64 + 1;
    let mut acc = 0.0;
    for (_, pa, ca) in a.iter_delays() {
        // A(τ+s) has copy ka at τ = pa − s; pairs with B copies nearby.
        let target = ((pa - s) / tp).round() as i64;
        for kb in target - reach..=target + reach {
            let cb = b.amplitude_at(kb);
            if cb == 0.0 {
                continue;
            }
            let r = s - pa + kb as f64 * tp;
            if r.abs() >= hi - lo {
                continue;
            }
            acc += ca * cb * phi.overlap(r, step);
        }
    }
    acc
}

fn evaluate(kind: FKind, shift: f64, params: &SourceParams, grid: &OracleGrid, step: f64) -> Result<f64> {
    let phi = Amplitude::new(params);
    let even = comb_weights(Parity::Even, params, grid.tail_tol)?;
    let odd = comb_weights(Parity::Odd, params, grid.tail_tol)?;
    let v = match kind {
        FKind::Ee => comb_overlap(&even, &even, &phi, shift, step) / comb_overlap(&even, &even, &phi, 0.0, step),
        FKind::Oo => comb_overlap(&odd, &odd, &phi, shift, step) / comb_overlap(&odd, &odd, &phi, 0.0, step),
        FKind::Eo => {
            let norm = (comb_overlap(&even, &even, &phi, 0.0, step) * comb_overlap(&odd, &odd, &phi, 0.0, step)).sqrt();
            comb_overlap(&even, &odd, &phi, shift, step) / norm
        }
    };
    Ok(v)
}

/// Normalized overlap integral of the requested kind at `shift`.
///
/// Evaluated at `grid.step` and at half that step; if the two differ by
/// more than [`ORACLE_CONVERGENCE_TOL`] a [`Error::NonConvergence`] is
/// returned.
pub fn numeric_f_oracle(kind: FKind, shift: f64, params: &SourceParams, grid: &OracleGrid) -> Result<f64> {
    params.validate()?;
    let max_step = 1.0 / (20.0 * params.pm_bandwidth);
    if !(grid.step > 0.0 && grid.step <= max_step * (1.0 + 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "oracle step {:e} s must be in (0, {max_step:e}]",
            grid.step
        )));
    }
    let coarse = evaluate(kind, shift, params, grid, grid.step)?;
    let fine = evaluate(kind, shift, params, grid, 0.5 * grid.step)?;
    let diff = (coarse - fine).abs();
    if diff > ORACLE_CONVERGENCE_TOL {
        return Err(Error::NonConvergence {
            step: grid.step,
            coarse,
            fine,
            diff,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{f_ee, f_eo_envelope};

    #[test]
    fn normalized_at_zero() {
        let p = SourceParams::default();
        let g = OracleGrid::for_params(&p);
        assert!((numeric_f_oracle(FKind::Ee, 0.0, &p, &g).unwrap() - 1.0).abs() < 1e-12);
        assert!((numeric_f_oracle(FKind::Oo, 0.0, &p, &g).unwrap() - 1.0).abs() < 1e-12);
        assert!(numeric_f_oracle(FKind::Eo, 0.0, &p, &g).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rect_overlap_is_triangle() {
        let p = SourceParams::default();
        let phi = Amplitude::new(&p);
        let w = p.dip_half_width();
        let step = 1.0 / (20.0 * p.pm_bandwidth);
        assert!((phi.overlap(0.0, step) - w).abs() < 1e-24);
        assert!((phi.overlap(0.25 * w, step) - 0.75 * w).abs() < 1e-22);
        assert_eq!(phi.overlap(1.01 * w, step), 0.0);
    }

    #[test]
    fn matches_closed_form_at_42_round_trips() {
        let p = SourceParams::default();
        let g = OracleGrid::for_params(&p);
        let s = 2.0 * 42.0 * p.t_round();
        let num = numeric_f_oracle(FKind::Ee, s, &p, &g).unwrap();
        assert!((num - f_ee(s, &p)).abs() < 1e-4);
        assert!((num - 0.573).abs() < 1e-3);
    }

    #[test]
    fn eo_matches_envelope_on_odd_peak() {
        let p = SourceParams::default();
        let g = OracleGrid::for_params(&p);
        for dt in [p.t_round_physical, p.t_round_physical + 3e-12, 41.0 * p.t_round_physical] {
            let num = numeric_f_oracle(FKind::Eo, dt, &p, &g).unwrap();
            assert!((num - f_eo_envelope(dt, &p)).abs() < 1e-4, "{dt}: {num}");
        }
    }

    #[test]
    fn rejects_coarse_grid() {
        let p = SourceParams::default();
        let g = OracleGrid { step: 1e-12, tail_tol: 1e-12 };
        assert!(matches!(numeric_f_oracle(FKind::Ee, 0.0, &p, &g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn filtered_oracle_matches_filtered_kernel() {
        let p = SourceParams { filter_fwhm: Some(40e9), ..Default::default() };
        let g = OracleGrid::for_params(&p);
        for off in [0.0, 2e-12, 5e-12, 9e-12] {
            let s = 2.0 * (p.t_round() + off);
            let num = numeric_f_oracle(FKind::Ee, s, &p, &g).unwrap();
            assert!((num - f_ee(s, &p)).abs() < 1e-4, "{off}: {num} vs {}", f_ee(s, &p));
        }
    }
}
