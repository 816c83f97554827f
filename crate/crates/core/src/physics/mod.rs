//! Closed-form amplitude and envelope functions of the biphoton comb.
//!
//! All delays are in seconds. The dip function is normalized to
//! `f_ee(0) = 1`. The decay envelopes use the cavity linewidth
//! `gamma_cavity`; with the mode linewidth the printed revival
//! visibilities (e.g. 57.3 % after 42 effective round trips) are not
//! recovered.

mod comb;
mod kernel;
mod oracle;

use std::f64::consts::PI;

pub use comb::{comb_weights, CombWeights, Parity, DEFAULT_TAIL_TOL};
pub use kernel::{h_triangular, DipKernel, KernelShape, FILTERED_SAMPLES};
pub use oracle::{numeric_f_oracle, FKind, OracleGrid, ORACLE_CONVERGENCE_TOL};


use crate::error::Result;
use crate::params::SourceParams;

/// `e^{-x}(1 + x)`, the overlap of two damped combs shifted by `x/γπ`.
fn damping(x: f64) -> f64 {
    (-x).exp() * (1.0 + x)
}

/// Source parameters together with their dip kernel, for repeated
/// evaluation (the filtered kernel is tabulated once).
#[derive(Debug, Clone)]
pub struct DipModel {
    params: SourceParams,
    kernel: DipKernel,
}

impl DipModel {
    pub fn new(params: &SourceParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::new_unchecked(params))
    }

    pub(crate) fn new_unchecked(params: &SourceParams) -> Self {
        Self {
            params: *params,
            kernel: DipKernel::new(params),
        }
    }

    pub fn params(&self) -> &SourceParams {
        &self.params
    }

    pub fn kernel(&self) -> &DipKernel {
        &self.kernel
    }

    /// `Σ_m h(scale·(x − m·T_p))` over `m` of the given parity (or all
    /// integers when `parity` is `None`).
    fn kernel_comb(&self, x: f64, scale: f64, parity: Option<Parity>) -> f64 {
        let tp = self.params.t_round_physical;
        let centre = (x / tp).round() as i64;
        let reach = (self.kernel.half_width() / (scale * tp)).ceil() as i64 + 1;
        (centre - reach..=centre + reach)
            .filter(|&m| parity.is_none_or(|p| Parity::of_multiple(m) == p))
            .map(|m| self.kernel.eval(scale * (x - m as f64 * tp)))
            .sum()
    }

    /// Dip function `f_ee(2Δt)`, argument is `2Δt`.
    pub fn f_ee(&self, two_delta_t: f64) -> f64 {
        let dt = 0.5 * two_delta_t;
        let x = 2.0 * PI * self.params.gamma_cavity * dt.abs();
        damping(x) * self.kernel_comb(dt, 2.0, None)
    }

    /// Visibility envelope of the singles fringe at delay `Δt`.
    pub fn f_eo_envelope(&self, delta_t: f64) -> f64 {
        let x = PI * self.params.gamma_cavity * delta_t.abs();
        damping(x) * self.kernel_comb(delta_t, 1.0, Some(Parity::Odd))
    }

    /// Kernel support around a revival in Δt for the coincidence dip,
    /// `|Δt − mT_p| < dip_support`.
    pub fn dip_support(&self) -> f64 {
        0.5 * self.kernel.half_width()
    }

    /// Kernel support around an odd multiple of T_p for the singles
    /// fringe envelope.
    pub fn fringe_support(&self) -> f64 {
        self.kernel.half_width()
    }
}

/// Dip function `f_ee(2Δt)`, see [`DipModel::f_ee`].
pub fn f_ee(two_delta_t: f64, params: &SourceParams) -> f64 {
    DipModel::new_unchecked(params).f_ee(two_delta_t)
}

/// Singles fringe envelope, see [`DipModel::f_eo_envelope`].
pub fn f_eo_envelope(delta_t: f64, params: &SourceParams) -> f64 {
    DipModel::new_unchecked(params).f_eo_envelope(delta_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> SourceParams {
        SourceParams::default()
    }

    #[test]
    fn f_ee_examples() {
        let p = p();
        assert_eq!(f_ee(0.0, &p), 1.0);
        let v42 = f_ee(2.0 * 42.0 * p.t_round(), &p);
        assert!((v42 - 0.573).abs() < 5e-4, "{v42}");
        assert_eq!(f_ee(2.0 * 2.07e-9, &p), 0.0);
    }

    #[test]
    fn f_eo_examples() {
        let p = p();
        let tp = p.t_round_physical;
        assert_eq!(f_eo_envelope(0.0, &p), 0.0);
        let x = PI * 666e3 * 4.14e-9;
        let at_peak = f_eo_envelope(tp, &p);
        assert!((at_peak - (-x).exp() * (1.0 + x)).abs() < 1e-15);
        assert!((at_peak - 0.99996).abs() < 5e-6);
        let w = p.dip_half_width();
        assert!(f_eo_envelope(tp + w, &p).abs() < 1e-9);
        assert!((f_eo_envelope(tp + 4.43e-12, &p) - 0.5).abs() < 1e-3);
    }

    #[test]
    fn revivals_peak_at_multiples_of_round_trip() {
        let m = DipModel::new(&p()).unwrap();
        let tp = m.params().t_round_physical;
        let hw = m.dip_support();
        let mut prev = f64::INFINITY;
        for k in 0..=84i64 {
            let centre = k as f64 * tp;
            let peak = m.f_ee(2.0 * centre);
            for j in 1..20 {
                let off = hw * j as f64 / 20.0;
                assert!(m.f_ee(2.0 * (centre + off)) < peak);
                assert!(m.f_ee(2.0 * (centre - off)) < peak);
            }
            if k > 0 {
                assert!(peak < prev);
            }
            prev = peak;
        }
    }

    #[test]
    fn filtered_model_broadens_dip() {
        let p = SourceParams { filter_fwhm: Some(30e9), ..p() };
        let m = DipModel::new(&p).unwrap();
        assert!((m.f_ee(0.0) - 1.0).abs() < 1e-12);
        assert!(m.dip_support() > DipModel::new(&SourceParams::default()).unwrap().dip_support());
    }

    proptest! {
        #[test]
        fn f_ee_bounded_and_even(dt in -1e-6f64..1e-6) {
            let p = p();
            let v = f_ee(2.0 * dt, &p);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert_eq!(v, f_ee(-2.0 * dt, &p));
        }

        #[test]
        fn triangle_even_lipschitz(t in -2e-11f64..2e-11, d in -1e-12f64..1e-12) {
            let p = p();
            let slope = PI * p.pm_bandwidth / crate::params::DIP_WIDTH_CONSTANT;
            prop_assert_eq!(h_triangular(t, &p), h_triangular(-t, &p));
            let diff = (h_triangular(t + d, &p) - h_triangular(t, &p)).abs();
            prop_assert!(diff <= slope * d.abs() * (1.0 + 1e-9) + 1e-15);
        }

        #[test]
        fn f_eo_bounded(dt in -1e-6f64..1e-6) {
            let v = f_eo_envelope(dt, &p());
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
