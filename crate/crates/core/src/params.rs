//! Physical constants of the cavity-enhanced pair source.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Numerical constant fixing the zero crossing of the triangular dip,
/// `2.783 / (π δν)`, for a sinc² phase-matching function of FWHM `δν`.
pub const DIP_WIDTH_CONSTANT: f64 = 2.783;

/// Relative tolerance on `t_round_physical · 2 · fsr = 1`.
///
/// The published round-trip time and FSR are rounded to three and four
/// significant figures and only agree to ~2e-4.
pub const ROUND_TRIP_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceParams {
    /// Cavity linewidth γ (Hz); sets every decay envelope.
    pub gamma_cavity: f64,
    /// Linewidth of a single frequency mode (Hz). Only used for the
    /// coherence-time report.
    pub gamma_mode: f64,
    /// Free spectral range of the effective cavity (Hz).
    pub fsr: f64,
    /// Physical round-trip time T_p (s). The effective round trip is 2·T_p.
    pub t_round_physical: f64,
    /// Central wavelength (m).
    pub lambda0: f64,
    /// FWHM of the sinc² phase-matching function (Hz).
    pub pm_bandwidth: f64,
    /// Optional single-pole spectral filter FWHM (Hz).
    pub filter_fwhm: Option<f64>,
}

impl Default for SourceParams {
    fn default() -> Self {
        Self {
            gamma_cavity: 666e3,
            gamma_mode: 429e3,
            fsr: 120.8e6,
            t_round_physical: 4.14e-9,
            lambda0: 795e-9,
            pm_bandwidth: 100e9,
            filter_fwhm: None,
        }
    }
}

impl SourceParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma_cavity", self.gamma_cavity),
            ("gamma_mode", self.gamma_mode),
            ("fsr", self.fsr),
            ("t_round_physical", self.t_round_physical),
            ("lambda0", self.lambda0),
            ("pm_bandwidth", self.pm_bandwidth),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        if let Some(f) = self.filter_fwhm {
            if !(f.is_finite() && f > 0.0) {
                return Err(Error::InvalidParams(format!("filter_fwhm must be > 0, got {f}")));
            }
        }
        if self.gamma_mode > self.gamma_cavity {
            return Err(Error::InvalidParams(format!(
                "gamma_mode ({}) exceeds gamma_cavity ({})",
                self.gamma_mode, self.gamma_cavity
            )));
        }
        let mismatch = (2.0 * self.fsr * self.t_round_physical - 1.0).abs();
        if mismatch > ROUND_TRIP_REL_TOL {
            return Err(Error::InvalidParams(format!(
                "t_round_physical {} s inconsistent with fsr {} Hz (relative mismatch {mismatch:.3e})",
                self.t_round_physical, self.fsr
            )));
        }
        Ok(())
    }

    /// Effective round trip T = 2·T_p.
    pub fn t_round(&self) -> f64 {
        2.0 * self.t_round_physical
    }

    /// Central angular frequency ω0 = 2πc/λ0.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.lambda0
    }

    /// Zero crossing 2.783/(πδν) of the triangular dip kernel. The
    /// rectangular two-photon amplitude has this as its full width.
    pub fn dip_half_width(&self) -> f64 {
        DIP_WIDTH_CONSTANT / (PI * self.pm_bandwidth)
    }

    /// Number of comb lines inside the phase-matching bandwidth.
    pub fn mode_count(&self) -> f64 {
        self.pm_bandwidth / self.fsr
    }

    /// Heralded single-photon coherence time 1/(π γ_mode).
    pub fn coherence_time(&self) -> f64 {
        1.0 / (PI * self.gamma_mode)
    }

    /// Filter amplitude decay time 1/(π·FWHM), if a filter is configured.
    pub fn filter_decay_time(&self) -> Option<f64> {
        self.filter_fwhm.map(|f| 1.0 / (PI * f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SourceParams::default().validate().unwrap();
    }

    #[test]
    fn derived_quantities() {
        let p = SourceParams::default();
        assert!((p.t_round() - 8.28e-9).abs() < 1e-21);
        assert!((p.dip_half_width() - 8.8586e-12).abs() < 1e-15);
        // ~800 modes, 740 ± 20 ns coherence time
        assert!((p.mode_count() - 827.8).abs() < 0.1);
        assert!((p.coherence_time() - 740e-9).abs() < 20e-9);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut p = SourceParams::default();
        p.gamma_cavity = 0.0;
        assert!(p.validate().is_err());

        let mut p = SourceParams::default();
        p.gamma_mode = 700e3;
        assert!(p.validate().is_err());

        let mut p = SourceParams::default();
        p.fsr = 100e6;
        assert!(p.validate().is_err());

        let mut p = SourceParams::default();
        p.filter_fwhm = Some(-1.0);
        assert!(p.validate().is_err());
    }
}
