use crate::error::{Error, Result};

use super::histogram::CoincidenceHistogram;
use super::selection::{select_peaks, PeakSelection, PeakSum};

/// Minimum number of baseline delay positions for the 0.5 calibration.
pub const MIN_BASELINE_POINTS: usize = 3;

/// One reduced coincidence point, rescaled so the baseline is 0.5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedPoint {
    pub p: f64,
    pub sigma: f64,
    /// Background-corrected counts came out negative and `p` was set to 0.
    pub clamped: bool,
}

/// `p = ½(C − accidentals)/baseline`, `σ = ½√C/baseline`.
pub fn normalize_point(coincidences: u64, accidentals: f64, baseline_calib: f64) -> Result<ReducedPoint> {
    if !(baseline_calib > 0.0 && baseline_calib.is_finite()) {
        return Err(Error::InvalidArgument(format!("baseline calibration must be > 0, got {baseline_calib}")));
    }
    let corrected = coincidences as f64 - accidentals;
    let clamped = corrected < 0.0;
    Ok(ReducedPoint {
        p: 0.5 * corrected.max(0.0) / baseline_calib,
        sigma: 0.5 * (coincidences as f64).sqrt() / baseline_calib,
        clamped,
    })
}

/// Mean background-corrected window count over baseline delays.
pub fn baseline_calibration(points: &[PeakSum]) -> Result<f64> {
    if points.len() < MIN_BASELINE_POINTS {
        return Err(Error::NoBaseline(format!(
            "{} baseline points given, at least {MIN_BASELINE_POINTS} required",
            points.len()
        )));
    }
    let mean = points.iter().map(PeakSum::corrected).sum::<f64>() / points.len() as f64;
    if mean <= 0.0 {
        return Err(Error::NoBaseline(format!("baseline counts average to {mean}")));
    }
    Ok(mean)
}

/// Expected HH/VV (NOON) coincidences at a locked phase, in units of the
/// even-comb baseline: the NOON share ½sin²φ against the even share ¼.
pub fn predicted_same_pol_counts(baseline_calib: f64, locked_phase: f64) -> f64 {
    2.0 * locked_phase.sin().powi(2) * baseline_calib
}

/// Baseline calibration for half-round-trip datasets, where the odd
/// windows also hold the NOON pairs.
pub fn half_roundtrip_baseline(points: &[PeakSum], locked_phase: f64) -> Result<f64> {
    let raw = baseline_calibration(points)?;
    Ok(raw / (1.0 + 2.0 * locked_phase.sin().powi(2)))
}

/// Half-round-trip reduction: odd-parity windows, minus the predicted
/// HH/VV contribution, rescaled to 0.5.
pub fn half_roundtrip_reduce(
    h: &CoincidenceHistogram,
    sel: &PeakSelection,
    predicted_same_pol: f64,
    baseline_calib: f64,
) -> Result<ReducedPoint> {
    let sum = select_peaks(h, sel)?;
    normalize_point(sum.coincidences, sum.accidentals + predicted_same_pol, baseline_calib)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SourceParams;
    use crate::physics::Parity;
    use crate::postprocess::histogram::{DEFAULT_BIN_PS, DEFAULT_SPAN_PS};
    use proptest::prelude::*;

    #[test]
    fn normalize_examples() {
        let r = normalize_point(40_000, 0.0, 40_000.0).unwrap();
        assert_eq!(r.p, 0.5);
        assert!((r.sigma - 2.5e-3).abs() < 1e-15);
        let r = normalize_point(0, 0.0, 100.0).unwrap();
        assert_eq!((r.p, r.sigma, r.clamped), (0.0, 0.0, false));
        assert!(normalize_point(10, 0.0, 0.0).is_err());
    }

    #[test]
    fn negative_counts_clamp() {
        let r = normalize_point(5, 9.0, 100.0).unwrap();
        assert!(r.clamped);
        assert_eq!(r.p, 0.0);
        assert!(r.sigma > 0.0);
    }

    #[test]
    fn baseline_needs_three_points() {
        let s = PeakSum { coincidences: 100, accidentals: 10.0, windows: 121 };
        assert!(baseline_calibration(&[s, s]).is_err());
        assert_eq!(baseline_calibration(&[s, s, s]).unwrap(), 90.0);
        let zero = PeakSum { coincidences: 0, accidentals: 0.0, windows: 121 };
        assert!(baseline_calibration(&[zero; 3]).is_err());
    }

    #[test]
    fn half_roundtrip_without_noon_matches_normalize() {
        let p = SourceParams::default();
        let sel = PeakSelection::new(Parity::Odd, &p);
        let mut h = CoincidenceHistogram::empty(DEFAULT_BIN_PS, DEFAULT_SPAN_PS).unwrap();
        h.add(4140, 300);
        h.add(-4140, 300);
        let a = half_roundtrip_reduce(&h, &sel, 0.0, 1200.0).unwrap();
        let s = select_peaks(&h, &sel).unwrap();
        let b = normalize_point(s.coincidences, s.accidentals, 1200.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p, 0.25);
        assert_eq!(predicted_same_pol_counts(1200.0, 0.0), 0.0);
        assert!((predicted_same_pol_counts(1200.0, std::f64::consts::FRAC_PI_2) - 2400.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn normalize_is_scale_invariant(c in 1u64..1_000_000, acc in 0.0f64..0.5, base in 1.0f64..1e6) {
            let a = normalize_point(c, acc * c as f64, base).unwrap();
            let b = normalize_point(2 * c, 2.0 * acc * c as f64, 2.0 * base).unwrap();
            prop_assert!((a.p - b.p).abs() <= 1e-12 * a.p.abs().max(1e-300));
            let rel_a = a.sigma / a.p;
            let rel_b = b.sigma / b.p;
            prop_assert!((rel_a / rel_b - 2f64.sqrt()).abs() < 1e-9);
        }
    }
}
