use crate::error::{Error, Result};
use crate::params::SourceParams;
use crate::physics::Parity;

use super::histogram::{CoincidenceHistogram, DEFAULT_SPAN_PS};

/// Default post-filter window over an individual comb peak, 1.07 ns.
pub const DEFAULT_WINDOW_PS: u64 = 1070;

/// Comb peaks kept by the post-filter.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakSelection {
    pub parity: Parity,
    pub window_ps: u64,
    /// Peak centres are kept for `|δt| ≤ span_ps`.
    pub span_ps: u64,
    /// Physical round trip, rounded to the picosecond.
    pub t_round_physical_ps: u64,
}

impl PeakSelection {
    pub fn new(parity: Parity, params: &SourceParams) -> Self {
        Self {
            parity,
            window_ps: DEFAULT_WINDOW_PS,
            span_ps: DEFAULT_SPAN_PS,
            t_round_physical_ps: (params.t_round_physical * 1e12).round() as u64,
        }
    }

    pub fn with_span(self, span_ps: u64) -> Self {
        Self { span_ps, ..self }
    }

    pub fn with_window(self, window_ps: u64) -> Self {
        Self { window_ps, ..self }
    }

    fn centres_of(&self, parity: Option<Parity>) -> Vec<i64> {
        let tp = self.t_round_physical_ps as i64;
        if tp == 0 {
            return Vec::new();
        }
        let kmax = self.span_ps as i64 / tp;
        (-kmax..=kmax)
            .filter(|&k| parity.is_none_or(|p| Parity::of_multiple(k) == p))
            .map(|k| k * tp)
            .collect()
    }

    /// Peak centres (ps) of the selected parity.
    pub fn peak_centres_ps(&self) -> Vec<i64> {
        self.centres_of(Some(self.parity))
    }

    pub fn peak_centres(&self) -> Vec<f64> {
        self.peak_centres_ps().into_iter().map(|c| c as f64 * 1e-12).collect()
    }

    /// Sum of all window widths (s).
    pub fn total_window(&self) -> f64 {
        self.peak_centres_ps().len() as f64 * self.window_ps as f64 * 1e-12
    }

    fn in_window(&self, centre: i64, t: i64) -> bool {
        let half = self.window_ps as i64;
        // [c − w/2, c + w/2) in doubled units to keep odd widths exact
        2 * t >= 2 * centre - half && 2 * t < 2 * centre + half
    }
}

/// Window sums of one histogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakSum {
    pub coincidences: u64,
    pub accidentals: f64,
    pub windows: usize,
}

impl PeakSum {
    pub fn corrected(&self) -> f64 {
        self.coincidences as f64 - self.accidentals
    }
}

/// Sums the counts inside the selected windows and estimates the
/// accidental background under them from the floor between all comb
/// peaks (either parity).
pub fn select_peaks(h: &CoincidenceHistogram, sel: &PeakSelection) -> Result<PeakSum> {
    let centres = sel.peak_centres_ps();
    if centres.is_empty() || sel.window_ps == 0 {
        return Err(Error::EmptySelection);
    }
    let all = sel.centres_of(None);
    let reach = all.iter().map(|c| c.abs()).max().unwrap_or(0) + sel.window_ps.div_ceil(2) as i64;
    let covered = h.bin_centre_ps(h.half_bins) + (h.bin_width_ps / 2) as i64;
    if reach > covered {
        return Err(Error::InvalidArgument(format!(
            "peak windows reach ±{reach} ps beyond the histogram span ±{covered} ps"
        )));
    }
    let tp = sel.t_round_physical_ps as i64;
    let mut coincidences = 0u64;
    let mut window_bins = 0u64;
    let mut floor_counts = 0u64;
    let mut floor_bins = 0u64;
    for (k, c) in h.bins() {
        let t = h.bin_centre_ps(k);
        let nearest = if tp > 0 { (t as f64 / tp as f64).round() as i64 * tp } else { 0 };
        let in_selected = centres.binary_search(&nearest).is_ok() && sel.in_window(nearest, t);
        let in_any = all.binary_search(&nearest).is_ok() && sel.in_window(nearest, t)
            || (t.unsigned_abs() > sel.span_ps && sel.in_window(nearest, t));
        if in_selected {
            coincidences += c;
            window_bins += 1;
        } else if !in_any {
            floor_counts += c;
            floor_bins += 1;
        }
    }
    let accidentals = if floor_bins == 0 {
        0.0
    } else {
        floor_counts as f64 / floor_bins as f64 * window_bins as f64
    };
    Ok(PeakSum {
        coincidences,
        accidentals,
        windows: centres.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::postprocess::histogram::DEFAULT_BIN_PS;

    #[test]
    fn default_even_selection() {
        let sel = PeakSelection::new(Parity::Even, &SourceParams::default());
        assert_eq!(sel.peak_centres_ps().len(), 121);
        assert!((sel.total_window() - 129.47e-9).abs() < 1e-15);
        let odd = PeakSelection { parity: Parity::Odd, ..sel };
        assert_eq!(odd.peak_centres_ps().len(), 120);
    }

    #[test]
    fn windows_hold_ten_default_bins() {
        let p = SourceParams::default();
        let sel = PeakSelection::new(Parity::Even, &p);
        let mut h = CoincidenceHistogram::empty(DEFAULT_BIN_PS, DEFAULT_SPAN_PS).unwrap();
        for c in h.counts.iter_mut() {
            *c = 1;
        }
        let s = select_peaks(&h, &sel).unwrap();
        assert_eq!(s.coincidences, 1210);
    }

    #[test]
    fn odd_peak_excluded_by_even_windows() {
        let p = SourceParams::default();
        let mut h = CoincidenceHistogram::empty(DEFAULT_BIN_PS, DEFAULT_SPAN_PS).unwrap();
        h.add(4140, 500);
        let s = select_peaks(&h, &PeakSelection::new(Parity::Even, &p)).unwrap();
        assert_eq!(s.coincidences, 0);
        assert_eq!(s.accidentals, 0.0);
        let s = select_peaks(&h, &PeakSelection::new(Parity::Odd, &p)).unwrap();
        assert_eq!(s.coincidences, 500);
    }

    #[test]
    fn flat_floor_gives_density_times_window() {
        let p = SourceParams::default();
        let mut h = CoincidenceHistogram::empty(DEFAULT_BIN_PS, DEFAULT_SPAN_PS).unwrap();
        let per_bin = 3u64;
        for c in h.counts.iter_mut() {
            *c = per_bin;
        }
        let sel = PeakSelection::new(Parity::Even, &p);
        let s = select_peaks(&h, &sel).unwrap();
        let rho = per_bin as f64 / 107e-12;
        assert!((s.accidentals - rho * 129.47e-9).abs() < 1e-9 * s.accidentals);
        assert!((s.corrected()).abs() < 1e-9);
    }

    #[test]
    fn empty_or_oversized_selection_rejected() {
        let p = SourceParams::default();
        let h = CoincidenceHistogram::empty(DEFAULT_BIN_PS, DEFAULT_SPAN_PS).unwrap();
        let sel = PeakSelection::new(Parity::Even, &p).with_span(1000);
        let sel = PeakSelection { t_round_physical_ps: 0, ..sel };
        assert!(matches!(select_peaks(&h, &sel), Err(Error::EmptySelection)));
        let wide = PeakSelection::new(Parity::Even, &p).with_span(800_000);
        assert!(select_peaks(&h, &wide).is_err());
    }

    #[test]
    fn refining_bins_moves_only_boundary_mass() {
        let p = SourceParams::default();
        let sel = PeakSelection::new(Parity::Even, &p).with_window(1000);
        let mut coarse = CoincidenceHistogram::empty(100, DEFAULT_SPAN_PS).unwrap();
        let mut fine = CoincidenceHistogram::empty(50, DEFAULT_SPAN_PS).unwrap();
        // deterministic scatter of δt values
        let mut x: u64 = 12345;
        for _ in 0..200_000 {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let dt = (x >> 20) as i64 % 1_000_000 - 500_000;
            coarse.add(dt, 1);
            fine.add(dt, 1);
        }
        let a = select_peaks(&coarse, &sel).unwrap();
        let b = select_peaks(&fine, &sel).unwrap();
        // at most one coarse bin of mass per window
        let max_bin = *coarse.counts.iter().max().unwrap() as i64;
        let diff = (a.coincidences as i64 - b.coincidences as i64).abs();
        assert!(diff <= max_bin * a.windows as i64, "{a:?} vs {b:?}");
    }
}
