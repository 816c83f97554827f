//! Reduction of time-tagged events to coincidence-probability points:
//! start–stop histogramming, comb-peak post-filtering, background
//! correction, rescaling to 0.5 and fringe fitting.

mod fringe;
mod histogram;
mod reduce;
mod selection;

pub use fringe::{fit_fringe, FringeFit};
pub use histogram::{histogram, histogram_with_span, CoincidenceHistogram, DEFAULT_BIN_PS, DEFAULT_SPAN_PS};
pub use reduce::{
    baseline_calibration, half_roundtrip_baseline, half_roundtrip_reduce, normalize_point, predicted_same_pol_counts,
    ReducedPoint, MIN_BASELINE_POINTS,
};
pub use selection::{select_peaks, PeakSelection, PeakSum, DEFAULT_WINDOW_PS};

use crate::error::Result;
use crate::montecarlo::EventStream;

/// Histogram settings plus the peak selection applied to one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub bin_width_ps: u64,
    pub selection: PeakSelection,
}

impl Analysis {
    pub fn new(selection: PeakSelection) -> Self {
        Self {
            bin_width_ps: DEFAULT_BIN_PS,
            selection,
        }
    }

    /// Histogram span needed to hold every selected window.
    fn histogram_span_ps(&self) -> u64 {
        self.selection.span_ps + self.selection.window_ps.div_ceil(2) + self.bin_width_ps
    }

    pub fn histogram(&self, events: &EventStream) -> Result<CoincidenceHistogram> {
        histogram_with_span(events, self.bin_width_ps, self.histogram_span_ps())
    }

    pub fn window_sums(&self, events: &EventStream) -> Result<PeakSum> {
        select_peaks(&self.histogram(events)?, &self.selection)
    }
}
