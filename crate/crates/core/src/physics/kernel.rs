use std::f64::consts::PI;

use crate::params::{SourceParams, DIP_WIDTH_CONSTANT};

/// Number of tabulated samples for the filtered kernel.
pub const FILTERED_SAMPLES: usize = 4096;

/// Filter decay times of tail kept in the filtered kernel support.
const FILTER_TAIL_DECAYS: f64 = 14.0;

/// Triangular dip shape in the absence of filters.
///
/// `h(t) = max(0, 1 − πδν|t|/2.783)`.
pub fn h_triangular(t: f64, params: &SourceParams) -> f64 {
    (1.0 - triangle_slope(params) * t.abs()).max(0.0)
}

fn triangle_slope(params: &SourceParams) -> f64 {
    PI * params.pm_bandwidth / DIP_WIDTH_CONSTANT
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelShape {
    Triangular,
    Filtered,
}

/// Shape `h(t)` of a single HOM dip, normalized to `h(0) = 1`.
#[derive(Debug, Clone)]
pub struct DipKernel {
    half_width: f64,
    shape: KernelShape,
    /// Filtered case: samples of h on `[0, half_width]`, uniform.
    samples: Option<Vec<f64>>,
    slope: f64,
}

impl DipKernel {
    pub fn new(params: &SourceParams) -> Self {
        let tri = params.dip_half_width();
        let slope = triangle_slope(params);
        match params.filter_decay_time() {
            None => Self {
                half_width: tri,
                shape: KernelShape::Triangular,
                samples: None,
                slope,
            },
            Some(tau) => Self::filtered(tri, tau, slope),
        }
    }

    /// Triangle of half width `tri` convolved with the two-sided
    /// exponential `e^{-|s|/τ}/(2τ)`, which is the autocorrelation of a
    /// single-pole response `e^{-t/τ}/τ`.
    fn filtered(tri: f64, tau: f64, slope: f64) -> Self {
        let half_width = tri + FILTER_TAIL_DECAYS * tau;
        let dt = half_width / (FILTERED_SAMPLES - 1) as f64;
        let raw: Vec<f64> = (0..FILTERED_SAMPLES)
            .map(|i| triangle_laplace(i as f64 * dt, tri, tau))
            .collect();
        let norm = raw[0];
        let samples = raw.into_iter().map(|v| v / norm).collect();
        Self {
            half_width,
            shape: KernelShape::Filtered,
            samples: Some(samples),
            slope,
        }
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn shape(&self) -> KernelShape {
        self.shape
    }

    /// Tabulated `(t, h(t))` grid of the filtered kernel for `t ≥ 0`.
    pub fn samples(&self) -> Option<Vec<(f64, f64)>> {
        let s = self.samples.as_ref()?;
        let dt = self.half_width / (s.len() - 1) as f64;
        Some(s.iter().enumerate().map(|(i, &v)| (i as f64 * dt, v)).collect())
    }

    pub fn eval(&self, t: f64) -> f64 {
        let a = t.abs();
        match &self.samples {
            None => (1.0 - self.slope * a).max(0.0),
            Some(s) => {
                if a >= self.half_width {
                    return 0.0;
                }
                let x = a / self.half_width * (s.len() - 1) as f64;
                let i = x.floor() as usize;
                let frac = x - i as f64;
                if i + 1 >= s.len() {
                    s[s.len() - 1]
                } else {
                    s[i] * (1.0 - frac) + s[i + 1] * frac
                }
            }
        }
    }
}

fn triangle_laplace(t: f64, w: f64, tau: f64) -> f64 {
    // ∫ tri(t - s) e^{-|s|/τ}/(2τ) ds over s ∈ [t - w, t + w]; the
    // integrand has kinks at t - w, t, t + w and 0.
    let tri = |x: f64| (1.0 - x.abs() / w).max(0.0);
    let lap = |s: f64| (-s.abs() / tau).exp() / (2.0 * tau);
    let mut cuts = vec![t - w, t, t + w];
    if 0.0 > t - w && 0.0 < t + w {
        cuts.push(0.0);
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|c| simpson(|s| tri(t - s) * lap(s), c[0], c[1], 64))
        .sum()
}

/// Composite Simpson rule with `n` (rounded up to even) panels.
pub(crate) fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}
