//! wasm-bindgen bindings for the static demo page in `www/`.
//!
//! Every call takes the two knobs the page exposes, the cavity linewidth
//! (kHz) and the phase-matching bandwidth (GHz); all other source
//! parameters keep their defaults.

use homcomb::observables::{visibility_table, DelaySetting, Detector};
use homcomb::physics::DipModel;
use homcomb::SourceParams;
use wasm_bindgen::prelude::*;

/// Sampled curve handed to JavaScript.
#[wasm_bindgen]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    /// Second series; empty when the curve has only one.
    #[wasm_bindgen(getter)]
    pub fn y2(&self) -> Vec<f64> {
        self.y2.clone()
    }
}

fn model(gamma_khz: f64, bandwidth_ghz: f64) -> Result<DipModel, JsError> {
    let params = SourceParams {
        gamma_cavity: gamma_khz * 1e3,
        gamma_mode: (gamma_khz * 1e3).min(SourceParams::default().gamma_mode),
        pm_bandwidth: bandwidth_ghz * 1e9,
        ..SourceParams::default()
    };
    DipModel::new(&params).map_err(|e| JsError::new(&e.to_string()))
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n < 2 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 })
}

/// HOM dip around `coarse` multiples of T_p: x in ps of stage delay,
/// y the peak-filtered coincidence probability, y2 the unfiltered one
/// at locked phase `phase`.
#[wasm_bindgen]
pub fn dip_trace(
    gamma_khz: f64,
    bandwidth_ghz: f64,
    coarse: i32,
    span_ps: f64,
    phase: f64,
    points: usize,
) -> Result<Curve, JsError> {
    let m = model(gamma_khz, bandwidth_ghz)?;
    let mut c = Curve { x: Vec::new(), y: Vec::new(), y2: Vec::new() };
    for x in linspace(-span_ps, span_ps, points.max(2)) {
        let d = DelaySetting::locked(i64::from(coarse), x * 1e-12, phase);
        c.x.push(x);
        c.y.push(m.postselected_coincidence(&d));
        c.y2.push(m.coincidence_probability(&d));
    }
    Ok(c)
}

/// Singles of both detectors against locked phase at Δt = T_p + offset.
#[wasm_bindgen]
pub fn singles_fringe(gamma_khz: f64, bandwidth_ghz: f64, offset_ps: f64, points: usize) -> Result<Curve, JsError> {
    let m = model(gamma_khz, bandwidth_ghz)?;
    let mut c = Curve { x: Vec::new(), y: Vec::new(), y2: Vec::new() };
    for phi in linspace(0.0, 4.0 * std::f64::consts::PI, points.max(2)) {
        let d = DelaySetting::locked(1, offset_ps * 1e-12, phi);
        c.x.push(phi);
        c.y.push(m.singles_rate(Detector::One, &d));
        c.y2.push(m.singles_rate(Detector::Two, &d));
    }
    Ok(c)
}

/// Revival visibility at every half round trip up to `max_rt` (units of T).
#[wasm_bindgen]
pub fn visibility_decay(gamma_khz: f64, bandwidth_ghz: f64, max_rt: f64) -> Result<Curve, JsError> {
    let m = model(gamma_khz, bandwidth_ghz)?;
    let n = (2.0 * max_rt.clamp(0.0, 500.0)).floor() as usize + 1;
    let delays: Vec<f64> = (0..n).map(|i| 0.5 * i as f64).collect();
    let rows = visibility_table(&delays, m.params());
    Ok(Curve {
        x: rows.iter().map(|r| r.delay_rt).collect(),
        y: rows.iter().map(|r| 100.0 * r.v_theory).collect(),
        y2: Vec::new(),
    })
}
