//! Flat `key = value` run configuration. Units are part of the key names.

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::montecarlo::SimConfig;
use crate::observables::{DelaySetting, PhaseMode};
use crate::params::SourceParams;
use crate::physics::Parity;
use crate::postprocess::{PeakSelection, DEFAULT_BIN_PS, DEFAULT_SPAN_PS, DEFAULT_WINDOW_PS};

/// Environment variable naming the default config file.
pub const CONFIG_ENV_VAR: &str = "HOMCOMB_CONFIG";

/// Splits `key = value` lines; `#` starts a comment, blank lines are
/// skipped. Duplicate keys are an error.
pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if out.iter().any(|(e, _)| e == k) {
            return Err(Error::Config(format!("line {}: duplicate key {k}", n + 1)));
        }
        out.push((k.to_owned(), v.to_owned()));
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn phase_mode(key: &str, v: &str) -> Result<PhaseMode> {
    match v {
        "locked" => Ok(PhaseMode::Locked),
        "derived" => Ok(PhaseMode::DerivedFromDelay),
        _ => Err(Error::Config(format!("{key}: expected locked or derived, got {v:?}"))),
    }
}

fn phase_mode_name(m: PhaseMode) -> &'static str {
    match m {
        PhaseMode::Locked => "locked",
        PhaseMode::DerivedFromDelay => "derived",
    }
}

/// Applies one source-parameter key. Returns false for keys it does not own.
pub(crate) fn apply_param(p: &mut SourceParams, key: &str, v: &str) -> Result<bool> {
    match key {
        "gamma_cavity_hz" => p.gamma_cavity = num(key, v)?,
        "gamma_mode_hz" => p.gamma_mode = num(key, v)?,
        "fsr_hz" => p.fsr = num(key, v)?,
        "t_round_physical_s" => p.t_round_physical = num(key, v)?,
        "lambda0_m" => p.lambda0 = num(key, v)?,
        "pm_bandwidth_hz" => p.pm_bandwidth = num(key, v)?,
        "filter_fwhm_hz" => {
            p.filter_fwhm = match v {
                "" | "none" => None,
                _ => Some(num(key, v)?),
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

/// `key=value` snapshot of the source parameters.
pub fn param_entries(p: &SourceParams) -> Vec<(String, String)> {
    let mut v = vec![
        ("gamma_cavity_hz", p.gamma_cavity.to_string()),
        ("gamma_mode_hz", p.gamma_mode.to_string()),
        ("fsr_hz", p.fsr.to_string()),
        ("t_round_physical_s", p.t_round_physical.to_string()),
        ("lambda0_m", p.lambda0.to_string()),
        ("pm_bandwidth_hz", p.pm_bandwidth.to_string()),
    ];
    v.push(("filter_fwhm_hz", p.filter_fwhm.map_or("none".into(), |f| f.to_string())));
    v.into_iter().map(|(k, s)| (k.to_owned(), s)).collect()
}

/// Applies one `delay_*` key.
pub(crate) fn apply_delay(d: &mut DelaySetting, key: &str, v: &str) -> Result<bool> {
    match key {
        "delay_coarse_half_roundtrips" => d.coarse_half_roundtrips = num(key, v)?,
        "delay_intermediate_s" => d.intermediate = num(key, v)?,
        "delay_phase_rad" => d.fine_phase = num(key, v)?,
        "delay_phase_mode" => d.phase_mode = phase_mode(key, v)?,
        _ => return Ok(false),
    }
    Ok(true)
}

pub(crate) fn delay_entries(d: &DelaySetting) -> Vec<(String, String)> {
    vec![
        ("delay_coarse_half_roundtrips".into(), d.coarse_half_roundtrips.to_string()),
        ("delay_intermediate_s".into(), d.intermediate.to_string()),
        ("delay_phase_rad".into(), d.fine_phase.to_string()),
        ("delay_phase_mode".into(), phase_mode_name(d.phase_mode).into()),
    ]
}

/// Delay scan for `predict`: every coarse setting × every phase × an
/// evenly spaced intermediate range.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanSpec {
    pub coarse_half_roundtrips: Vec<i64>,
    pub intermediate_min: f64,
    pub intermediate_max: f64,
    pub points: usize,
    pub phase_mode: PhaseMode,
    /// Locked phases, or piezo offsets when the phase is derived.
    pub phases: Vec<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            coarse_half_roundtrips: vec![0],
            intermediate_min: -15e-12,
            intermediate_max: 15e-12,
            points: 301,
            phase_mode: PhaseMode::Locked,
            phases: vec![0.0],
        }
    }
}

impl ScanSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("scan_points must be at least 1".into()));
        }
        if !(self.intermediate_min.is_finite() && self.intermediate_max.is_finite())
            || self.intermediate_max < self.intermediate_min
        {
            return Err(Error::Config("scan intermediate range must be finite with min <= max".into()));
        }
        if self.phases.is_empty() || self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Config("scan_phase_rad needs at least one finite value".into()));
        }
        Ok(())
    }

    pub fn delays(&self) -> Vec<DelaySetting> {
        let mut out = Vec::new();
        for &c in &self.coarse_half_roundtrips {
            for &ph in &self.phases {
                for i in 0..self.points {
                    let x = if self.points == 1 {
                        self.intermediate_min
                    } else {
                        self.intermediate_min
                            + (self.intermediate_max - self.intermediate_min) * i as f64 / (self.points - 1) as f64
                    };
                    out.push(DelaySetting {
                        coarse_half_roundtrips: c,
                        intermediate: x,
                        fine_phase: ph,
                        phase_mode: self.phase_mode,
                    });
                }
            }
        }
        out
    }
}

/// Histogram and peak-filter settings for `analyze`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub parity: Parity,
    pub window_ps: u64,
    pub bin_ps: u64,
    pub span_ps: u64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            parity: Parity::Even,
            window_ps: DEFAULT_WINDOW_PS,
            bin_ps: DEFAULT_BIN_PS,
            span_ps: DEFAULT_SPAN_PS,
        }
    }
}

impl AnalysisOptions {
    pub fn selection(&self, params: &SourceParams) -> PeakSelection {
        PeakSelection::new(self.parity, params)
            .with_window(self.window_ps)
            .with_span(self.span_ps)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub params: SourceParams,
    /// Source of the simulated run. Its `params` mirror [`RunConfig::params`].
    pub sim: SimConfig,
    pub scan: ScanSpec,
    pub analysis: AnalysisOptions,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (k, v) in parse_kv(text)? {
            c.apply(&k, &v)?;
        }
        c.sim.params = c.params;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn apply(&mut self, k: &str, v: &str) -> Result<()> {
        if apply_param(&mut self.params, k, v)? || apply_delay(&mut self.sim.delay, k, v)? {
            return Ok(());
        }
        match k {
            "pair_rate_hz" => self.sim.pair_rate = num(k, v)?,
            "background_rate_hz" => self.sim.background_rate = num(k, v)?,
            "jitter_sigma_s" => self.sim.jitter_sigma = num(k, v)?,
            "duration_s" => self.sim.duration = num(k, v)?,
            "seed" => self.sim.seed = num(k, v)?,
            "scan_coarse_half_roundtrips" => self.scan.coarse_half_roundtrips = list(k, v)?,
            "scan_intermediate_min_s" => self.scan.intermediate_min = num(k, v)?,
            "scan_intermediate_max_s" => self.scan.intermediate_max = num(k, v)?,
            "scan_points" => self.scan.points = num(k, v)?,
            "scan_phase_mode" => self.scan.phase_mode = phase_mode(k, v)?,
            "scan_phase_rad" => self.scan.phases = list(k, v)?,
            "parity" => {
                self.analysis.parity = v.parse().map_err(|_| Error::Config(format!("parity: expected even or odd, got {v:?}")))?
            }
            "window_ps" => self.analysis.window_ps = num(k, v)?,
            "bin_ps" => self.analysis.bin_ps = num(k, v)?,
            "span_ps" => self.analysis.span_ps = num(k, v)?,
            "output_path" => self.output = Some(PathBuf::from(v)),
            _ => return Err(Error::Config(format!("unknown key {k:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.sim.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.scan.validate()?;
        let a = &self.analysis;
        if a.window_ps == 0 || a.bin_ps == 0 || a.span_ps == 0 {
            return Err(Error::Config("window_ps, bin_ps and span_ps must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_default() {
        let c = RunConfig::parse("# nothing\n\n").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn parses_all_sections() {
        let text = "gamma_cavity_hz = 700e3\nfilter_fwhm_hz = 2e9\n\
            delay_coarse_half_roundtrips = 84\ndelay_phase_mode = locked\ndelay_phase_rad = 1.5\n\
            pair_rate_hz = 1000 # comment\nseed = 7\n\
            scan_coarse_half_roundtrips = 0, 2, 84\nscan_phase_rad = 0,1.5707963\n\
            parity = odd\nspan_ps = 2500000\noutput_path = out.csv\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.params.gamma_cavity, 700e3);
        assert_eq!(c.params.filter_fwhm, Some(2e9));
        assert_eq!(c.sim.params, c.params);
        assert_eq!(c.sim.delay.coarse_half_roundtrips, 84);
        assert_eq!(c.sim.delay.phase_mode, PhaseMode::Locked);
        assert_eq!(c.sim.seed, 7);
        assert_eq!(c.scan.coarse_half_roundtrips, vec![0, 2, 84]);
        assert_eq!(c.scan.delays().len(), 3 * 2 * 301);
        assert_eq!(c.analysis.parity, Parity::Odd);
        assert_eq!(c.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            "bogus_key = 1",
            "gamma_cavity_hz",
            "gamma_cavity_hz = fast",
            "seed = 1\nseed = 2",
            "pair_rate_hz = -1",
            "scan_points = 0",
            "parity = both",
            "gamma_cavity_hz = 0",
        ] {
            let e = RunConfig::parse(bad).unwrap_err();
            assert_eq!(e.exit_code(), 1, "{bad}: {e}");
        }
    }

    #[test]
    fn param_entries_round_trip() {
        let p = SourceParams { filter_fwhm: Some(3.3e9), gamma_cavity: 1.0 / 3.0 * 2e6, ..SourceParams::default() };
        let mut q = SourceParams { filter_fwhm: None, ..SourceParams::default() };
        for (k, v) in param_entries(&p) {
            assert!(apply_param(&mut q, &k, &v).unwrap());
        }
        assert_eq!(p, q);
    }
}
