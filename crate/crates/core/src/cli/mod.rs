//! `homcomb` command line: predict, table, simulate, analyze.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::io::{
    read_events, write_atomic, write_events, AnalysisOptions, EventFile, EventFormat, EventHeader, RunConfig,
    CONFIG_ENV_VAR,
};
use crate::montecarlo::generate_stream;
use crate::observables::{
    hom_visibility, parse_round_trips, visibility_table, DelaySetting, Detector, PhaseMode, TraceKind, TraceResult,
    PAPER_TABLE_DELAYS_RT,
};
use crate::params::SourceParams;
use crate::physics::{DipModel, Parity};
use crate::postprocess::{fit_fringe, normalize_point, select_peaks, histogram_with_span, PeakSum, MIN_BASELINE_POINTS};

/// Columns of `predict`.
pub const PREDICT_COLUMNS: [&str; 7] = [
    "delay_s",
    "coarse_rt",
    "phase_rad",
    "p_coincidence",
    "p_postselected",
    "singles1",
    "singles2",
];

pub const TABLE_COLUMNS: [&str; 2] = ["delay_rt", "v_theory_percent"];

pub const ANALYZE_COLUMNS: [&str; 10] = [
    "file",
    "delay_s",
    "coarse_rt",
    "phase_rad",
    "coincidences",
    "accidentals",
    "p",
    "sigma",
    "clamped",
    "p_theory",
];

#[derive(Debug, Parser)]
#[command(name = "homcomb", version, about = "HOM revivals of cavity-enhanced biphoton combs")]
struct Cli {
    /// flat key = value config file
    #[arg(long, global = true, env = CONFIG_ENV_VAR)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Analytic coincidence and singles curves over a delay scan
    Predict(PredictArgs),
    /// Theoretical dip visibilities at delays given in round trips
    Table(TableArgs),
    /// Write a synthetic event file
    Simulate(SimulateArgs),
    /// Reduce event files to coincidence points and a visibility
    Analyze(AnalyzeArgs),
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// coarse delays in units of T_p, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    coarse: Option<Vec<i64>>,
    /// start of the intermediate scan (s)
    #[arg(long, allow_negative_numbers = true)]
    from_s: Option<f64>,
    /// end of the intermediate scan (s)
    #[arg(long, allow_negative_numbers = true)]
    to_s: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    /// locked phases, or piezo offsets with --phase-mode derived
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    phase: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    phase_mode: Option<PhaseArg>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TableArgs {
    /// the seven published delays (default when --delays is absent)
    #[arg(long, conflicts_with = "delays")]
    paper: bool,
    /// delays in round trips T, e.g. 0,1/2,84; empty for none
    #[arg(long)]
    delays: Option<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    coarse: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    intermediate_s: Option<f64>,
    /// lock the phase at this value (rad)
    #[arg(long, allow_negative_numbers = true)]
    phase: Option<f64>,
    #[arg(long)]
    pair_rate_hz: Option<f64>,
    #[arg(long)]
    background_rate_hz: Option<f64>,
    #[arg(long)]
    jitter_s: Option<f64>,
    /// binary unless the path ends in .csv
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// extra files used only for the baseline calibration
    #[arg(long)]
    baseline: Vec<PathBuf>,
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    #[arg(long)]
    window_ps: Option<u64>,
    #[arg(long)]
    bin_ps: Option<u64>,
    #[arg(long)]
    span_ps: Option<u64>,
    /// fit the two-photon fringe A(1 + V cos(2phi - phi0)) to window counts
    #[arg(long)]
    fit_fringe: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseArg {
    Locked,
    Derived,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Binary,
    Csv,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ParityArg {
    Even,
    Odd,
}

/// Parses `args` (including the program name) and runs the command.
/// Tables go to `out` unless an output path is set; reports go to `err`.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Predict(a) => predict(&mut cfg, a, out),
        Command::Table(a) => table(&cfg, a, out),
        Command::Simulate(a) => simulate(&mut cfg, a, out),
        Command::Analyze(a) => analyze(&mut cfg, a, out, err),
    }
}

fn emit(bytes: Vec<u8>, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, &bytes),
        None => Ok(out.write_all(&bytes)?),
    }
}

fn csv_bytes<R: IntoIterator<Item = Vec<String>>>(columns: &[&str], rows: R) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

/// Analytic trace rows for `delays`.
pub fn predict_rows(params: &SourceParams, delays: &[DelaySetting]) -> Result<Vec<Vec<String>>> {
    let model = DipModel::new(params)?;
    Ok(delays
        .iter()
        .map(|d| {
            vec![
                d.total_delay(params).to_string(),
                d.coarse_round_trips().to_string(),
                d.phase(params).to_string(),
                model.coincidence_probability(d).to_string(),
                model.postselected_coincidence(d).to_string(),
                model.singles_rate(Detector::One, d).to_string(),
                model.singles_rate(Detector::Two, d).to_string(),
            ]
        })
        .collect())
}

fn predict(cfg: &mut RunConfig, a: PredictArgs, out: &mut dyn Write) -> Result<()> {
    let s = &mut cfg.scan;
    if let Some(c) = a.coarse {
        s.coarse_half_roundtrips = c;
    }
    if let Some(v) = a.from_s {
        s.intermediate_min = v;
    }
    if let Some(v) = a.to_s {
        s.intermediate_max = v;
    }
    if let Some(v) = a.points {
        s.points = v;
    }
    if let Some(v) = a.phase {
        s.phases = v;
    }
    if let Some(m) = a.phase_mode {
        s.phase_mode = match m {
            PhaseArg::Locked => PhaseMode::Locked,
            PhaseArg::Derived => PhaseMode::DerivedFromDelay,
        };
    }
    s.validate().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let rows = predict_rows(&cfg.params, &s.delays())?;
    emit(csv_bytes(&PREDICT_COLUMNS, rows)?, a.output.as_deref().or(cfg.output.as_deref()), out)
}

fn table(cfg: &RunConfig, a: TableArgs, out: &mut dyn Write) -> Result<()> {
    let delays: Vec<f64> = match a.delays.as_deref() {
        Some(list) => list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(parse_round_trips)
            .collect::<Result<_>>()?,
        None => PAPER_TABLE_DELAYS_RT.to_vec(),
    };
    cfg.params.validate()?;
    let rows = visibility_table(&delays, &cfg.params)
        .into_iter()
        .map(|r| vec![r.delay_rt.to_string(), format!("{:.3}", 100.0 * r.v_theory)]);
    emit(csv_bytes(&TABLE_COLUMNS, rows)?, a.output.as_deref().or(cfg.output.as_deref()), out)
}

fn simulate(cfg: &mut RunConfig, a: SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let sim = &mut cfg.sim;
    if let Some(v) = a.seed {
        sim.seed = v;
    }
    if let Some(v) = a.duration_s {
        sim.duration = v;
    }
    if let Some(v) = a.coarse {
        sim.delay.coarse_half_roundtrips = v;
    }
    if let Some(v) = a.intermediate_s {
        sim.delay.intermediate = v;
    }
    if let Some(v) = a.phase {
        sim.delay.fine_phase = v;
        sim.delay.phase_mode = PhaseMode::Locked;
    }
    if let Some(v) = a.pair_rate_hz {
        sim.pair_rate = v;
    }
    if let Some(v) = a.background_rate_hz {
        sim.background_rate = v;
    }
    if let Some(v) = a.jitter_s {
        sim.jitter_sigma = v;
    }
    sim.validate().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let path = a
        .output
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| Error::InvalidArgument("simulate needs an output path (-o)".into()))?;
    let format = match a.format {
        Some(FormatArg::Binary) => EventFormat::Binary,
        Some(FormatArg::Csv) => EventFormat::Csv,
        None => EventFormat::from_path(&path),
    };
    let file = EventFile {
        header: EventHeader::from_sim(sim),
        events: generate_stream(sim)?,
    };
    write_events(&path, &file, format)?;
    let [c0, c1] = file.events.channel_counts();
    writeln!(out, "seed={}", sim.seed)?;
    writeln!(out, "events_ch0={c0}")?;
    writeln!(out, "events_ch1={c1}")?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(())
}

/// One analyzed event file.
#[derive(Debug, Clone)]
pub struct AnalyzedFile {
    pub path: PathBuf,
    pub params: SourceParams,
    pub delay: DelaySetting,
    pub sum: PeakSum,
}

/// Histograms one file and sums its selected windows.
pub fn analyze_file(path: &Path, opts: &AnalysisOptions) -> Result<AnalyzedFile> {
    let f = read_events(path)?;
    if f.events.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "no events".into(),
        });
    }
    let params = f.header.params()?;
    let delay = f.header.delay()?.ok_or_else(|| Error::Format {
        path: path.to_path_buf(),
        reason: "header records no delay setting".into(),
    })?;
    let sel = opts.selection(&params);
    let span = sel.peak_centres_ps().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
        + opts.window_ps
        + opts.bin_ps;
    let h = histogram_with_span(&f.events, opts.bin_ps, span.max(opts.span_ps))?;
    let sum = select_peaks(&h, &sel)?;
    Ok(AnalyzedFile {
        path: path.to_path_buf(),
        params,
        delay,
        sum,
    })
}

/// Share of the window counts at a baseline delay that the odd windows
/// owe to NOON pairs: `1 + 2 sin²φ` times the even-comb share.
fn noon_factor(parity: Parity, f: &AnalyzedFile) -> f64 {
    match parity {
        Parity::Even => 1.0,
        Parity::Odd => 1.0 + 2.0 * f.delay.phase(&f.params).sin().powi(2),
    }
}

/// Reduced trace of `files`, calibrated on the members of `files` and
/// `extra_baseline` that lie outside every dip.
pub fn reduce_files(
    files: &[AnalyzedFile],
    extra_baseline: &[AnalyzedFile],
    parity: Parity,
) -> Result<(TraceResult, Vec<crate::postprocess::ReducedPoint>, f64)> {
    let base: Vec<f64> = files
        .iter()
        .chain(extra_baseline)
        .filter(|f| DipModel::new_unchecked(&f.params).f_ee(2.0 * f.delay.total_delay(&f.params)) < crate::observables::BASELINE_F_THRESHOLD)
        .map(|f| f.sum.corrected() / noon_factor(parity, f))
        .collect();
    if base.len() < MIN_BASELINE_POINTS {
        return Err(Error::NoBaseline(format!(
            "{} files lie outside the dip, at least {MIN_BASELINE_POINTS} required",
            base.len()
        )));
    }
    let baseline = base.iter().sum::<f64>() / base.len() as f64;
    if baseline <= 0.0 {
        return Err(Error::NoBaseline(format!("baseline counts average to {baseline}")));
    }
    let mut trace = TraceResult::new(TraceKind::PostselectedCoincidence);
    let mut points = Vec::new();
    for f in files {
        let noon = (noon_factor(parity, f) - 1.0) * baseline;
        let r = normalize_point(f.sum.coincidences, f.sum.accidentals + noon, baseline)?;
        trace.push(f.delay, r.p, r.sigma);
        points.push(r);
    }
    Ok((trace, points, baseline))
}

fn analyze(cfg: &mut RunConfig, a: AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let o = &mut cfg.analysis;
    if let Some(p) = a.parity {
        o.parity = match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        };
    }
    if let Some(v) = a.window_ps {
        o.window_ps = v;
    }
    if let Some(v) = a.bin_ps {
        o.bin_ps = v;
    }
    if let Some(v) = a.span_ps {
        o.span_ps = v;
    }
    let opts = *o;
    let mut load = |paths: &[PathBuf]| -> Result<Vec<AnalyzedFile>> {
        let mut ok = Vec::new();
        for p in paths {
            match analyze_file(p, &opts) {
                Ok(f) => ok.push(f),
                Err(e @ Error::Format { .. }) => writeln!(err, "skipped: {e}")?,
                Err(e) => return Err(e),
            }
        }
        Ok(ok)
    };
    let files = load(&a.files)?;
    if files.is_empty() {
        return Err(Error::Format {
            path: a.files[0].clone(),
            reason: "no readable event file among the inputs".into(),
        });
    }
    let extra = load(&a.baseline)?;
    let params = files[0].params;
    if files.iter().chain(&extra).any(|f| f.params != params) {
        return Err(Error::InvalidArgument("event files disagree on source parameters".into()));
    }
    let (trace, points, baseline) = reduce_files(&files, &extra, opts.parity)?;
    let model = DipModel::new(&params)?;
    let rows = files.iter().zip(&points).map(|(f, r)| {
        vec![
            f.path.display().to_string(),
            f.delay.total_delay(&params).to_string(),
            f.delay.coarse_round_trips().to_string(),
            f.delay.phase(&params).to_string(),
            f.sum.coincidences.to_string(),
            f.sum.accidentals.to_string(),
            r.p.to_string(),
            r.sigma.to_string(),
            r.clamped.to_string(),
            model.postselected_coincidence(&f.delay).to_string(),
        ]
    });
    emit(csv_bytes(&ANALYZE_COLUMNS, rows)?, a.output.as_deref().or(cfg.output.as_deref()), out)?;
    writeln!(err, "baseline_counts={baseline}")?;
    match hom_visibility(&trace, &params) {
        Ok(v) => writeln!(err, "visibility={} sigma={}", v.value, v.sigma)?,
        Err(e) => writeln!(err, "visibility unavailable: {e}")?,
    }
    if a.fit_fringe {
        let pts: Vec<(f64, f64)> = files
            .iter()
            .map(|f| ((2.0 * f.delay.phase(&params)).rem_euclid(std::f64::consts::TAU), f.sum.coincidences as f64))
            .collect();
        let fit = fit_fringe(&pts)?;
        writeln!(
            err,
            "fringe amplitude={} visibility={} phase0={} reduced_chi2={}",
            fit.amplitude, fit.visibility, fit.phase0, fit.reduced_chi2
        )?;
    }
    Ok(())
}
