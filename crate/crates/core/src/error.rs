use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid source parameters: {0}")]
    InvalidParams(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric oracle did not converge: step {step:e} s gives {coarse}, half step gives {fine} (|diff| = {diff:e})")]
    NonConvergence {
        step: f64,
        coarse: f64,
        fine: f64,
        diff: f64,
    },

    #[error("fringe fit did not converge after {iterations} iterations (chi2 = {chi2})")]
    FitNonConvergence { iterations: usize, chi2: f64 },

    #[error("picosecond timestamp counter overflow at t = {0} s")]
    Overflow(f64),

    #[error("event stream is not sorted by timestamp (index {0})")]
    UnsortedEvents(usize),

    #[error("delay {delay:e} s lies outside the truncated comb support ±{support:e} s")]
    DelayOutsideComb { delay: f64, support: f64 },

    #[error("peak selection is empty")]
    EmptySelection,

    #[error("no baseline points: {0}")]
    NoBaseline(String),

    #[error("event file {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::Config(_) | Error::InvalidParams(_) => 1,
            Error::NonConvergence { .. } | Error::FitNonConvergence { .. } => 3,
            _ => 2,
        }
    }
}
