//! Hong-Ou-Mandel revivals and first-order fringes of a cavity-enhanced
//! biphoton frequency comb.
//!
//! * [`physics`]: closed-form dip kernel, comb weights and overlap
//!   functions, plus a numerical overlap oracle.
//! * [`observables`]: coincidence probability, singles rates,
//!   visibilities and the coarse/intermediate/fine delay model.
//! * [`montecarlo`]: synthetic time-tagged detection events.
//! * [`postprocess`]: coincidence histograms, comb-peak filtering,
//!   normalization and fringe fitting.
//! * [`io`]: event files and the run configuration format.

pub mod error;
pub mod io;
pub mod montecarlo;
pub mod observables;
pub mod params;
pub mod physics;
pub mod postprocess;

#[cfg(feature = "cli")]
pub mod cli;

pub use error::{Error, Result};
pub use params::SourceParams;
