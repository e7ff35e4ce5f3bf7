//! Modeling and analysis toolkit for nanofiber-interfaced optical tweezer
//! arrays: guided-mode optics of a vacuum-clad subwavelength fiber,
//! standing-wave tweezer trap potentials near the fiber surface,
//! evanescent coupling of trapped emitters into the guided mode, hologram
//! synthesis for multi-site arrays, Monte Carlo generation of scanned
//! interrogation records, and the estimators that reduce those records to
//! physical quantities.
//!
//! The crate is deterministic end to end: every stochastic component takes
//! an explicit seed, and identical inputs produce byte-identical outputs.

pub mod atom;
pub mod config;
pub mod coupling;
pub mod error;
pub mod fibermode;
pub mod holography;
pub mod inference;
pub mod plot;
pub mod report;
pub mod simkit;
pub mod special;
pub mod trapfield;
pub mod ttag;
pub mod units;

pub use error::{Error, Result};
