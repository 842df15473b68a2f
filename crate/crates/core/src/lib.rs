//! Linearized quantum fluctuations of bright cavity solitons in the
//! degenerate optical parametric oscillator.
//!
//! The pipeline is: [`soliton::soliton_profile`] → [`linop::build_operators`]
//! → [`linop::eigensystem`] → [`spectra`] for squeezing, intensity and drift
//! spectra, with [`oracle`] providing independent stochastic estimates.

pub mod error;
pub mod linop;
pub mod lof;
pub mod model;
pub mod oracle;
pub mod soliton;
pub mod spectra;

pub use error::{Error, Result};
