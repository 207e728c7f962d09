//! Coherent backscattering of intense laser light from two atoms coupled by
//! photon exchange: master-equation model, steady states, two-time
//! correlations, double-scattering spectra and the enhancement factor.

pub mod atom;
pub mod cbs;
pub mod checks;
pub mod config;
pub mod dressed;
pub mod error;
pub mod liouvillian;
pub mod run;
pub mod solver;
pub mod spectra;

pub use error::{Error, Result};
