//! Capacities, Holevo quantities and error-exponent bounds for
//! energy-constrained classical-quantum channels, with the bosonic Gaussian
//! channel and the photon channel as worked cases.
//!
//! Modules, bottom-up:
//!
//! - [`fock`]: truncated Fock-space states, operators and entropies.
//! - [`channel`]: finite ensembles with an additive input constraint, the
//!   Holevo quantity and Shannon information for a given measurement.
//! - [`gaussian`]: closed forms for the Gaussian and photon channels.
//! - [`discretizer`]: reduction of a continuous prior to a finite ensemble
//!   that stays inside the constraint set.
//! - [`reliability`]: random-coding and expurgated error exponents.
//! - [`montecarlo`]: random-coding experiments with square-root decoding.
//!
//! Logarithms are natural throughout.

pub mod channel;
pub mod discretizer;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod reliability;

pub use error::{Error, Result};
pub use fock::{C64, CMatrix, CVector};
