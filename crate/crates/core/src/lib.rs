//! Two-photon sideband transitions in the transversely driven quantum Rabi
//! model: closed-form second-order predictions of matching frequencies and
//! sideband rates, and a time-domain simulator that measures them the way an
//! experiment would (edged pulses, endpoint sampling, chevron sweeps and
//! sinusoidal fits).

pub mod analytic;
pub mod error;
pub mod evolve;
pub mod model;
pub mod sweep;

pub use error::{Error, Result, Warning};
