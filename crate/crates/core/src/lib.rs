//! Secure beamforming for dual-function radar-communication transmitters:
//! covariance design that keeps radar beampattern quality and per-user SINR
//! while limiting what an eavesdropping target can decode, plus the tooling
//! to reproduce the associated experiments.

pub mod beampattern;
pub mod conic;
pub mod design;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod scenario;

pub use error::{Error, Result};
