//! Simulation and analysis of two-frequency-driven dipolar spin ensembles:
//! random spin graphs, effective Hamiltonians, Krylov state propagation,
//! dense reference propagators and heating/period-doubling analysis.

pub mod analysis;
pub mod engine;
pub mod error;
pub mod lattice;
pub mod operators;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};
