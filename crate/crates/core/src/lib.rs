//! Simulation toolkit for photon-mediated quantum gates on atomic-ensemble
//! qubits.
//!
//! The crate combines
//!
//! - [`qsim`]: an exact small-Hilbert-space state-vector engine (tensor
//!   products, gates, projective measurement) used as the oracle for every
//!   protocol claim,
//! - [`cavity`]: time-domain simulation of a single-photon pulse reflecting
//!   off a one-sided cavity, with controlled-phase-flip gate fidelity and
//!   photon-loss reports,
//! - [`faraday`]: the weak-coupling / bad-cavity reflection coefficient,
//!   Faraday phases, and the twice-reflection gate built from them,
//! - [`rydberg`]: blockade potentials, collective three-pulse rotations,
//!   position-averaged couplings and geometric validity checks,
//! - [`protocols`]: photon-mediated two-ensemble gates, cluster-chain
//!   construction with Monte Carlo build-time scaling, and the
//!   measurement-assisted nonlocal CNOT.
//!
//! All states are immutable values and all random sampling goes through
//! caller-supplied seeded generators, so runs are reproducible bit for bit.

pub mod cavity;
pub mod error;
pub mod faraday;
pub mod protocols;
pub mod qsim;
pub mod rydberg;

pub use error::{Error, Result};
