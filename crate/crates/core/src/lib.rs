//! Simulation and analysis of superdense teleportation (SDT) of equimodular qudits.
//!
//! - [`qcore`]: states, operators, measurement and fidelity on small Hilbert spaces
//! - [`protocols`]: exact SDT, qubit teleportation and RSP runs, resource accounting
//! - [`expsim`]: crosstalk noise, tomography count sampling and fringe scans
//! - [`tomography`]: maximum-likelihood reconstruction, correction and phase extraction
//! - [`infogeo`]: classical fidelity limits, state-space volumes and packing bounds
//! - [`pipeline`]: encode → noise → counts → reconstruct → report

pub mod error;
pub mod expsim;
pub mod infogeo;
pub mod pipeline;
pub mod protocols;
pub mod qcore;
pub mod tomography;

pub use error::{Error, Result};
