//! Quantum-enhanced simulated annealing (QESA) for the maximum independent
//! set problem.
//!
//! The crate is organized around the four stages of the pipeline:
//!
//! - [`graph`]: King's-graph and unit-disk graph construction, an exact MIS
//!   oracle, and solution-quality metrics (approximation ratio, Hamming
//!   distance).
//! - [`annealer`]: the classical half of QESA — the Rydberg-style simulated
//!   annealer with its three-rule proposal kernel, Metropolis acceptance,
//!   cooling schedules, and warm-start initialization.
//! - [`quantum`]: desk-scale exact state-vector simulation of the Rydberg
//!   Hamiltonian under adiabatic-sweep and quench pulse schedules, producing
//!   measurement samples that seed the annealer.
//! - [`analysis`]: epoch-ratio statistics, scaling-law fits, and
//!   compute-budget extrapolation of solvable graph size.
//!
//! [`cli`] wires the stages together behind a file-based command-line
//! pipeline; [`io`] holds the on-disk formats shared by the commands.

pub mod analysis;
pub mod annealer;
pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod quantum;

pub use error::{Error, Result};
