//! Weak (partial-collapse) measurement of a polarization qubit and its
//! probabilistic reversal.
//!
//! The crate is organised bottom-up:
//!
//! * [`qubit`] holds exact 2×2 linear algebra: pure states, density
//!   matrices, measurement operators, Bloch vectors and fidelities.
//! * [`measurement`] builds the click/no-click operators, the
//!   flip-measure-flip reversal and seeded trajectory samplers.
//! * [`tomography`] simulates projective counts and reconstructs states
//!   (linear inversion, maximum likelihood) and processes (χ-matrix).
//! * [`info`] computes estimation fidelities of the two guessing strategies.
//! * [`harness`] wires everything into reproducible experiments and the CLI.

pub mod error;
pub mod harness;
pub mod info;
pub mod measurement;
pub mod optim;
pub mod qubit;
pub mod rng;
pub mod tomography;

pub use error::{Error, Result};
