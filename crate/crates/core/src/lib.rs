//! Indirect thermometry of two trapped-ion motional modes coupled by a
//! beam-splitter interaction.
//!
//! * [`gaussian`]: covariance matrices, squeezing and the coupling.
//! * [`separability`]: scalar physicality and entanglement bounds.
//! * [`phonon`]: probe-mode phonon statistics and sampling.
//! * [`fock`]: truncated Fock-space reference simulation.
//! * [`thermometry`]: Fisher information and Cramér–Rao bounds.
//! * [`cli`]: command-line front end.

pub mod cli;
pub mod constants;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod phonon;
#[cfg(test)]
mod properties;
pub mod separability;
pub mod thermometry;

pub use error::{Error, Result};
