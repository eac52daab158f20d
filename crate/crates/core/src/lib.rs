//! Bound-state quantum phase transition in the delocalized regime of the
//! ohmic spin-boson model.
//!
//! The crate solves the variational polaron transformation, locates the
//! single-excitation bound state and its critical coupling, evaluates the
//! two-branch ground energy, sweeps the phase diagram, and integrates the
//! exact zero-temperature spin dynamics for a displaced-vacuum reservoir.
//! [`oracle`] holds brute-force cross-checks on a discretized bath.
//!
//! Energies are in units of the cutoff `ω_c` and times in `1/ω_c`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod oracle;
pub mod phasemap;
pub mod quad;
pub mod spectral;
pub mod spectrum;
pub mod variational;

pub use error::{Error, Result};
pub use spectral::ModelParams;
