//! Simulation of quantum secret sharing by cavity-mediated entanglement swapping.
//!
//! The crate is organised bottom-up:
//!
//! - [`quantum`]: dense pure states over labelled sites, unitaries on
//!   site subsets, Z/X projective measurement, partial trace and fidelity.
//! - [`cavity`]: the driven two-atom/cavity Hamiltonian in a rotating frame,
//!   the effective two-atom evolution, and a validation ladder comparing them.
//! - [`protocol`]: party layouts, state preparation, distribution,
//!   correction-table derivation and recovery, exhaustive or sampled.
//! - [`security`]: participant-adversary scenarios and check rounds.
//!
//! Basis encoding is fixed: `|g⟩ = 0`, `|e⟩ = 1`, and registers are
//! big-endian over ascending site labels.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cavity;
pub mod error;
pub mod linalg;
pub mod protocol;
pub mod quantum;
pub mod rng;
pub mod security;

pub use error::{QssError, Result};

/// Crate version embedded into every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
