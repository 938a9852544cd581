//! Dense pure-state linear algebra over labelled registers.

mod density;
mod gates;
mod measure;
mod state;

pub use density::{partial_trace, DensityMatrix};
pub use gates::{basis_change_x_to_z, pauli_x, pauli_z, phase_s, Correction, Pauli};
pub use measure::{
    born_distribution, project, sample_measurement, Basis, MeasurementRecord, Projection,
    ZERO_PROBABILITY,
};
pub use state::{fidelity_up_to_phase, tensor, PureState, Site, EXCITED, GROUND};

/// Tolerance for validity checks (normalization, unitarity, Hermiticity).
pub const CHECK_TOL: f64 = 1e-10;
/// Tolerance for algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
