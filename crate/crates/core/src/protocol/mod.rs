//! The secret-sharing protocol: layout, preparation, cavity-mediated
//! distribution, X-basis cooperation and Pauli recovery.

mod distribution;
mod layout;
mod recovery;
mod secret;
mod table;
mod transcript;

pub use distribution::{
    distribute_exhaustive, distribute_sampled, entangle, entangle_in_order, excited_population,
    prepare_initial, receiver_marginal, DistributionBranch,
};
pub use layout::PartyLayout;
pub use recovery::{recover_exhaustive, recover_sampled, RecoveryBranch};
pub use secret::SecretAmplitudes;
pub use table::{derive_correction_table, parity_rule, CorrectionTable, TableEntry};
pub use transcript::{run_full_trial, Event, Mode, Protocol, ProtocolTranscript, TranscriptLine};

/// Recovery counts as exact at or above this fidelity.
pub const RECOVERY_TOL: f64 = 1e-9;
