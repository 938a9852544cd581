use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMatrix, ONE, ZERO};

/// σz in the convention `|e⟩ → |e⟩`, `|g⟩ → −|g⟩`; with `|g⟩ = 0` this is diag(−1, +1).
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE])
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

/// Rows are `⟨X+|` and `⟨X−|` with `|X±⟩ = (|e⟩ ± |g⟩)/√2`, so a Z readout
/// of digit 0/1 after this change of basis is an X readout of +/−.
pub fn basis_change_x_to_z() -> CMatrix {
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    CMatrix::from_row_slice(2, 2, &[h, h, -h, h])
}

/// Phase gate in the same convention: `|e⟩ → |e⟩`, `|g⟩ → i|g⟩`, so `S² = σz`.
pub fn phase_s() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 1.0), ZERO, ZERO, ONE])
}

/// Single-qubit recovery operations. Labels read as operator products, so
/// `XZ` is X·Z (Z acts first) and `SX` is S·X (X acts first).
///
/// An even number of cavity swaps leaves a Pauli frame; an odd number leaves
/// an extra relative phase of ±i that needs `S` or `S†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Correction {
    I,
    Z,
    X,
    XZ,
    S,
    Sdg,
    SX,
    SdgX,
}

/// The recovery operations are Paulis whenever the user count is even.
pub type Pauli = Correction;

impl Correction {
    /// Candidate order used for deterministic tie-breaking.
    pub const ALL: [Correction; 8] = [
        Correction::I,
        Correction::Z,
        Correction::X,
        Correction::XZ,
        Correction::S,
        Correction::Sdg,
        Correction::SX,
        Correction::SdgX,
    ];

    pub const PAULIS: [Correction; 4] =
        [Correction::I, Correction::Z, Correction::X, Correction::XZ];

    pub fn matrix(self) -> CMatrix {
        let s = phase_s();
        match self {
            Correction::I => CMatrix::identity(2, 2),
            Correction::Z => pauli_z(),
            Correction::X => pauli_x(),
            Correction::XZ => pauli_x() * pauli_z(),
            Correction::S => s,
            Correction::Sdg => s.adjoint(),
            Correction::SX => s * pauli_x(),
            Correction::SdgX => s.adjoint() * pauli_x(),
        }
    }

    /// Whether the operation contains a bit flip.
    pub fn has_x(self) -> bool {
        matches!(
            self,
            Correction::X | Correction::XZ | Correction::SX | Correction::SdgX
        )
    }

    pub fn is_pauli(self) -> bool {
        Self::PAULIS.contains(&self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Correction::I => "I",
            Correction::Z => "Z",
            Correction::X => "X",
            Correction::XZ => "XZ",
            Correction::S => "S",
            Correction::Sdg => "Sdg",
            Correction::SX => "SX",
            Correction::SdgX => "SdgX",
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Correction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Correction::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown correction label {s:?}"))
    }
}
