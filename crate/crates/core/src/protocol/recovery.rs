use rand::Rng;

use super::{CorrectionTable, SecretAmplitudes};
use crate::quantum::{
    fidelity_up_to_phase, project, sample_measurement, Basis, Correction, Projection, PureState,
    Site,
};
use crate::Result;

/// Outcome of the cooperation stage for one set of X results.
#[derive(Debug, Clone)]
pub struct RecoveryBranch {
    /// X digits over the table's non-receiver atoms (`+ = 0`, `− = 1`).
    pub x_outcome: Vec<usize>,
    /// Per-user conditional probabilities, in the same order.
    pub x_probabilities: Vec<f64>,
    pub correction: Correction,
    /// Receiver's atom after the correction.
    pub state: PureState,
    pub fidelity: f64,
}

impl RecoveryBranch {
    pub fn probability(&self) -> f64 {
        self.x_probabilities.iter().product()
    }

    pub fn x_string(&self) -> String {
        Basis::X.format(&self.x_outcome)
    }
}

fn finish(
    receiver_state: PureState,
    alice: &[usize],
    x_outcome: Vec<usize>,
    x_probabilities: Vec<f64>,
    table: &CorrectionTable,
    secret: &SecretAmplitudes,
) -> Result<RecoveryBranch> {
    let site = Site::Atom(table.receiver());
    let correction = table.lookup(alice, &x_outcome)?;
    let mut state = receiver_state;
    state.apply_unitary(&correction.matrix(), &[site])?;
    let fidelity = fidelity_up_to_phase(&secret.state(site), &state)?;
    Ok(RecoveryBranch {
        x_outcome,
        x_probabilities,
        correction,
        state,
        fidelity,
    })
}

/// X-measure the non-receivers one at a time along `x`, returning the
/// receiver's state and the conditional probabilities, or `None` when the
/// sequence is impossible.
fn measure_sequence(
    residual: &PureState,
    atoms: &[u32],
    x: &[usize],
) -> Result<Option<(PureState, Vec<f64>)>> {
    let mut state = residual.clone();
    let mut probs = Vec::with_capacity(atoms.len());
    for (&atom, &digit) in atoms.iter().zip(x) {
        match project(&state, &[Site::Atom(atom)], Basis::X, &[digit])? {
            Projection::Zero => return Ok(None),
            Projection::Collapsed {
                probability,
                state: next,
            } => {
                probs.push(probability);
                state = next;
            }
        }
    }
    Ok(Some((state, probs)))
}

/// Every X outcome of the non-receivers, with the table correction applied.
pub fn recover_exhaustive(
    residual: &PureState,
    alice: &[usize],
    table: &CorrectionTable,
    secret: &SecretAmplitudes,
) -> Result<Vec<RecoveryBranch>> {
    let atoms = table.x_atoms();
    let mut out = Vec::with_capacity(1 << atoms.len());
    for k in 0..(1usize << atoms.len()) {
        let x: Vec<usize> = (0..atoms.len())
            .map(|i| (k >> (atoms.len() - 1 - i)) & 1)
            .collect();
        if let Some((state, probs)) = measure_sequence(residual, atoms, &x)? {
            out.push(finish(state, alice, x, probs, table, secret)?);
        }
    }
    Ok(out)
}

/// Sample each non-receiver's X outcome in turn and apply the correction.
pub fn recover_sampled<R: Rng + ?Sized>(
    residual: &PureState,
    alice: &[usize],
    table: &CorrectionTable,
    secret: &SecretAmplitudes,
    rng: &mut R,
) -> Result<RecoveryBranch> {
    let mut state = residual.clone();
    let mut x = Vec::new();
    let mut probs = Vec::new();
    for &atom in table.x_atoms() {
        let (record, next) = sample_measurement(&state, &[Site::Atom(atom)], Basis::X, rng)?;
        x.push(record.outcome[0]);
        probs.push(record.probability);
        state = next;
    }
    finish(state, alice, x, probs, table, secret)
}
