use rand::Rng;
use rayon::prelude::*;

use super::{PartyLayout, SecretAmplitudes};
use crate::cavity::{effective_unitary, InteractionSchedule};
use crate::quantum::{
    born_distribution, partial_trace, project, sample_measurement, tensor, Basis, DensityMatrix,
    Projection, PureState, Site,
};
use crate::Result;

/// `(α|e⟩+β|g⟩)₁ ⊗ GHZ triples ⊗ Bell pair` over atoms `1..=3n`.
pub fn prepare_initial(secret: &SecretAmplitudes, layout: &PartyLayout) -> Result<PureState> {
    let mut parts = vec![secret.state(Site::Atom(layout.secret_atom()))];
    for triple in layout.ghz_triples() {
        parts.push(PureState::cat(&PartyLayout::sites(&triple))?);
    }
    parts.push(PureState::cat(&PartyLayout::sites(&layout.bell_pair()))?);
    tensor(&parts)
}

/// Apply the effective two-atom evolution to every cavity pair.
pub fn entangle(
    state: &PureState,
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
) -> Result<PureState> {
    let order: Vec<usize> = (0..layout.cavity_pairs().len()).collect();
    entangle_in_order(state, layout, schedule, &order)
}

/// As [`entangle`], visiting the cavity pairs in `order`.
pub fn entangle_in_order(
    state: &PureState,
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
    order: &[usize],
) -> Result<PureState> {
    state.check_normalized()?;
    let u = effective_unitary(schedule);
    let pairs = layout.cavity_pairs();
    let mut out = state.clone();
    for &k in order {
        let [a, b] = pairs[k];
        out.apply_unitary(&u, &[Site::Atom(a), Site::Atom(b)])?;
    }
    Ok(out)
}

/// One outcome of Alice's Z measurement on the cavity atoms.
#[derive(Debug, Clone)]
pub struct DistributionBranch {
    /// Digits over [`PartyLayout::measured_atoms`], `g = 0`, `e = 1`.
    pub alice_outcome: Vec<usize>,
    pub probability: f64,
    /// State of the distributed atoms.
    pub residual: PureState,
}

impl DistributionBranch {
    pub fn alice_string(&self) -> String {
        Basis::Z.format(&self.alice_outcome)
    }
}

/// Entangle, then enumerate every Alice outcome with nonzero probability,
/// in lexicographic outcome order.
pub fn distribute_exhaustive(
    state: &PureState,
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
) -> Result<Vec<DistributionBranch>> {
    let evolved = entangle(state, layout, schedule)?;
    let measured = PartyLayout::sites(&layout.measured_atoms());
    let count = 1usize << measured.len();
    let branches = (0..count)
        .into_par_iter()
        .map(|k| -> Result<Option<DistributionBranch>> {
            let digits: Vec<usize> = (0..measured.len())
                .map(|i| (k >> (measured.len() - 1 - i)) & 1)
                .collect();
            Ok(match project(&evolved, &measured, Basis::Z, &digits)? {
                Projection::Zero => None,
                Projection::Collapsed { probability, state } => Some(DistributionBranch {
                    alice_outcome: digits,
                    probability,
                    residual: state,
                }),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(branches.into_iter().flatten().collect())
}

/// Entangle, then sample one Alice outcome.
pub fn distribute_sampled<R: Rng + ?Sized>(
    state: &PureState,
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
    rng: &mut R,
) -> Result<DistributionBranch> {
    let evolved = entangle(state, layout, schedule)?;
    let measured = PartyLayout::sites(&layout.measured_atoms());
    let (record, residual) = sample_measurement(&evolved, &measured, Basis::Z, rng)?;
    Ok(DistributionBranch {
        alice_outcome: record.outcome,
        probability: record.probability,
        residual,
    })
}

/// Reduced state of one user's atom after the cavity interactions and
/// before any announcement (Alice's outcome averaged over).
pub fn receiver_marginal(
    secret: &SecretAmplitudes,
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
    receiver: u32,
) -> Result<DensityMatrix> {
    let evolved = entangle(&prepare_initial(secret, layout)?, layout, schedule)?;
    partial_trace(&evolved, &[Site::Atom(receiver)])
}

/// `P(|e⟩)` for one distributed atom in a residual state.
pub fn excited_population(residual: &PureState, atom: u32) -> Result<f64> {
    Ok(born_distribution(residual, &[Site::Atom(atom)], Basis::Z)?[1].1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO;
    use crate::quantum::fidelity_up_to_phase;
    use num_complex::Complex64;

    #[test]
    fn alpha_one_gives_four_terms() {
        let s = SecretAmplitudes::new(Complex64::new(1.0, 0.0), ZERO).unwrap();
        let psi = prepare_initial(&s, &PartyLayout::three_party()).unwrap();
        assert_eq!(psi.len(), 64);
        let nz: Vec<_> = psi.amplitudes().iter().filter(|z| z.norm() > 0.0).collect();
        assert_eq!(nz.len(), 4);
        assert!(nz
            .iter()
            .all(|z| (**z - Complex64::new(0.5, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn gggg_branch_matches_eeee_up_to_phase() {
        let s = SecretAmplitudes::new(Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)).unwrap();
        let layout = PartyLayout::three_party();
        let psi = prepare_initial(&s, &layout).unwrap();
        let branches =
            distribute_exhaustive(&psi, &layout, &InteractionSchedule::canonical()).unwrap();
        let find = |o: &str| branches.iter().find(|b| b.alice_string() == o).unwrap();
        let (e, g) = (find("eeee"), find("gggg"));
        // −α|ee⟩ + β|gg⟩ equals α|ee⟩ − β|gg⟩ up to a sign
        assert!((fidelity_up_to_phase(&e.residual, &g.residual).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_input_rejected() {
        let s = PureState::basis(&[Site::Atom(1)], &[2], &[0]).unwrap();
        let doubled = PureState::new(
            vec![Site::Atom(1)],
            vec![2],
            s.amplitudes().iter().map(|z| z * 2.0).collect(),
        )
        .unwrap();
        assert!(entangle(
            &doubled,
            &PartyLayout::three_party(),
            &InteractionSchedule::canonical()
        )
        .is_err());
    }
}
