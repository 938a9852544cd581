//! Property strategies and checks shared by the invariant suites.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use qss_core::cavity::{drive_hamiltonian, InteractionSchedule};
use qss_core::linalg::expm_hermitian;
use qss_core::protocol::{receiver_marginal, PartyLayout, SecretAmplitudes};
use qss_core::quantum::{born_distribution, project, Basis, PureState, Site};

use super::*;

pub const CASES: u32 = 100;

pub fn config() -> ProptestConfig {
    ProptestConfig {
        cases: CASES,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

pub fn complex() -> impl Strategy<Value = C> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| c(re, im))
}

/// Normalized state on atoms `1..=n` for `n` in `1..=5`.
pub fn state() -> impl Strategy<Value = PureState> {
    (1usize..=5)
        .prop_flat_map(|n| prop::collection::vec(complex(), 1 << n))
        .prop_filter("nonzero", |v| {
            v.iter().map(|z| z.norm_sqr()).sum::<f64>() > 1e-3
        })
        .prop_map(|v| {
            let n = v.len().trailing_zeros() as usize;
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let amps = v.into_iter().map(|z| z / norm).collect();
            let sites = (1..=n as u32).map(Site::Atom).collect();
            PureState::new(sites, vec![2; n], amps).unwrap()
        })
}

/// `exp(−iH)` for a random Hermitian `H` on `k` qubits.
pub fn unitary(k: usize) -> impl Strategy<Value = M> {
    let d = 1 << k;
    prop::collection::vec(complex(), d * d).prop_map(move |v| {
        let a = M::from_vec(d, d, v);
        let h = (&a + a.adjoint()) * c(0.5, 0.0);
        taylor_expm(&(h * c(0.0, -1.0)))
    })
}

/// A state with an ordered target subset of size `k ≤ 3` and a unitary for it.
pub fn state_targets_unitary() -> impl Strategy<Value = (PureState, Vec<Site>, M)> {
    state().prop_flat_map(|s| {
        let n = s.sites().len();
        (1..=n.min(3)).prop_flat_map(move |k| {
            let sites = s.sites().to_vec();
            (
                Just(s.clone()),
                Just(sites)
                    .prop_shuffle()
                    .prop_map(move |v| v[..k].to_vec()),
                unitary(k),
            )
        })
    })
}

pub fn secret_uniforms() -> impl Strategy<Value = [f64; 4]> {
    [0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64]
}

fn amp_dist(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn check_norm((s, targets, u): (PureState, Vec<Site>, M)) -> Result<(), TestCaseError> {
    let mut t = s;
    t.apply_unitary(&u, &targets).unwrap();
    prop_assert!((t.norm_sqr() - 1.0).abs() < 1e-10);
    Ok(())
}

pub fn check_born(s: PureState, targets: Vec<Site>, basis: Basis) -> Result<(), TestCaseError> {
    let dist = born_distribution(&s, &targets, basis).unwrap();
    prop_assert_eq!(dist.len(), 1 << targets.len());
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    prop_assert!((total - 1.0).abs() < 1e-10);
    for (digits, p) in &dist {
        prop_assert!(*p >= 0.0);
        let proj = project(&s, &targets, basis, digits).unwrap();
        prop_assert!((proj.probability() - p).abs() < 1e-10);
    }
    Ok(())
}

pub fn check_commute(s: PureState, u: M, v: M) -> Result<(), TestCaseError> {
    prop_assume!(s.sites().len() >= 2);
    let (a, b) = (s.sites()[0], s.sites()[s.sites().len() - 1]);
    let mut uv = s.clone();
    uv.apply_unitary(&u, &[a]).unwrap();
    uv.apply_unitary(&v, &[b]).unwrap();
    let mut vu = s;
    vu.apply_unitary(&v, &[b]).unwrap();
    vu.apply_unitary(&u, &[a]).unwrap();
    prop_assert!(amp_dist(uv.amplitudes(), vu.amplitudes()) < 1e-10);
    Ok(())
}

pub fn check_drive_identity(omega: f64) -> Result<(), TestCaseError> {
    let t = std::f64::consts::PI / omega;
    let lib = expm_hermitian(&drive_hamiltonian(omega), t);
    prop_assert!(dist(&lib, &id(4)) < 1e-10);
    let reference = taylor_expm(&(drive_from_ladder_ops(omega) * c(0.0, -t)));
    prop_assert!(dist(&reference, &id(4)) < 1e-10);
    Ok(())
}

pub fn check_no_signaling(u: [f64; 4], n: u32, pick: usize) -> Result<(), TestCaseError> {
    let (alpha, beta) = secret_from_uniforms(u);
    let s = SecretAmplitudes::new(alpha, beta).unwrap();
    let flipped = SecretAmplitudes::new(alpha, -beta).unwrap();
    let layout = PartyLayout::new(n).unwrap();
    let receivers = layout.distributed_atoms();
    let receiver = receivers[pick % receivers.len()];
    let schedule = InteractionSchedule::canonical();
    let a = receiver_marginal(&s, &layout, &schedule, receiver).unwrap();
    let b = receiver_marginal(&flipped, &layout, &schedule, receiver).unwrap();
    prop_assert!(dist(a.entries(), b.entries()) < 1e-10);
    Ok(())
}

pub fn check_against_register(
    (s, targets, u): (PureState, Vec<Site>, M),
) -> Result<(), TestCaseError> {
    let mut lib = s.clone();
    lib.apply_unitary(&u, &targets).unwrap();
    let labels: Vec<u32> = s.sites().iter().map(|x| x.atom_index().unwrap()).collect();
    let mut reg = Reg {
        labels,
        amps: s.amplitudes().to_vec(),
    };
    let t: Vec<u32> = targets.iter().map(|x| x.atom_index().unwrap()).collect();
    reg.apply(&t, &u);
    prop_assert!(amp_dist(lib.amplitudes(), &reg.amps) < 1e-10);
    Ok(())
}
