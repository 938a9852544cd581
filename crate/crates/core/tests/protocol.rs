mod common;

use common::*;
use qss_core::cavity::InteractionSchedule;
use qss_core::protocol::{
    derive_correction_table, distribute_exhaustive, entangle, entangle_in_order,
    excited_population, prepare_initial, receiver_marginal, recover_exhaustive, PartyLayout,
    Protocol, SecretAmplitudes, RECOVERY_TOL,
};
use qss_core::quantum::{project, Basis, Correction, PureState, Site};
use qss_core::rng::SeedTree;

fn secrets(count: u64, stream: &str) -> Vec<SecretAmplitudes> {
    (0..count)
        .map(|i| SecretAmplitudes::haar(&mut SeedTree::new(i).named(stream).rng()))
        .collect()
}

fn as_reg(state: &PureState) -> Reg {
    let labels = state
        .sites()
        .iter()
        .map(|s| match s {
            Site::Atom(a) => *a,
            other => panic!("unexpected site {other:?}"),
        })
        .collect();
    Reg {
        labels,
        amps: state.amplitudes().to_vec(),
    }
}

fn bras_z(atoms: &[u32], digits: &[usize]) -> Vec<(u32, [f64; 2])> {
    atoms
        .iter()
        .zip(digits)
        .map(|(&a, &d)| (a, if d == 0 { BRA_G } else { BRA_E }))
        .collect()
}

fn bras_x(atoms: &[u32], digits: &[usize]) -> Vec<(u32, [f64; 2])> {
    atoms
        .iter()
        .zip(digits)
        .map(|(&a, &d)| (a, if d == 0 { BRA_PLUS } else { BRA_MINUS }))
        .collect()
}

fn canonical() -> InteractionSchedule {
    InteractionSchedule::canonical()
}

#[test]
fn eeee_branch_leaves_entangled_pair() {
    let layout = PartyLayout::three_party();
    for s in secrets(20, "eeee") {
        let expected = Reg {
            labels: vec![4, 6],
            amps: vec![-s.beta, c(0.0, 0.0), c(0.0, 0.0), s.alpha],
        };
        let branches = distribute_exhaustive(
            &prepare_initial(&s, &layout).unwrap(),
            &layout,
            &canonical(),
        )
        .unwrap();
        let eeee = branches
            .iter()
            .find(|b| b.alice_string() == "eeee")
            .unwrap();
        assert!(as_reg(&eeee.residual).fidelity(&expected) >= 1.0 - 1e-10);

        let oracle = oracle_distribute(
            s.alpha,
            s.beta,
            2,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::PI,
        );
        let (p, rest) = oracle.measure_all(&bras_z(&[1, 2, 3, 5], &[1, 1, 1, 1]));
        assert!((p - 1.0 / 16.0).abs() < 1e-10);
        assert!(rest.fidelity(&expected) >= 1.0 - 1e-10);
    }
}

#[test]
fn alice_outcomes_are_uniform_and_secret_independent() {
    let layout = PartyLayout::three_party();
    for s in secrets(20, "uniform") {
        let branches = distribute_exhaustive(
            &prepare_initial(&s, &layout).unwrap(),
            &layout,
            &canonical(),
        )
        .unwrap();
        assert_eq!(branches.len(), 16);
        let oracle = oracle_distribute(
            s.alpha,
            s.beta,
            2,
            std::f64::consts::FRAC_PI_4,
            std::f64::consts::PI,
        );
        for b in &branches {
            assert!(
                (b.probability - 1.0 / 16.0).abs() < 1e-10,
                "{}",
                b.alice_string()
            );
            let (p, _) = oracle.measure_all(&bras_z(&[1, 2, 3, 5], &b.alice_outcome));
            assert!((p - b.probability).abs() < 1e-12);
        }
    }
}

#[test]
fn paper_recovery_chain() {
    let layout = PartyLayout::three_party();
    let s = SecretAmplitudes::haar(&mut SeedTree::new(99).rng());
    let z = c(0.0, 0.0);
    let (a, b) = (s.alpha, s.beta);

    let branches = distribute_exhaustive(
        &prepare_initial(&s, &layout).unwrap(),
        &layout,
        &canonical(),
    )
    .unwrap();
    let residual = &branches
        .iter()
        .find(|x| x.alice_string() == "eeee")
        .unwrap()
        .residual;
    let pair = as_reg(residual);
    // α|ee⟩ − β|gg⟩
    assert!(
        pair.fidelity(&Reg {
            labels: vec![4, 6],
            amps: vec![-b, z, z, a]
        }) >= 1.0 - 1e-10
    );
    // (1/√2)[|X+⟩(α|e⟩−β|g⟩) + |X−⟩(α|e⟩+β|g⟩)] with |X±⟩ = (|e⟩ ± |g⟩)/√2
    let h = c(H, 0.0);
    let split = {
        let minus = [-b, a];
        let plus = [b, a];
        let mut amps = vec![z; 4];
        for (atom4, (xp, xm)) in [(0usize, (h, -h)), (1, (h, h))] {
            for atom6 in 0..2 {
                amps[2 * atom4 + atom6] = h * (xp * minus[atom6] + xm * plus[atom6]);
            }
        }
        Reg {
            labels: vec![4, 6],
            amps,
        }
    };
    assert!(pair.fidelity(&split) >= 1.0 - 1e-10);

    let collapsed = project(residual, &[Site::Atom(4)], Basis::X, &[0]).unwrap();
    assert!((collapsed.probability() - 0.5).abs() < 1e-10);
    let mut atom6 = collapsed.into_state().unwrap();
    assert!(as_reg(&atom6).fidelity(&Reg::qubit(6, a, -b)) >= 1.0 - 1e-10);

    let table = derive_correction_table(&layout, &canonical(), 6).unwrap();
    assert_eq!(table.lookup_str("eeee", "+").unwrap(), Correction::Z);
    atom6.apply_unitary(&sigma_z(), &[Site::Atom(6)]).unwrap();
    assert!(as_reg(&atom6).fidelity(&Reg::qubit(6, a, b)) >= 1.0 - 1e-10);
}

/// Every branch, checked against the oracle register with the table's correction.
fn check_all_branches(n_users: u32, receiver: u32) {
    let layout = PartyLayout::new(n_users).unwrap();
    let table = derive_correction_table(&layout, &canonical(), receiver).unwrap();
    assert_eq!(table.len(), 1 << (3 * n_users - 1));
    let s = SecretAmplitudes::haar(&mut SeedTree::new(n_users as u64).named("branches").rng());
    let oracle = oracle_distribute(
        s.alpha,
        s.beta,
        n_users,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::PI,
    );
    let alice_atoms = layout.measured_atoms();
    let x_atoms = layout.non_receivers(receiver);
    for (alice, x, corr) in table.iter() {
        let mut outcomes = bras_z(&alice_atoms, alice);
        outcomes.extend(bras_x(&x_atoms, x));
        let (p, mut rest) = oracle.measure_all(&outcomes);
        assert!((p - 1.0 / table.len() as f64).abs() < 1e-10);
        let corr_matrix = match corr {
            Correction::Z => sigma_z(),
            Correction::X => sigma_x(),
            Correction::XZ => sigma_x() * sigma_z(),
            other => other.matrix(),
        };
        rest.apply(&[receiver], &corr_matrix);
        assert!(rest.fidelity(&Reg::qubit(receiver, s.alpha, s.beta)) >= 1.0 - 1e-9);
    }
}

#[test]
fn oracle_confirms_every_table_entry() {
    check_all_branches(2, 6);
    check_all_branches(2, 4);
    check_all_branches(3, 9);
    check_all_branches(3, 4);
    check_all_branches(3, 7);
}

#[test]
fn exhaustive_recovery_for_two_to_four_users() {
    for n in 2..=4u32 {
        let layout = PartyLayout::new(n).unwrap();
        let p = Protocol::new(layout, canonical(), layout.default_receiver()).unwrap();
        for s in secrets(3, "exhaustive") {
            let t = p.run_exhaustive(&s, 0).unwrap();
            assert_eq!(t.fidelities().len(), 1 << (3 * n - 1));
            assert!(t.min_fidelity() >= 1.0 - RECOVERY_TOL, "n={n}");
        }
    }
}

#[test]
fn bob_as_receiver_mirrors_charlie() {
    let layout = PartyLayout::three_party();
    let p = Protocol::new(layout, canonical(), 4).unwrap();
    assert_eq!(p.table().lookup_str("eeee", "+").unwrap(), Correction::Z);
    for s in secrets(5, "bob") {
        assert!(p.run_exhaustive(&s, 0).unwrap().min_fidelity() >= 1.0 - RECOVERY_TOL);
    }
}

#[test]
fn skipping_the_correction_costs_the_z_error_fidelity() {
    let layout = PartyLayout::three_party();
    let table = derive_correction_table(&layout, &canonical(), 6).unwrap();
    for s in secrets(10, "skip") {
        let initial = prepare_initial(&s, &layout).unwrap();
        for d in distribute_exhaustive(&initial, &layout, &canonical()).unwrap() {
            for r in recover_exhaustive(&d.residual, &d.alice_outcome, &table, &s).unwrap() {
                if r.correction != Correction::Z {
                    continue;
                }
                // undo the Z: the receiver is left with α|e⟩ − β|g⟩
                let mut st = r.state.clone();
                st.apply_unitary(&sigma_z(), &[Site::Atom(6)]).unwrap();
                let f = as_reg(&st).fidelity(&Reg::qubit(6, s.alpha, s.beta));
                let (pa, pb) = (s.alpha.norm_sqr(), s.beta.norm_sqr());
                assert!((f - (pa - pb).powi(2)).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn perturbed_schedule_degrades_recovery() {
    let layout = PartyLayout::three_party();
    let schedule =
        InteractionSchedule::from_angles(std::f64::consts::FRAC_PI_4 + 0.05, std::f64::consts::PI);
    let p = Protocol::new(layout, schedule, 6).unwrap();
    let s = secrets(1, "perturbed")[0];
    let t = p.run_exhaustive(&s, 0).unwrap();
    assert!(t.mean_fidelity() < 1.0 - 1e-4);
    assert!((t.branch_probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-10);
}

#[test]
fn receiver_marginal_hides_the_phase() {
    let layout = PartyLayout::three_party();
    for s in secrets(10, "marginal") {
        let flipped = SecretAmplitudes::new(s.alpha, -s.beta).unwrap();
        for receiver in [4, 6] {
            let a = receiver_marginal(&s, &layout, &canonical(), receiver).unwrap();
            let b = receiver_marginal(&flipped, &layout, &canonical(), receiver).unwrap();
            assert!(dist(a.entries(), b.entries()) < 1e-10);
        }
    }
}

#[test]
fn amplitude_information_reaches_the_receiver() {
    let layout = PartyLayout::three_party();
    let table = derive_correction_table(&layout, &canonical(), 6).unwrap();
    for s in secrets(10, "amplitude") {
        let initial = prepare_initial(&s, &layout).unwrap();
        for d in distribute_exhaustive(&initial, &layout, &canonical()).unwrap() {
            let pe = excited_population(&d.residual, 6).unwrap();
            // the branch correction flips the atom iff it contains X
            let corr = table.lookup(&d.alice_outcome, &[0]).unwrap();
            let expected = if corr.has_x() {
                s.beta.norm_sqr()
            } else {
                s.alpha.norm_sqr()
            };
            assert!((pe - expected).abs() < 1e-10, "{}", d.alice_string());
        }
    }
}

#[test]
fn cavity_pairs_commute() {
    let layout = PartyLayout::new(3).unwrap();
    let s = secrets(1, "order")[0];
    let initial = prepare_initial(&s, &layout).unwrap();
    let forward = entangle(&initial, &layout, &canonical()).unwrap();
    for order in [[2, 1, 0], [1, 0, 2], [0, 2, 1]] {
        let other = entangle_in_order(&initial, &layout, &canonical(), &order).unwrap();
        assert!(as_reg(&forward).fidelity(&as_reg(&other)) >= 1.0 - 1e-12);
        let d = forward
            .amplitudes()
            .iter()
            .zip(other.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(d < 1e-12);
    }
}

#[test]
fn four_user_state_matches_kronecker_oracle() {
    let layout = PartyLayout::new(3).unwrap();
    let s = secrets(1, "kron")[0];
    let lib = entangle(
        &prepare_initial(&s, &layout).unwrap(),
        &layout,
        &canonical(),
    )
    .unwrap();
    let oracle = oracle_distribute(
        s.alpha,
        s.beta,
        3,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::PI,
    );
    let d = lib
        .amplitudes()
        .iter()
        .zip(&oracle.amps)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    assert!(d < 1e-12);
}

#[test]
fn tables_for_larger_groups_have_expected_size() {
    for n in 2..=4u32 {
        let layout = PartyLayout::new(n).unwrap();
        let t = derive_correction_table(&layout, &canonical(), layout.default_receiver()).unwrap();
        assert_eq!(t.len(), 1 << (2 * n + n - 1));
        assert_eq!(t.alice_atoms().len(), 2 * n as usize);
    }
}
