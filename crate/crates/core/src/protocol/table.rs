use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::distribution::{entangle, prepare_initial};
use super::{PartyLayout, SecretAmplitudes, RECOVERY_TOL};
use crate::cavity::InteractionSchedule;
use crate::quantum::{
    fidelity_up_to_phase, project, Basis, Correction, Projection, PureState, Site,
};
use crate::rng::SeedTree;
use crate::{QssError, Result};

/// Fixed seed for the two probe secrets used to build tables.
const PROBE_SEED: u64 = 0x7AB1_E5EC;

/// Receiver's correction for every (Alice outcome, non-receiver X outcomes) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TableExport", try_from = "TableExport")]
pub struct CorrectionTable {
    n_users: u32,
    receiver: u32,
    alice_atoms: Vec<u32>,
    x_atoms: Vec<u32>,
    entries: BTreeMap<(Vec<usize>, Vec<usize>), Correction>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub alice: String,
    pub x: String,
    #[serde(rename = "pauli")]
    pub correction: Correction,
}

#[derive(Serialize, Deserialize)]
struct TableExport {
    n_users: u32,
    receiver: u32,
    alice_atoms: Vec<u32>,
    x_atoms: Vec<u32>,
    entries: Vec<TableEntry>,
}

impl From<CorrectionTable> for TableExport {
    fn from(t: CorrectionTable) -> Self {
        let entries = t.entries();
        Self {
            n_users: t.n_users,
            receiver: t.receiver,
            alice_atoms: t.alice_atoms,
            x_atoms: t.x_atoms,
            entries,
        }
    }
}

impl TryFrom<TableExport> for CorrectionTable {
    type Error = String;

    fn try_from(e: TableExport) -> std::result::Result<Self, Self::Error> {
        let mut entries = BTreeMap::new();
        for entry in e.entries {
            let a = Basis::Z
                .parse(&entry.alice)
                .ok_or_else(|| format!("bad alice outcome {:?}", entry.alice))?;
            let x = Basis::X
                .parse(&entry.x)
                .ok_or_else(|| format!("bad x outcome {:?}", entry.x))?;
            if a.len() != e.alice_atoms.len() || x.len() != e.x_atoms.len() {
                return Err(format!(
                    "entry {}/{} has the wrong length",
                    entry.alice, entry.x
                ));
            }
            entries.insert((a, x), entry.correction);
        }
        Ok(Self {
            n_users: e.n_users,
            receiver: e.receiver,
            alice_atoms: e.alice_atoms,
            x_atoms: e.x_atoms,
            entries,
        })
    }
}

impl CorrectionTable {
    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn receiver(&self) -> u32 {
        self.receiver
    }

    pub fn alice_atoms(&self) -> &[u32] {
        &self.alice_atoms
    }

    pub fn x_atoms(&self) -> &[u32] {
        &self.x_atoms
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, alice: &[usize], x: &[usize]) -> Result<Correction> {
        self.entries
            .get(&(alice.to_vec(), x.to_vec()))
            .copied()
            .ok_or_else(|| QssError::MissingEntry {
                alice: Basis::Z.format(alice),
                x: Basis::X.format(x),
            })
    }

    pub fn lookup_str(&self, alice: &str, x: &str) -> Result<Correction> {
        let missing = || QssError::MissingEntry {
            alice: alice.into(),
            x: x.into(),
        };
        let a = Basis::Z.parse(alice).ok_or_else(missing)?;
        let xs = Basis::X.parse(x).ok_or_else(missing)?;
        self.lookup(&a, &xs)
    }

    /// Entries in lexicographic digit order (`g` before `e`, `+` before `-`).
    pub fn entries(&self) -> Vec<TableEntry> {
        self.entries
            .iter()
            .map(|((a, x), p)| TableEntry {
                alice: Basis::Z.format(a),
                x: Basis::X.format(x),
                correction: *p,
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[usize], &[usize], Correction)> {
        self.entries
            .iter()
            .map(|((a, x), p)| (a.as_slice(), x.as_slice(), *p))
    }
}

fn digits(k: usize, width: usize) -> Vec<usize> {
    (0..width).map(|i| (k >> (width - 1 - i)) & 1).collect()
}

/// Receiver's atom after Alice's outcome and the non-receivers' X outcomes.
pub(crate) fn receiver_state(
    evolved: &PureState,
    alice_sites: &[Site],
    alice: &[usize],
    x_sites: &[Site],
    x: &[usize],
) -> Result<Option<PureState>> {
    let Projection::Collapsed {
        state: residual, ..
    } = project(evolved, alice_sites, Basis::Z, alice)?
    else {
        return Ok(None);
    };
    Ok(project(&residual, x_sites, Basis::X, x)?.into_state())
}

/// Build the table by brute force: for every branch, find the first correction in
/// `I, Z, X, XZ, S, Sdg, SX, SdgX` that restores two independent random secrets exactly.
pub fn derive_correction_table(
    layout: &PartyLayout,
    schedule: &InteractionSchedule,
    receiver: u32,
) -> Result<CorrectionTable> {
    layout.check_receiver(receiver)?;
    let alice_atoms = layout.measured_atoms();
    let x_atoms = layout.non_receivers(receiver);
    let alice_sites = PartyLayout::sites(&alice_atoms);
    let x_sites = PartyLayout::sites(&x_atoms);
    let target = Site::Atom(receiver);

    let seeds = SeedTree::new(PROBE_SEED);
    let probes: Vec<(SecretAmplitudes, PureState)> = (0..2)
        .map(|k| {
            let secret = SecretAmplitudes::haar(&mut seeds.child(k).rng());
            let evolved = entangle(&prepare_initial(&secret, layout)?, layout, schedule)?;
            Ok((secret, evolved))
        })
        .collect::<Result<_>>()?;

    type Row = ((Vec<usize>, Vec<usize>), Correction);
    let n_alice = 1usize << alice_atoms.len();
    let n_x = 1usize << x_atoms.len();
    let rows = (0..n_alice)
        .into_par_iter()
        .map(|ka| -> Result<Vec<Row>> {
            let alice = digits(ka, alice_atoms.len());
            (0..n_x)
                .map(|kx| {
                    let x = digits(kx, x_atoms.len());
                    let fail = || QssError::NoCorrection {
                        alice: Basis::Z.format(&alice),
                        x: Basis::X.format(&x),
                    };
                    let mut states = Vec::with_capacity(probes.len());
                    for (secret, evolved) in &probes {
                        let st = receiver_state(evolved, &alice_sites, &alice, &x_sites, &x)?
                            .ok_or_else(fail)?;
                        states.push((secret.state(target), st));
                    }
                    let pauli = Correction::ALL
                        .into_iter()
                        .find(|p| {
                            states.iter().all(|(want, got)| {
                                let mut fixed = got.clone();
                                fixed.apply_matrix(&p.matrix(), &[target]).is_ok()
                                    && fidelity_up_to_phase(want, &fixed)
                                        .is_ok_and(|f| f >= 1.0 - RECOVERY_TOL)
                            })
                        })
                        .ok_or_else(fail)?;
                    Ok(((alice.clone(), x), pauli))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(CorrectionTable {
        n_users: layout.n_users(),
        receiver,
        alice_atoms,
        x_atoms,
        entries: rows.into_iter().flatten().collect(),
    })
}

/// Closed-form rule for the table, derived from the swap algebra and used
/// only to cross-check the brute-force build.
///
/// Track the secret's `|e⟩` branch along the chain: after pair `k` the GHZ
/// value is `1 ⊕ P_k`, where `P_k` is the XOR of the measured parities of
/// pairs `1..=k`. Pair `k` contributes a relative phase `−i` to the `|g⟩`
/// branch when Alice saw the chain value on its first atom and `+i`
/// otherwise; each `−` X outcome contributes `−1`. The receiver needs a bit
/// flip when its chain value for the `|e⟩` branch is `g`.
pub fn parity_rule(
    layout: &PartyLayout,
    receiver: u32,
    alice: &[usize],
    x: &[usize],
) -> Correction {
    let measured = layout.measured_atoms();
    let bit = |atom: u32| {
        alice[measured
            .iter()
            .position(|&a| a == atom)
            .expect("measured atom")]
    };
    let n = layout.n_users() as usize;
    let receiver_link = if receiver == layout.default_receiver() {
        n
    } else {
        ((receiver - 1) / 3) as usize
    };

    // relative phase as a power of i, modulo 4
    let mut phase = 0usize;
    let mut parity = 0usize;
    let mut receiver_value = 1;
    for (k, [first, second]) in layout.cavity_pairs().into_iter().enumerate() {
        let chain = 1 ^ parity;
        phase += if bit(first) == chain { 3 } else { 1 };
        parity ^= bit(first) ^ bit(second);
        if k + 1 == receiver_link {
            receiver_value = 1 ^ parity;
        }
    }
    phase += 2 * x.iter().sum::<usize>();
    let flip = receiver_value == 0;
    match (phase % 4, flip) {
        (0, false) => Correction::I,
        (2, false) => Correction::Z,
        (3, false) => Correction::S,
        (1, false) => Correction::Sdg,
        (0, true) => Correction::X,
        (2, true) => Correction::XZ,
        (3, true) => Correction::SX,
        (_, true) => Correction::SdgX,
        _ => unreachable!(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_party_table_has_paper_entries() {
        let layout = PartyLayout::three_party();
        let t = derive_correction_table(&layout, &InteractionSchedule::canonical(), 6).unwrap();
        assert_eq!(t.len(), 32);
        assert_eq!(t.lookup_str("eeee", "+").unwrap(), Correction::Z);
        assert_eq!(t.lookup_str("eeee", "-").unwrap(), Correction::I);
        assert!(t.iter().all(|(_, _, c)| c.is_pauli()));
    }

    #[test]
    fn parity_rule_matches_brute_force() {
        for n in 2..=4 {
            let layout = PartyLayout::new(n).unwrap();
            for receiver in layout.distributed_atoms() {
                let t =
                    derive_correction_table(&layout, &InteractionSchedule::canonical(), receiver)
                        .unwrap();
                for (a, x, c) in t.iter() {
                    assert_eq!(
                        parity_rule(&layout, receiver, a, x),
                        c,
                        "n={n} r={receiver} {a:?} {x:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn missing_entry_is_an_error() {
        let t = derive_correction_table(
            &PartyLayout::three_party(),
            &InteractionSchedule::canonical(),
            6,
        )
        .unwrap();
        assert!(matches!(
            t.lookup_str("eee", "+"),
            Err(QssError::MissingEntry { .. })
        ));
        assert!(matches!(
            t.lookup(&[1, 1, 1, 1], &[0, 0]),
            Err(QssError::MissingEntry { .. })
        ));
    }

    #[test]
    fn json_round_trip() {
        let t = derive_correction_table(
            &PartyLayout::three_party(),
            &InteractionSchedule::canonical(),
            4,
        )
        .unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains(r#"{"alice":"eeee","x":"+","pauli":"Z"}"#));
        let back: CorrectionTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
    }
}
