use serde::{Deserialize, Serialize};

use crate::quantum::Site;
use crate::{QssError, Result};

/// Atom bookkeeping for `n_users` users (Alice not counted) and `3n` atoms.
///
/// Atom 1 carries the secret, `(2,3,4)`, `(5,6,7)`, ... are GHZ triples,
/// `(3n−1, 3n)` is a Bell pair. Cavity pairs are `(1,2)` and
/// `(3k−3, 3k−1)` for `k = 2..=n`; user `k` receives atom `3k+1` for
/// `k < n` and the last user receives atom `3n`. For two users this is
/// pairs `(1,2)`, `(3,5)` and distributed atoms 4 and 6.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyLayout {
    n_users: u32,
}

impl PartyLayout {
    pub fn new(n_users: u32) -> Result<Self> {
        if n_users < 2 {
            return Err(QssError::InvalidParameter(format!(
                "need at least 2 users, got {n_users}"
            )));
        }
        if n_users > 6 {
            return Err(QssError::InvalidParameter(format!(
                "{n_users} users exceeds the dense-simulation limit"
            )));
        }
        Ok(Self { n_users })
    }

    pub fn three_party() -> Self {
        Self { n_users: 2 }
    }

    pub fn n_users(&self) -> u32 {
        self.n_users
    }

    pub fn atom_count(&self) -> u32 {
        3 * self.n_users
    }

    pub fn secret_atom(&self) -> u32 {
        1
    }

    pub fn ghz_triples(&self) -> Vec<[u32; 3]> {
        (2..=self.n_users)
            .map(|k| [3 * k - 4, 3 * k - 3, 3 * k - 2])
            .collect()
    }

    pub fn bell_pair(&self) -> [u32; 2] {
        let n = self.n_users;
        [3 * n - 1, 3 * n]
    }

    pub fn cavity_pairs(&self) -> Vec<[u32; 2]> {
        std::iter::once([1, 2])
            .chain((2..=self.n_users).map(|k| [3 * k - 3, 3 * k - 1]))
            .collect()
    }

    /// Atoms Alice keeps and measures, ascending.
    pub fn measured_atoms(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.cavity_pairs().into_iter().flatten().collect();
        v.sort_unstable();
        v
    }

    /// Distributed atoms in user order.
    pub fn distributed_atoms(&self) -> Vec<u32> {
        let n = self.n_users;
        (2..=n)
            .map(|k| 3 * k - 2)
            .chain(std::iter::once(3 * n))
            .collect()
    }

    pub fn user_atom(&self, user: usize) -> Option<u32> {
        self.distributed_atoms().get(user).copied()
    }

    pub fn is_user_atom(&self, atom: u32) -> bool {
        self.distributed_atoms().contains(&atom)
    }

    /// The last user, atom `3n` (Charlie in the three-party case).
    pub fn default_receiver(&self) -> u32 {
        3 * self.n_users
    }

    pub fn check_receiver(&self, atom: u32) -> Result<()> {
        if self.is_user_atom(atom) {
            Ok(())
        } else {
            Err(QssError::InvalidParameter(format!(
                "atom {atom} is not held by a user"
            )))
        }
    }

    /// Distributed atoms other than `receiver`, ascending.
    pub fn non_receivers(&self, receiver: u32) -> Vec<u32> {
        let mut v: Vec<u32> = self
            .distributed_atoms()
            .into_iter()
            .filter(|&a| a != receiver)
            .collect();
        v.sort_unstable();
        v
    }

    pub fn sites(atoms: &[u32]) -> Vec<Site> {
        atoms.iter().map(|&a| Site::Atom(a)).collect()
    }

    /// Human name for a user atom: Bob and Charlie for two users, `user k` otherwise.
    pub fn user_name(&self, atom: u32) -> String {
        match (self.n_users, atom) {
            (2, 4) => "bob".into(),
            (2, 6) => "charlie".into(),
            _ => match self.distributed_atoms().iter().position(|&a| a == atom) {
                Some(k) => format!("user{}", k + 1),
                None => format!("atom{atom}"),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_party_atoms() {
        let l = PartyLayout::three_party();
        assert_eq!(l.cavity_pairs(), vec![[1, 2], [3, 5]]);
        assert_eq!(l.measured_atoms(), vec![1, 2, 3, 5]);
        assert_eq!(l.distributed_atoms(), vec![4, 6]);
        assert_eq!(l.ghz_triples(), vec![[2, 3, 4]]);
        assert_eq!(l.bell_pair(), [5, 6]);
        assert_eq!(l.default_receiver(), 6);
        assert_eq!(l.non_receivers(6), vec![4]);
    }

    #[test]
    fn pairs_and_distributed_partition_all_atoms() {
        for n in 2..=6 {
            let l = PartyLayout::new(n).unwrap();
            let mut all: Vec<u32> = l.measured_atoms();
            all.extend(l.distributed_atoms());
            all.sort_unstable();
            assert_eq!(all, (1..=3 * n).collect::<Vec<_>>());
            let mut prepared: Vec<u32> = vec![1];
            prepared.extend(l.ghz_triples().into_iter().flatten());
            prepared.extend(l.bell_pair());
            prepared.sort_unstable();
            assert_eq!(prepared, all);
        }
    }

    #[test]
    fn four_users() {
        let l = PartyLayout::new(4).unwrap();
        assert_eq!(l.cavity_pairs(), vec![[1, 2], [3, 5], [6, 8], [9, 11]]);
        assert_eq!(l.distributed_atoms(), vec![4, 7, 10, 12]);
        assert!(PartyLayout::new(1).is_err());
        assert!(l.check_receiver(5).is_err());
    }
}
