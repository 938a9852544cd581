use num_complex::Complex64;

use super::state::{strides, PureState, Site};
use super::CHECK_TOL;
use crate::linalg::{hermiticity_defect, CMatrix, HermitianEigen};
use crate::{QssError, Result};

/// Density matrix over a canonical (ascending) register.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    sites: Vec<Site>,
    dims: Vec<usize>,
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(state: &PureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self {
            sites: state.sites().to_vec(),
            dims: state.dims().to_vec(),
            entries: &v * v.adjoint(),
        }
    }

    pub fn new(sites: Vec<Site>, dims: Vec<usize>, entries: CMatrix) -> Result<Self> {
        let total: usize = dims.iter().product();
        if entries.nrows() != total || entries.ncols() != total {
            return Err(QssError::DimensionMismatch {
                expected: total,
                got: entries.nrows(),
            });
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(QssError::InvalidParameter(
                "density matrix sites must be strictly ascending".into(),
            ));
        }
        Ok(Self {
            sites,
            dims,
            entries,
        })
    }

    /// Maximally mixed state on one qubit.
    pub fn maximally_mixed(site: Site) -> Self {
        Self {
            sites: vec![site],
            dims: vec![2],
            entries: CMatrix::identity(2, 2).scale(0.5),
        }
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.entries * &self.entries).trace().re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v = HermitianEigen::new(&self.entries).values;
        v.sort_by(f64::total_cmp);
        v
    }

    /// Hermitian, unit trace, positive semidefinite within tolerance.
    pub fn check_valid(&self) -> Result<()> {
        let herm = hermiticity_defect(&self.entries);
        if herm > CHECK_TOL {
            return Err(QssError::InvalidParameter(format!(
                "not Hermitian: {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > CHECK_TOL || tr.im.abs() > CHECK_TOL {
            return Err(QssError::InvalidParameter(format!("trace {tr} != 1")));
        }
        if let Some(min) = self.eigenvalues().first() {
            if *min < -CHECK_TOL {
                return Err(QssError::InvalidParameter(format!(
                    "negative eigenvalue {min:e}"
                )));
            }
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &PureState) -> Result<f64> {
        if psi.sites() != self.sites.as_slice() || psi.dims() != self.dims.as_slice() {
            return Err(QssError::RegisterMismatch);
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((v.adjoint() * &self.entries * &v)[(0, 0)]
            .re
            .clamp(0.0, 1.0))
    }

    /// `U ρ U†` with `u` acting on the full register.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.entries.nrows() {
            return Err(QssError::DimensionMismatch {
                expected: self.entries.nrows(),
                got: u.nrows(),
            });
        }
        Ok(Self {
            entries: u * &self.entries * u.adjoint(),
            ..self.clone()
        })
    }

    pub fn partial_trace(&self, keep: &[Site]) -> Result<DensityMatrix> {
        let plan = TracePlan::new(&self.sites, &self.dims, keep)?;
        let mut out = CMatrix::zeros(plan.keep_len, plan.keep_len);
        for i in 0..plan.keep_len {
            for j in 0..plan.keep_len {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..plan.rest_len {
                    acc += self.entries[(plan.full(i, r), plan.full(j, r))];
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix {
            sites: plan.keep_sites,
            dims: plan.keep_dims,
            entries: out,
        })
    }
}

/// Index bookkeeping shared by the pure and mixed partial traces.
struct TracePlan {
    keep_sites: Vec<Site>,
    keep_dims: Vec<usize>,
    keep_len: usize,
    rest_len: usize,
    keep_offsets: Vec<usize>,
    rest_offsets: Vec<usize>,
}

impl TracePlan {
    fn new(sites: &[Site], dims: &[usize], keep: &[Site]) -> Result<Self> {
        if keep.is_empty() {
            return Err(QssError::EmptyKeep);
        }
        let mut keep_pos = Vec::new();
        for &k in keep {
            let p = sites
                .binary_search(&k)
                .map_err(|_| QssError::UnknownSite(k))?;
            if keep_pos.contains(&p) {
                return Err(QssError::DuplicateSite(k));
            }
            keep_pos.push(p);
        }
        keep_pos.sort_unstable();
        let rest_pos: Vec<usize> = (0..sites.len()).filter(|p| !keep_pos.contains(p)).collect();
        let st = strides(dims);
        let offsets = |pos: &[usize]| -> Vec<usize> {
            let d: Vec<usize> = pos.iter().map(|&p| dims[p]).collect();
            let n: usize = d.iter().product();
            (0..n)
                .map(|k| {
                    super::state::unflatten(&d, k)
                        .iter()
                        .zip(pos)
                        .map(|(x, &p)| x * st[p])
                        .sum()
                })
                .collect()
        };
        let keep_offsets = offsets(&keep_pos);
        let rest_offsets = offsets(&rest_pos);
        Ok(Self {
            keep_sites: keep_pos.iter().map(|&p| sites[p]).collect(),
            keep_dims: keep_pos.iter().map(|&p| dims[p]).collect(),
            keep_len: keep_offsets.len(),
            rest_len: rest_offsets.len(),
            keep_offsets,
            rest_offsets,
        })
    }

    fn full(&self, keep_idx: usize, rest_idx: usize) -> usize {
        self.keep_offsets[keep_idx] + self.rest_offsets[rest_idx]
    }
}

/// Reduced density matrix of a pure state over `keep`.
pub fn partial_trace(state: &PureState, keep: &[Site]) -> Result<DensityMatrix> {
    let plan = TracePlan::new(state.sites(), state.dims(), keep)?;
    let amps = state.amplitudes();
    let mut out = CMatrix::zeros(plan.keep_len, plan.keep_len);
    for r in 0..plan.rest_len {
        for i in 0..plan.keep_len {
            let a = amps[plan.full(i, r)];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..plan.keep_len {
                out[(i, j)] += a * amps[plan.full(j, r)].conj();
            }
        }
    }
    Ok(DensityMatrix {
        sites: plan.keep_sites,
        dims: plan.keep_dims,
        entries: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};
    use crate::quantum::tensor;
    use crate::rng::{haar_vector, SeedTree};

    fn a(i: u32) -> Site {
        Site::Atom(i)
    }

    #[test]
    fn product_state_reduces_to_pure() {
        let mut rng = SeedTree::new(2).rng();
        let s1 = PureState::new(vec![a(1)], vec![2], haar_vector(&mut rng, 2)).unwrap();
        let s2 = PureState::new(vec![a(2), a(3)], vec![2, 2], haar_vector(&mut rng, 4)).unwrap();
        let joint = tensor(&[s1.clone(), s2]).unwrap();
        let rho = partial_trace(&joint, &[a(1)]).unwrap();
        rho.check_valid().unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-10);
        assert!((rho.fidelity_with_pure(&s1).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let bell = PureState::cat(&[a(1), a(2)]).unwrap();
        let rho = partial_trace(&bell, &[a(2)]).unwrap();
        let ev = rho.eigenvalues();
        assert!((ev[0] - 0.5).abs() < 1e-10 && (ev[1] - 0.5).abs() < 1e-10);
    }

    #[test]
    fn tracing_nothing_out_gives_full_density() {
        let mut rng = SeedTree::new(9).rng();
        let s =
            PureState::new(vec![a(1), a(2), a(3)], vec![2; 3], haar_vector(&mut rng, 8)).unwrap();
        let full = DensityMatrix::from_pure(&s);
        let rho = partial_trace(&s, &[a(3), a(1), a(2)]).unwrap();
        assert_eq!(rho, full);
        assert_eq!(full.partial_trace(&[a(1), a(2), a(3)]).unwrap(), full);
    }

    #[test]
    fn mixed_and_pure_routes_agree() {
        let mut rng = SeedTree::new(4).rng();
        let s = PureState::new(
            vec![a(1), a(2), Site::Cavity(0)],
            vec![2, 2, 3],
            haar_vector(&mut rng, 12),
        )
        .unwrap();
        let direct = partial_trace(&s, &[a(2)]).unwrap();
        let via = DensityMatrix::from_pure(&s).partial_trace(&[a(2)]).unwrap();
        assert!((direct.entries() - via.entries()).norm() < 1e-14);
    }

    #[test]
    fn vacuum_cavity_traces_out_cleanly() {
        let mut rng = SeedTree::new(6).rng();
        let atoms = PureState::new(vec![a(1), a(2)], vec![2, 2], haar_vector(&mut rng, 4)).unwrap();
        let mut vac = vec![ZERO; 5];
        vac[0] = ONE;
        let cav = PureState::new(vec![Site::Cavity(0)], vec![5], vac).unwrap();
        let rho = partial_trace(&tensor(&[atoms.clone(), cav]).unwrap(), &[a(1), a(2)]).unwrap();
        assert!((rho.fidelity_with_pure(&atoms).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_keep_rejected() {
        let bell = PureState::cat(&[a(1), a(2)]).unwrap();
        assert!(matches!(
            partial_trace(&bell, &[]),
            Err(QssError::EmptyKeep)
        ));
        assert!(matches!(
            partial_trace(&bell, &[a(7)]),
            Err(QssError::UnknownSite(_))
        ));
    }
}
