use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CHECK_TOL;
use crate::linalg::{unitarity_defect, CMatrix, ONE, ZERO};
use crate::{QssError, Result};

pub const GROUND: usize = 0;
pub const EXCITED: usize = 1;

/// Site identifier. Atoms order before cavity modes; within a kind by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    Atom(u32),
    Cavity(u32),
}

impl Site {
    pub fn atom_index(self) -> Option<u32> {
        match self {
            Site::Atom(i) => Some(i),
            Site::Cavity(_) => None,
        }
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Atom(i) => write!(f, "atom {i}"),
            Site::Cavity(i) => write!(f, "cavity {i}"),
        }
    }
}

/// Pure state over an ordered register. Sites are kept sorted ascending and
/// the amplitude index is big-endian over that order.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    sites: Vec<Site>,
    dims: Vec<usize>,
    amps: Vec<Complex64>,
}

impl PureState {
    /// Build from sites, dims and amplitudes given in the caller's site order;
    /// the register is re-sorted into canonical ascending order.
    pub fn new(sites: Vec<Site>, dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        if sites.len() != dims.len() {
            return Err(QssError::DimensionMismatch {
                expected: sites.len(),
                got: dims.len(),
            });
        }
        let total: usize = dims.iter().product();
        if amps.len() != total {
            return Err(QssError::DimensionMismatch {
                expected: total,
                got: amps.len(),
            });
        }
        let mut order: Vec<usize> = (0..sites.len()).collect();
        order.sort_by_key(|&i| sites[i]);
        for w in order.windows(2) {
            if sites[w[0]] == sites[w[1]] {
                return Err(QssError::DuplicateSite(sites[w[0]]));
            }
        }
        let amps = permute_axes(&amps, &dims, &order);
        let sites = order.iter().map(|&i| sites[i]).collect();
        let dims = order.iter().map(|&i| dims[i]).collect();
        Ok(Self { sites, dims, amps })
    }

    /// Empty register carrying a single scalar amplitude.
    pub fn scalar(amp: Complex64) -> Self {
        Self {
            sites: vec![],
            dims: vec![],
            amps: vec![amp],
        }
    }

    /// Computational basis state; `digits` are per site in the given order.
    pub fn basis(sites: &[Site], dims: &[usize], digits: &[usize]) -> Result<Self> {
        if digits.len() != sites.len() {
            return Err(QssError::OutcomeLength {
                expected: sites.len(),
                got: digits.len(),
            });
        }
        let total: usize = dims.iter().product();
        let mut amps = vec![ZERO; total];
        amps[flat_index(dims, digits)] = ONE;
        Self::new(sites.to_vec(), dims.to_vec(), amps)
    }

    /// `alpha|e⟩ + beta|g⟩` on one atom.
    pub fn qubit(site: Site, alpha: Complex64, beta: Complex64) -> Self {
        Self {
            sites: vec![site],
            dims: vec![2],
            amps: vec![beta, alpha],
        }
    }

    /// `(|e...e⟩ + |g...g⟩)/√2` on the given atoms (Bell pair for two, GHZ for three).
    pub fn cat(sites: &[Site]) -> Result<Self> {
        let k = sites.len();
        let mut amps = vec![ZERO; 1 << k];
        let h = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = Complex64::new(h, 0.0);
        amps[(1 << k) - 1] = Complex64::new(h, 0.0);
        Self::new(sites.to_vec(), vec![2; k], amps)
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn position(&self, site: Site) -> Result<usize> {
        self.sites
            .binary_search(&site)
            .map_err(|_| QssError::UnknownSite(site))
    }

    pub fn dim_of(&self, site: Site) -> Result<usize> {
        Ok(self.dims[self.position(site)?])
    }

    /// Amplitude at per-site digits in canonical order.
    pub fn amplitude(&self, digits: &[usize]) -> Complex64 {
        self.amps[flat_index(&self.dims, digits)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(QssError::NotNormalized(n));
        }
        let s = 1.0 / n.sqrt();
        self.amps.iter_mut().for_each(|z| *z *= s);
        Ok(())
    }

    pub fn check_normalized(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > CHECK_TOL {
            return Err(QssError::NotNormalized(n));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.sites != other.sites || self.dims != other.dims {
            return Err(QssError::RegisterMismatch);
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        strides(&self.dims)
    }

    pub(crate) fn from_parts(sites: Vec<Site>, dims: Vec<usize>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), dims.iter().product::<usize>());
        Self { sites, dims, amps }
    }

    /// Apply `u` to `targets`. The matrix basis is big-endian over `targets`
    /// in the order given, so callers control which site is the "first" qubit.
    pub fn apply_unitary(&mut self, u: &CMatrix, targets: &[Site]) -> Result<()> {
        let defect = unitarity_defect(u);
        if defect > CHECK_TOL {
            return Err(QssError::NotUnitary(defect));
        }
        self.apply_matrix(u, targets)
    }

    /// Same as [`apply_unitary`](Self::apply_unitary) without the unitarity check.
    pub fn apply_matrix(&mut self, m: &CMatrix, targets: &[Site]) -> Result<()> {
        let mut pos = Vec::with_capacity(targets.len());
        for &t in targets {
            let p = self.position(t)?;
            if pos.contains(&p) {
                return Err(QssError::DuplicateSite(t));
            }
            pos.push(p);
        }
        let tdims: Vec<usize> = pos.iter().map(|&p| self.dims[p]).collect();
        let sub: usize = tdims.iter().product();
        if m.nrows() != sub || m.ncols() != sub {
            return Err(QssError::DimensionMismatch {
                expected: sub,
                got: m.nrows(),
            });
        }
        let strides = self.strides();
        // offsets of each target configuration relative to a base index
        let offsets: Vec<usize> = (0..sub)
            .map(|k| {
                let digits = unflatten(&tdims, k);
                digits.iter().zip(&pos).map(|(d, &p)| d * strides[p]).sum()
            })
            .collect();
        let mut buf = vec![ZERO; sub];
        for base in 0..self.amps.len() {
            if pos
                .iter()
                .any(|&p| !(base / strides[p]).is_multiple_of(self.dims[p]))
            {
                continue;
            }
            for (k, off) in offsets.iter().enumerate() {
                buf[k] = self.amps[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, b) in buf.iter().enumerate() {
                    acc += m[(r, c)] * b;
                }
                self.amps[base + off] = acc;
            }
        }
        Ok(())
    }
}

/// Kronecker product of states on disjoint registers, re-indexed to
/// ascending-label order.
pub fn tensor(states: &[PureState]) -> Result<PureState> {
    let mut sites = Vec::new();
    let mut dims = Vec::new();
    let mut amps = vec![ONE];
    for s in states {
        for &site in &s.sites {
            if sites.contains(&site) {
                return Err(QssError::DuplicateSite(site));
            }
        }
        sites.extend_from_slice(&s.sites);
        dims.extend_from_slice(&s.dims);
        let mut next = Vec::with_capacity(amps.len() * s.amps.len());
        for a in &amps {
            for b in &s.amps {
                next.push(a * b);
            }
        }
        amps = next;
    }
    PureState::new(sites, dims, amps)
}

/// `|⟨a|b⟩|²`, insensitive to global phase.
pub fn fidelity_up_to_phase(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dims != b.dims {
        return Err(QssError::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.sites != b.sites {
        return Err(QssError::RegisterMismatch);
    }
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub(crate) fn flat_index(dims: &[usize], digits: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (d, n)| acc * n + d)
}

pub(crate) fn unflatten(dims: &[usize], mut idx: usize) -> Vec<usize> {
    let mut digits = vec![0; dims.len()];
    for i in (0..dims.len()).rev() {
        digits[i] = idx % dims[i];
        idx /= dims[i];
    }
    digits
}

/// New amplitude vector whose axis `k` is old axis `order[k]`.
fn permute_axes(amps: &[Complex64], dims: &[usize], order: &[usize]) -> Vec<Complex64> {
    if order.iter().enumerate().all(|(k, &o)| k == o) {
        return amps.to_vec();
    }
    let old_strides = strides(dims);
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    (0..amps.len())
        .map(|idx| {
            let digits = unflatten(&new_dims, idx);
            let old: usize = digits
                .iter()
                .zip(order)
                .map(|(d, &o)| d * old_strides[o])
                .sum();
            amps[old]
        })
        .collect()
}
