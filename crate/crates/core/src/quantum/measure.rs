use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::state::{strides, unflatten, PureState, Site};
use crate::linalg::ZERO;
use crate::{QssError, Result};

/// Projections with squared norm at or below this are reported as impossible.
pub const ZERO_PROBABILITY: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Symbol for an outcome digit: Z gives `g`/`e`, X gives `+`/`-`.
    pub fn symbol(self, digit: usize) -> char {
        match (self, digit) {
            (Basis::Z, 0) => 'g',
            (Basis::Z, 1) => 'e',
            (Basis::X, 0) => '+',
            (Basis::X, 1) => '-',
            (_, d) => char::from_digit(d as u32, 36).unwrap_or('?'),
        }
    }

    pub fn format(self, digits: &[usize]) -> String {
        digits.iter().map(|&d| self.symbol(d)).collect()
    }

    pub fn parse(self, s: &str) -> Option<Vec<usize>> {
        s.chars()
            .map(|c| match (self, c) {
                (Basis::Z, 'g') | (Basis::X, '+') => Some(0),
                (Basis::Z, 'e') | (Basis::X, '-') => Some(1),
                _ => None,
            })
            .collect()
    }

    /// `⟨outcome|digit⟩` for one site.
    fn weight(self, outcome: usize, digit: usize) -> Complex64 {
        match self {
            Basis::Z => {
                if outcome == digit {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            }
            // ⟨X±| = (⟨e| ± ⟨g|)/√2
            Basis::X => {
                let sign = if outcome == 1 && digit == 0 {
                    -1.0
                } else {
                    1.0
                };
                Complex64::new(sign * FRAC_1_SQRT_2, 0.0)
            }
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::Z => "Z",
            Basis::X => "X",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub sites: Vec<Site>,
    pub basis: Basis,
    pub outcome: Vec<usize>,
    pub probability: f64,
}

impl MeasurementRecord {
    pub fn outcome_string(&self) -> String {
        self.basis.format(&self.outcome)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// The outcome cannot occur.
    Zero,
    Collapsed {
        probability: f64,
        state: PureState,
    },
}

impl Projection {
    pub fn probability(&self) -> f64 {
        match self {
            Projection::Zero => 0.0,
            Projection::Collapsed { probability, .. } => *probability,
        }
    }

    pub fn state(&self) -> Option<&PureState> {
        match self {
            Projection::Zero => None,
            Projection::Collapsed { state, .. } => Some(state),
        }
    }

    pub fn into_state(self) -> Option<PureState> {
        match self {
            Projection::Zero => None,
            Projection::Collapsed { state, .. } => Some(state),
        }
    }
}

struct Split {
    /// positions of measured sites, in the caller's order
    measured: Vec<usize>,
    rest: Vec<usize>,
}

fn split(state: &PureState, sites: &[Site], basis: Basis) -> Result<Split> {
    let mut measured = Vec::with_capacity(sites.len());
    for &s in sites {
        let p = state.position(s)?;
        if measured.contains(&p) {
            return Err(QssError::DuplicateSite(s));
        }
        let d = state.dims()[p];
        if basis == Basis::X && d != 2 {
            return Err(QssError::NotAQubit(s, d));
        }
        measured.push(p);
    }
    let rest = (0..state.sites().len())
        .filter(|p| !measured.contains(p))
        .collect();
    Ok(Split { measured, rest })
}

/// Project `sites` onto `outcome` in `basis`. The measured sites are removed
/// from the returned register.
pub fn project(
    state: &PureState,
    sites: &[Site],
    basis: Basis,
    outcome: &[usize],
) -> Result<Projection> {
    if outcome.len() != sites.len() {
        return Err(QssError::OutcomeLength {
            expected: sites.len(),
            got: outcome.len(),
        });
    }
    let Split { measured, rest } = split(state, sites, basis)?;
    let dims = state.dims();
    for (&p, &o) in measured.iter().zip(outcome) {
        if o >= dims[p] {
            return Err(QssError::InvalidParameter(format!(
                "outcome digit {o} out of range"
            )));
        }
    }
    let st = state.strides();
    let rest_dims: Vec<usize> = rest.iter().map(|&p| dims[p]).collect();
    let rest_strides = strides(&rest_dims);
    let rest_len: usize = rest_dims.iter().product();
    let mut out = vec![ZERO; rest_len];
    for (idx, amp) in state.amplitudes().iter().enumerate() {
        if *amp == ZERO {
            continue;
        }
        let mut w = Complex64::new(1.0, 0.0);
        for (&p, &o) in measured.iter().zip(outcome) {
            w *= basis.weight(o, (idx / st[p]) % dims[p]);
            if w == ZERO {
                break;
            }
        }
        if w == ZERO {
            continue;
        }
        let r: usize = rest
            .iter()
            .zip(&rest_strides)
            .map(|(&p, rs)| ((idx / st[p]) % dims[p]) * rs)
            .sum();
        out[r] += w * amp;
    }
    let probability: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    if probability <= ZERO_PROBABILITY {
        return Ok(Projection::Zero);
    }
    let s = 1.0 / probability.sqrt();
    out.iter_mut().for_each(|z| *z *= s);
    let rest_sites = rest.iter().map(|&p| state.sites()[p]).collect();
    Ok(Projection::Collapsed {
        probability: probability.min(1.0),
        state: PureState::from_parts(rest_sites, rest_dims, out),
    })
}

/// Born probabilities for every outcome of `sites` in `basis`, in
/// lexicographic digit order.
pub fn born_distribution(
    state: &PureState,
    sites: &[Site],
    basis: Basis,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let Split { measured, .. } = split(state, sites, basis)?;
    let dims = state.dims();
    let mdims: Vec<usize> = measured.iter().map(|&p| dims[p]).collect();
    let count: usize = mdims.iter().product();
    match basis {
        Basis::Z => {
            let st = state.strides();
            let mut probs = vec![0.0; count];
            for (idx, amp) in state.amplitudes().iter().enumerate() {
                let k = measured
                    .iter()
                    .fold(0, |acc, &p| acc * dims[p] + (idx / st[p]) % dims[p]);
                probs[k] += amp.norm_sqr();
            }
            Ok(probs
                .into_iter()
                .enumerate()
                .map(|(k, p)| (unflatten(&mdims, k), p))
                .collect())
        }
        Basis::X => (0..count)
            .map(|k| {
                let digits = unflatten(&mdims, k);
                let p = project(state, sites, basis, &digits)?.probability();
                Ok((digits, p))
            })
            .collect(),
    }
}

/// Draw an outcome from the Born distribution and collapse onto it.
pub fn sample_measurement<R: Rng + ?Sized>(
    state: &PureState,
    sites: &[Site],
    basis: Basis,
    rng: &mut R,
) -> Result<(MeasurementRecord, PureState)> {
    let dist = born_distribution(state, sites, basis)?;
    let total: f64 = dist.iter().map(|(_, p)| p).sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut chosen = None;
    for (digits, p) in &dist {
        if *p <= ZERO_PROBABILITY {
            continue;
        }
        acc += p;
        chosen = Some(digits);
        if u < acc {
            break;
        }
    }
    let outcome = chosen.ok_or(QssError::NotNormalized(total))?.clone();
    match project(state, sites, basis, &outcome)? {
        Projection::Collapsed { probability, state } => Ok((
            MeasurementRecord {
                sites: sites.to_vec(),
                basis,
                outcome,
                probability,
            },
            state,
        )),
        Projection::Zero => Err(QssError::NotNormalized(total)),
    }
}
