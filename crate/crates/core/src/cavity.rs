//! Two driven atoms in a detuned single-mode cavity.
//!
//! The full model is written in the frame rotating at the atomic (= drive)
//! frequency, which makes it time independent:
//!
//! ```text
//! H_rot = -δ a†a + Σ_j [ g (a† S_j⁻ + a S_j⁺) + Ω (S_j⁺ + S_j⁻) ]
//! ```
//!
//! with `δ = ω0 − ω1`. In the large-detuning, strong-driving regime the cavity
//! is only virtually excited and the atoms evolve under
//! `U(t) = exp(−i H0 t) exp(−i H_eff t)` with `H0 = Ω(σx⊗I + I⊗σx)` and
//! `H_eff = λ(I + σx⊗σx)`, `λ = g²/2δ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::linalg::{kron, CMatrix, HermitianEigen, I, ONE, ZERO};
use crate::quantum::{born_distribution, partial_trace, pauli_x, Basis, PureState, Site};
use crate::rng::{haar_vector, SeedTree};
use crate::{QssError, Result};

/// Cavity population at the cutoff above which an evolution is flagged.
pub const LEAK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    pub g: f64,
    /// `ω0 − ω1`; positive unless built with [`CavityParams::with_negative_detuning`].
    pub delta: f64,
    pub omega_rabi: f64,
    pub omega0: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub fock_cutoff: usize,
}

impl CavityParams {
    /// Atomic frequency used when only ratios are given. It drops out of the
    /// rotating-frame dynamics.
    pub const DEFAULT_OMEGA0: f64 = 1.0e4;

    pub fn new(
        g: f64,
        delta: f64,
        omega_rabi: f64,
        omega0: f64,
        fock_cutoff: usize,
    ) -> Result<Self> {
        let p = Self {
            g,
            delta,
            omega_rabi,
            omega0,
            omega1: omega0 - delta,
            omega2: omega0,
            fock_cutoff,
        };
        p.validate()?;
        Ok(p)
    }

    /// `g = 1`, `δ = delta_over_g`, `Ω = omega_over_delta · δ`.
    pub fn from_ratios(
        delta_over_g: f64,
        omega_over_delta: f64,
        fock_cutoff: usize,
    ) -> Result<Self> {
        Self::new(
            1.0,
            delta_over_g,
            omega_over_delta * delta_over_g,
            Self::DEFAULT_OMEGA0,
            fock_cutoff,
        )
    }

    /// Flip the detuning sign (cavity above the atoms) for sensitivity studies.
    pub fn with_negative_detuning(mut self) -> Self {
        self.delta = -self.delta.abs();
        self.omega1 = self.omega0 - self.delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(QssError::InvalidParameter(m.to_string()));
        if self.omega0 != self.omega2 {
            return bad("drive frequency must equal the atomic transition frequency");
        }
        if !(self.g > 0.0) {
            return bad("coupling g must be positive");
        }
        if !(self.delta > 0.0) {
            return bad("detuning must be positive");
        }
        if !(self.omega_rabi > 0.0) {
            return bad("Rabi frequency must be positive");
        }
        if self.fock_cutoff < 2 {
            return bad("fock cutoff must be at least 2");
        }
        Ok(())
    }

    /// `λ = g² / 2δ`; negative when the detuning is.
    pub fn lambda(&self) -> f64 {
        self.g * self.g / (2.0 * self.delta)
    }

    /// Interaction time giving `|λ t| = π/4`.
    pub fn canonical_time(&self) -> f64 {
        PI / (4.0 * self.lambda().abs())
    }
}

/// Interaction time expressed through the two dimensionless angles that
/// enter the effective evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionSchedule {
    pub t: f64,
    pub lambda_t: f64,
    pub omega_t: f64,
}

impl InteractionSchedule {
    /// `λt = π/4`, `Ωt = π`, in units where `t = 1`.
    pub fn canonical() -> Self {
        Self {
            t: 1.0,
            lambda_t: PI / 4.0,
            omega_t: PI,
        }
    }

    pub fn from_angles(lambda_t: f64, omega_t: f64) -> Self {
        Self {
            t: 1.0,
            lambda_t,
            omega_t,
        }
    }

    pub fn bound(params: &CavityParams, t: f64) -> Self {
        Self {
            t,
            lambda_t: params.lambda() * t,
            omega_t: params.omega_rabi * t,
        }
    }

    pub fn is_canonical(&self) -> bool {
        (self.lambda_t - PI / 4.0).abs() < 1e-12 && (self.omega_t - PI).abs() < 1e-12
    }

    pub fn check_consistent(&self, params: &CavityParams) -> Result<()> {
        let dl = (self.lambda_t - params.lambda() * self.t).abs();
        let dw = (self.omega_t - params.omega_rabi * self.t).abs();
        if dl > 1e-12 || dw > 1e-12 {
            return Err(QssError::InvalidParameter(format!(
                "schedule inconsistent with parameters (Δλt = {dl:e}, ΔΩt = {dw:e})"
            )));
        }
        Ok(())
    }
}

fn sigma_x_pair() -> CMatrix {
    kron(&pauli_x(), &pauli_x())
}

/// `λ(I + σx⊗σx)`.
pub fn effective_hamiltonian(lambda: f64) -> CMatrix {
    (CMatrix::identity(4, 4) + sigma_x_pair()).scale(lambda)
}

/// `Ω(σx⊗I + I⊗σx)`.
pub fn drive_hamiltonian(omega_rabi: f64) -> CMatrix {
    let id = CMatrix::identity(2, 2);
    (kron(&pauli_x(), &id) + kron(&id, &pauli_x())).scale(omega_rabi)
}

/// `exp(−iθσx) = cos θ I − i sin θ σx`.
fn x_rotation(theta: f64) -> CMatrix {
    CMatrix::identity(2, 2).scale(theta.cos()) - pauli_x().map(|z| z * I * theta.sin())
}

/// `exp(−i H0 t) exp(−i H_eff t)` on two atoms, in closed form.
pub fn effective_unitary(schedule: &InteractionSchedule) -> CMatrix {
    let drive = x_rotation(schedule.omega_t);
    let drive = kron(&drive, &drive);
    let lt = schedule.lambda_t;
    let coupling = (CMatrix::identity(4, 4).scale(lt.cos())
        - sigma_x_pair().map(|z| z * I * lt.sin()))
    .map(|z| z * Complex64::from_polar(1.0, -lt));
    drive * coupling
}

/// Truncated annihilation operator on `0..=cutoff` photons.
pub fn annihilation(cutoff: usize) -> CMatrix {
    let mut a = CMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Rotating-frame Hamiltonian for `n_atoms` identical atoms and one mode.
/// Register order: atoms (big-endian) then the cavity.
pub fn driven_cavity_hamiltonian(params: &CavityParams, n_atoms: usize) -> Result<CMatrix> {
    if params.fock_cutoff < 2 {
        return Err(QssError::InvalidParameter(
            "fock cutoff must be at least 2".into(),
        ));
    }
    let nf = params.fock_cutoff + 1;
    let atoms_dim = 1usize << n_atoms;
    let a = annihilation(params.fock_cutoff);
    let ad = a.adjoint();
    // S⁻ = |g⟩⟨e| with |g⟩ = 0
    let s_minus = CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
    let s_plus = s_minus.adjoint();
    let on_atom = |op: &CMatrix, j: usize| -> CMatrix {
        (0..n_atoms).fold(CMatrix::identity(1, 1), |acc, k| {
            if k == j {
                kron(&acc, op)
            } else {
                kron(&acc, &CMatrix::identity(2, 2))
            }
        })
    };
    let id_atoms = CMatrix::identity(atoms_dim, atoms_dim);
    let id_field = CMatrix::identity(nf, nf);
    let mut h = kron(&id_atoms, &(&ad * &a)).scale(-params.delta);
    for j in 0..n_atoms {
        let sm = on_atom(&s_minus, j);
        let sp = on_atom(&s_plus, j);
        h += (kron(&sm, &ad) + kron(&sp, &a)).scale(params.g);
        h += kron(&(&sp + &sm), &id_field).scale(params.omega_rabi);
    }
    Ok(h)
}

/// Two-atom full Hamiltonian over `(atom, atom, cavity)`.
pub fn full_hamiltonian(params: &CavityParams) -> Result<CMatrix> {
    driven_cavity_hamiltonian(params, 2)
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: PureState,
    /// Population in the highest retained Fock level.
    pub leak: f64,
}

impl Evolution {
    pub fn leak_flagged(&self) -> bool {
        self.leak > LEAK_THRESHOLD
    }
}

/// Diagonalised full model, reusable across many initial states.
pub struct FullModel {
    params: CavityParams,
    eigen: HermitianEigen,
}

impl FullModel {
    pub fn new(params: CavityParams) -> Result<Self> {
        let h = full_hamiltonian(&params)?;
        Ok(Self {
            params,
            eigen: HermitianEigen::new(&h),
        })
    }

    pub fn params(&self) -> &CavityParams {
        &self.params
    }

    pub fn propagator(&self, t: f64) -> CMatrix {
        self.eigen.propagator(t)
    }

    /// Evolve `initial` for time `t`. `atoms` are the two coupled atoms
    /// (first one is the most significant) and `cavity` must start in vacuum.
    pub fn evolve(
        &self,
        initial: &PureState,
        atoms: [Site; 2],
        cavity: Site,
        t: f64,
    ) -> Result<Evolution> {
        self.evolve_with(&self.propagator(t), initial, atoms, cavity)
    }

    fn evolve_with(
        &self,
        u: &CMatrix,
        initial: &PureState,
        atoms: [Site; 2],
        cavity: Site,
    ) -> Result<Evolution> {
        let cutoff = self.params.fock_cutoff;
        if initial.dim_of(cavity)? != cutoff + 1 {
            return Err(QssError::DimensionMismatch {
                expected: cutoff + 1,
                got: initial.dim_of(cavity)?,
            });
        }
        let photons = born_distribution(initial, &[cavity], Basis::Z)?;
        if (photons[0].1 - 1.0).abs() > 1e-10 {
            return Err(QssError::InvalidParameter(
                "cavity must start in the vacuum".into(),
            ));
        }
        let mut state = initial.clone();
        state.apply_matrix(u, &[atoms[0], atoms[1], cavity])?;
        let leak = born_distribution(&state, &[cavity], Basis::Z)?[cutoff].1;
        Ok(Evolution { state, leak })
    }
}

/// `exp(−i H_rot t)|initial⟩` for the two given atoms and cavity.
pub fn full_evolution(
    params: &CavityParams,
    t: f64,
    initial: &PureState,
    atoms: [Site; 2],
    cavity: Site,
) -> Result<Evolution> {
    FullModel::new(*params)?.evolve(initial, atoms, cavity, t)
}

/// One ladder point of the effective-model validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderPoint {
    pub delta_over_g: f64,
    pub omega_over_delta: f64,
}

impl LadderPoint {
    pub fn new(delta_over_g: f64, omega_over_delta: f64) -> Self {
        Self {
            delta_over_g,
            omega_over_delta,
        }
    }
}

/// `(5,5) → (10,10) → (20,20)`.
pub fn default_ladder() -> Vec<LadderPoint> {
    vec![
        LadderPoint::new(5.0, 5.0),
        LadderPoint::new(10.0, 10.0),
        LadderPoint::new(20.0, 20.0),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationEntry {
    pub delta_over_g: f64,
    pub omega_over_delta: f64,
    pub fock_cutoff: usize,
    /// `1 − mean ⟨ψ_eff|ρ_atoms|ψ_eff⟩`.
    pub deviation: f64,
    /// Largest cutoff-level population over the samples.
    pub leak: f64,
    pub leak_warning: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ladder: Vec<ValidationEntry>,
    pub samples: usize,
    pub seed: u64,
}

impl ValidationReport {
    /// `Some(last < first)`, or `None` for a single-point ladder.
    pub fn trend_ok(&self) -> Option<bool> {
        match self.ladder.as_slice() {
            [first, .., last] => Some(last.deviation < first.deviation),
            _ => None,
        }
    }

    pub fn any_leak_warning(&self) -> bool {
        self.ladder.iter().any(|e| e.leak_warning)
    }
}

/// Compare full and effective two-atom dynamics at `t = π/(4|λ|)` over
/// Haar-random atomic inputs with the cavity in vacuum.
pub fn validate_effective(
    ladder: &[LadderPoint],
    fock_cutoff: usize,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if ladder.is_empty() {
        return Err(QssError::InvalidParameter(
            "validation ladder is empty".into(),
        ));
    }
    if samples < 10 {
        return Err(QssError::InvalidParameter(
            "validation needs at least 10 samples".into(),
        ));
    }
    let root = SeedTree::new(seed).named("validate");
    let entries = ladder
        .iter()
        .enumerate()
        .map(|(k, point)| validate_point(point, fock_cutoff, samples, root.child(k as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport {
        ladder: entries,
        samples,
        seed,
    })
}

fn validate_point(
    point: &LadderPoint,
    fock_cutoff: usize,
    samples: usize,
    seeds: SeedTree,
) -> Result<ValidationEntry> {
    let params =
        CavityParams::from_ratios(point.delta_over_g, point.omega_over_delta, fock_cutoff)?;
    let model = FullModel::new(params)?;
    let t = params.canonical_time();
    let u_full = model.propagator(t);
    let u_eff = effective_unitary(&InteractionSchedule::bound(&params, t));
    let atoms = [Site::Atom(1), Site::Atom(2)];
    let cavity = Site::Cavity(0);
    let mut vacuum = vec![ZERO; fock_cutoff + 1];
    vacuum[0] = ONE;
    let vacuum = PureState::new(vec![cavity], vec![fock_cutoff + 1], vacuum)?;

    let per_sample = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<(f64, f64)> {
            let mut rng = seeds.child(s as u64).rng();
            let input = PureState::new(atoms.to_vec(), vec![2, 2], haar_vector(&mut rng, 4))?;
            let mut target = input.clone();
            target.apply_matrix(&u_eff, &atoms)?;
            let joint = crate::quantum::tensor(&[input, vacuum.clone()])?;
            let evolved = model.evolve_with(&u_full, &joint, atoms, cavity)?;
            let rho = partial_trace(&evolved.state, &atoms)?;
            Ok((rho.fidelity_with_pure(&target)?, evolved.leak))
        })
        .collect::<Result<Vec<_>>>()?;

    let mean = per_sample.iter().map(|(f, _)| f).sum::<f64>() / samples as f64;
    let leak = per_sample.iter().map(|(_, l)| *l).fold(0.0, f64::max);
    Ok(ValidationEntry {
        delta_over_g: point.delta_over_g,
        omega_over_delta: point.omega_over_delta,
        fock_cutoff,
        deviation: (1.0 - mean).clamp(0.0, 1.0),
        leak,
        leak_warning: leak > LEAK_THRESHOLD,
    })
}

/// Per-point `|deviation(F + 2) − deviation(F)|`.
pub fn fock_convergence(
    ladder: &[LadderPoint],
    fock_cutoff: usize,
    samples: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let base = validate_effective(ladder, fock_cutoff, samples, seed)?;
    let raised = validate_effective(ladder, fock_cutoff + 2, samples, seed)?;
    Ok(base
        .ladder
        .iter()
        .zip(&raised.ladder)
        .map(|(a, b)| (a.deviation - b.deviation).abs())
        .collect())
}
