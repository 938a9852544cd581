//! Participant adversaries against the secret-sharing protocol.
//!
//! Each scenario replays the protocol with one user (never Alice) deviating:
//!
//! - `assigned_with_cooperation`: the adversary is the assigned receiver and
//!   the other users announce honestly.
//! - `assigned_without_cooperation`: the adversary is the receiver but one
//!   other user measures and withholds the X outcome; the adversary guesses it.
//! - `lie_about_x`: the adversary is a non-receiver and reports the flipped
//!   X outcome.
//! - `intercept_resend`: the adversary keeps the atom sent to another user and
//!   forwards a substitute; holding both genuine atoms it recovers the secret
//!   itself.
//!
//! "Success" is exact recovery by the adversary (fidelity ≥ 1 − 1e-9).
//! Check rounds have the receiver measure `{|secret⟩, |secret⊥⟩}` on a state
//! Alice later reveals; a `⊥` outcome flags the round.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::InteractionSchedule;
use crate::linalg::{ONE, ZERO};
use crate::protocol::{
    derive_correction_table, distribute_exhaustive, distribute_sampled, prepare_initial,
    recover_exhaustive, CorrectionTable, PartyLayout, SecretAmplitudes, RECOVERY_TOL,
};
use crate::quantum::{
    born_distribution, fidelity_up_to_phase, project, sample_measurement, Basis, DensityMatrix,
    PureState, Site,
};
use crate::rng::{haar_vector, SeedTree};
use crate::{QssError, Result};

/// 97.5% standard normal quantile.
const Z_95: f64 = 1.959_963_984_540_054;

/// Mismatch probabilities below this are treated as roundoff.
const ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Honest,
    AssignedWithCooperation,
    AssignedWithoutCooperation,
    LieAboutX,
    InterceptResend,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Honest => "honest",
            ScenarioKind::AssignedWithCooperation => "assigned_with_cooperation",
            ScenarioKind::AssignedWithoutCooperation => "assigned_without_cooperation",
            ScenarioKind::LieAboutX => "lie_about_x",
            ScenarioKind::InterceptResend => "intercept_resend",
        }
    }

    pub fn has_check_rounds(self) -> bool {
        matches!(
            self,
            ScenarioKind::Honest | ScenarioKind::LieAboutX | ScenarioKind::InterceptResend
        )
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "honest" => ScenarioKind::Honest,
            "a" | "assigned_with_cooperation" => ScenarioKind::AssignedWithCooperation,
            "b" | "assigned_without_cooperation" => ScenarioKind::AssignedWithoutCooperation,
            "c" | "lie_about_x" => ScenarioKind::LieAboutX,
            "d" | "intercept_resend" => ScenarioKind::InterceptResend,
            other => return Err(format!("unknown scenario {other:?}")),
        })
    }
}

/// What the intercepting adversary forwards in place of the genuine atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubstitutePolicy {
    Ground,
    MaximallyMixed,
    RandomPure,
}

impl std::str::FromStr for SubstitutePolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ground" | "g" => Ok(SubstitutePolicy::Ground),
            "mixed" | "maximally_mixed" => Ok(SubstitutePolicy::MaximallyMixed),
            "random" | "random_pure" => Ok(SubstitutePolicy::RandomPure),
            other => Err(format!("unknown substitute policy {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecurityScenario {
    pub kind: ScenarioKind,
    pub layout: PartyLayout,
    /// Atom held by the adversary.
    pub adversary: u32,
    /// Atom Alice assigns to receive the secret.
    pub receiver: u32,
    pub substitute: SubstitutePolicy,
}

impl SecurityScenario {
    /// Three-party defaults: Bob (atom 4) is the adversary. He is the receiver
    /// in the two "assigned" scenarios and Charlie (atom 6) is otherwise.
    pub fn three_party(kind: ScenarioKind) -> Self {
        let layout = PartyLayout::three_party();
        let receiver = match kind {
            ScenarioKind::AssignedWithCooperation | ScenarioKind::AssignedWithoutCooperation => 4,
            _ => 6,
        };
        Self {
            kind,
            layout,
            adversary: 4,
            receiver,
            substitute: SubstitutePolicy::Ground,
        }
    }

    pub fn with_receiver(mut self, receiver: u32) -> Self {
        self.receiver = receiver;
        self
    }

    pub fn with_substitute(mut self, policy: SubstitutePolicy) -> Self {
        self.substitute = policy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(QssError::InvalidParameter(m));
        if !self.layout.is_user_atom(self.adversary) {
            return bad(format!(
                "adversary atom {} is not held by a user",
                self.adversary
            ));
        }
        self.layout.check_receiver(self.receiver)?;
        match self.kind {
            ScenarioKind::AssignedWithCooperation | ScenarioKind::AssignedWithoutCooperation
                if self.adversary != self.receiver =>
            {
                bad(format!(
                    "{} needs the adversary to be the receiver",
                    self.kind
                ))
            }
            ScenarioKind::LieAboutX if self.adversary == self.receiver => {
                bad("lie_about_x needs the adversary to be a non-receiver".into())
            }
            _ => Ok(()),
        }
    }

    /// The user whose X outcome is withheld in `assigned_without_cooperation`.
    fn withholder(&self) -> u32 {
        self.layout.non_receivers(self.receiver)[0]
    }

    /// The user whose atom is intercepted in `intercept_resend`.
    fn victim(&self) -> u32 {
        if self.receiver != self.adversary {
            self.receiver
        } else {
            self.layout.non_receivers(self.receiver)[0]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecretSampler {
    Haar,
    Fixed(SecretAmplitudes),
}

impl SecretSampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> SecretAmplitudes {
        match self {
            SecretSampler::Haar => SecretAmplitudes::haar(rng),
            SecretSampler::Fixed(s) => *s,
        }
    }
}

/// Per-trial detail, exposed for invariant checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub secret: SecretAmplitudes,
    pub alice_outcome: Vec<usize>,
    pub alice_probability: f64,
    /// Fidelity of the adversary's best state with the secret.
    pub adversary_fidelity: f64,
    /// Fidelity of the assigned receiver's final state with the secret.
    pub receiver_fidelity: f64,
    /// Exact recovery by the party the scenario scores: the receiver in the
    /// honest run, the adversary otherwise.
    pub success: bool,
    /// `Some(correct)` when the adversary had to guess an X outcome.
    pub guess_correct: Option<bool>,
    /// `Some(flagged)` when the trial ends in a check round.
    pub flagged: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    pub scenario: ScenarioKind,
    pub n_users: u32,
    pub adversary: u32,
    pub receiver: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substitute: Option<SubstitutePolicy>,
    pub trials: usize,
    pub success_rate: f64,
    /// Wilson 95% interval for `success_rate`.
    pub ci: [f64; 2],
    /// Mean fidelity of the assigned receiver's final state.
    pub mean_fidelity: f64,
    pub adversary_mean_fidelity: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_ci: Option<[f64; 2]>,
    pub seed: u64,
}

/// Wilson score interval at 95%.
pub fn wilson_interval(successes: usize, trials: usize) -> [f64; 2] {
    if trials == 0 {
        return [0.0, 1.0];
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z_95 * Z_95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z_95 / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    [lo, hi]
}

/// Simulator holding the correction tables a scenario needs.
pub struct SecuritySim {
    scenario: SecurityScenario,
    tables: BTreeMap<u32, CorrectionTable>,
}

impl SecuritySim {
    pub fn new(scenario: SecurityScenario) -> Result<Self> {
        scenario.validate()?;
        let schedule = InteractionSchedule::canonical();
        let mut tables = BTreeMap::new();
        for r in [scenario.receiver, scenario.adversary] {
            if let std::collections::btree_map::Entry::Vacant(e) = tables.entry(r) {
                e.insert(derive_correction_table(&scenario.layout, &schedule, r)?);
            }
        }
        Ok(Self { scenario, tables })
    }

    pub fn scenario(&self) -> &SecurityScenario {
        &self.scenario
    }

    fn table(&self, receiver: u32) -> &CorrectionTable {
        &self.tables[&receiver]
    }

    /// Run one attacked trial with its own random stream.
    pub fn trial<R: Rng + ?Sized>(
        &self,
        secret: SecretAmplitudes,
        rng: &mut R,
    ) -> Result<TrialOutcome> {
        let sc = &self.scenario;
        let layout = &sc.layout;
        let initial = prepare_initial(&secret, layout)?;
        let dist = distribute_sampled(&initial, layout, &InteractionSchedule::canonical(), rng)?;
        let alice = dist.alice_outcome.clone();

        // Honest users X-measure their atoms in ascending order; `overrides`
        // lets a scenario replace what gets announced.
        let receiver = sc.receiver;
        let table = self.table(receiver);
        let mut out = TrialOutcome {
            secret,
            alice_outcome: alice.clone(),
            alice_probability: dist.probability,
            adversary_fidelity: 0.0,
            receiver_fidelity: 0.0,
            success: false,
            guess_correct: None,
            flagged: None,
        };

        match sc.kind {
            ScenarioKind::Honest | ScenarioKind::AssignedWithCooperation => {
                let (state, x) = measure_non_receivers(&dist.residual, table.x_atoms(), rng)?;
                let f = correct_and_score(&state, receiver, table.lookup(&alice, &x)?, &secret)?;
                out.receiver_fidelity = f;
                out.adversary_fidelity = if sc.kind == ScenarioKind::Honest {
                    0.0
                } else {
                    f
                };
                if sc.kind == ScenarioKind::Honest {
                    out.flagged = Some(check_round(
                        &secret,
                        &pure_density(&state, receiver, table, &alice, &x)?,
                        rng,
                    )?);
                    out.adversary_fidelity =
                        adversary_marginal_fidelity(&dist.residual, sc.adversary, &secret)?;
                }
            }
            ScenarioKind::AssignedWithoutCooperation => {
                let (state, mut x) = measure_non_receivers(&dist.residual, table.x_atoms(), rng)?;
                let k = table
                    .x_atoms()
                    .iter()
                    .position(|&a| a == sc.withholder())
                    .expect("withholder");
                let guess = rng.random_range(0..2usize);
                out.guess_correct = Some(guess == x[k]);
                x[k] = guess;
                let f = correct_and_score(&state, receiver, table.lookup(&alice, &x)?, &secret)?;
                out.receiver_fidelity = f;
                out.adversary_fidelity = f;
            }
            ScenarioKind::LieAboutX => {
                let (state, mut x) = measure_non_receivers(&dist.residual, table.x_atoms(), rng)?;
                let k = table
                    .x_atoms()
                    .iter()
                    .position(|&a| a == sc.adversary)
                    .expect("adversary");
                // the adversary's atom, unconditioned on its own outcome, is
                // Σ p_s |X_s⟩⟨X_s|; its overlap with the secret is what it learned
                let marginal =
                    born_distribution(&dist.residual, &[Site::Atom(sc.adversary)], Basis::X)?;
                let (a, b) = (secret.alpha, secret.beta);
                out.adversary_fidelity = marginal
                    .iter()
                    .map(|(s, p)| {
                        p * if s[0] == 0 {
                            (a + b).norm_sqr()
                        } else {
                            (a - b).norm_sqr()
                        } / 2.0
                    })
                    .sum();
                x[k] ^= 1;
                let rho = pure_density(&state, receiver, table, &alice, &x)?;
                out.receiver_fidelity =
                    rho.fidelity_with_pure(&secret.state(Site::Atom(receiver)))?;
                out.flagged = Some(check_round(&secret, &rho, rng)?);
            }
            ScenarioKind::InterceptResend => {
                let victim = sc.victim();
                // the adversary holds its own atom and the victim's: it plays
                // the role of every non-receiver it controls and finishes the
                // recovery on whichever genuine atom is the official receiver
                let own_table = self.table(receiver);
                let (state, x) = measure_non_receivers(&dist.residual, own_table.x_atoms(), rng)?;
                let genuine =
                    correct_and_score(&state, receiver, own_table.lookup(&alice, &x)?, &secret)?;
                out.adversary_fidelity = genuine;
                if victim == receiver {
                    // the real receiver corrects the substitute with honest announcements
                    let sub = substitute_density(sc.substitute, receiver, rng);
                    let c = table.lookup(&alice, &x)?;
                    let rho = sub.conjugate(&c.matrix())?;
                    out.receiver_fidelity =
                        rho.fidelity_with_pure(&secret.state(Site::Atom(receiver)))?;
                    out.flagged = Some(check_round(&secret, &rho, rng)?);
                } else {
                    out.receiver_fidelity = genuine;
                    out.flagged = Some(false);
                }
            }
        }
        let scored = if sc.kind == ScenarioKind::Honest {
            out.receiver_fidelity
        } else {
            out.adversary_fidelity
        };
        out.success = scored >= 1.0 - RECOVERY_TOL;
        Ok(out)
    }

    /// Run `trials` independent trials; trial `i` uses `seed / scenario / i`.
    pub fn run(
        &self,
        sampler: &SecretSampler,
        trials: usize,
        seed: u64,
    ) -> Result<Vec<TrialOutcome>> {
        let root = SeedTree::new(seed)
            .named("scenario")
            .named(self.scenario.kind.name());
        (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = root.child(i as u64).rng();
                let secret = sampler.draw(&mut rng);
                self.trial(secret, &mut rng)
            })
            .collect()
    }
}

fn measure_non_receivers<R: Rng + ?Sized>(
    residual: &PureState,
    atoms: &[u32],
    rng: &mut R,
) -> Result<(PureState, Vec<usize>)> {
    let mut state = residual.clone();
    let mut x = Vec::with_capacity(atoms.len());
    for &a in atoms {
        let (rec, next) = sample_measurement(&state, &[Site::Atom(a)], Basis::X, rng)?;
        x.push(rec.outcome[0]);
        state = next;
    }
    Ok((state, x))
}

fn correct_and_score(
    state: &PureState,
    receiver: u32,
    correction: crate::quantum::Correction,
    secret: &SecretAmplitudes,
) -> Result<f64> {
    let site = Site::Atom(receiver);
    let mut s = state.clone();
    s.apply_unitary(&correction.matrix(), &[site])?;
    fidelity_up_to_phase(&secret.state(site), &s)
}

fn pure_density(
    state: &PureState,
    receiver: u32,
    table: &CorrectionTable,
    alice: &[usize],
    x: &[usize],
) -> Result<DensityMatrix> {
    let mut s = state.clone();
    s.apply_unitary(&table.lookup(alice, x)?.matrix(), &[Site::Atom(receiver)])?;
    Ok(DensityMatrix::from_pure(&s))
}

/// Best fidelity any single user's atom has with the secret before
/// cooperation: its reduced state against the secret.
fn adversary_marginal_fidelity(
    residual: &PureState,
    atom: u32,
    secret: &SecretAmplitudes,
) -> Result<f64> {
    let rho = crate::quantum::partial_trace(residual, &[Site::Atom(atom)])?;
    rho.fidelity_with_pure(&secret.state(Site::Atom(atom)))
}

fn substitute_density<R: Rng + ?Sized>(
    policy: SubstitutePolicy,
    receiver: u32,
    rng: &mut R,
) -> DensityMatrix {
    let site = Site::Atom(receiver);
    match policy {
        SubstitutePolicy::Ground => DensityMatrix::from_pure(&PureState::qubit(site, ZERO, ONE)),
        SubstitutePolicy::MaximallyMixed => DensityMatrix::maximally_mixed(site),
        SubstitutePolicy::RandomPure => {
            let v = haar_vector(rng, 2);
            DensityMatrix::from_pure(&PureState::qubit(site, v[1], v[0]))
        }
    }
}

/// Receiver measures `{|secret⟩, |secret⊥⟩}`; returns whether `⊥` came up.
fn check_round<R: Rng + ?Sized>(
    secret: &SecretAmplitudes,
    rho: &DensityMatrix,
    rng: &mut R,
) -> Result<bool> {
    let site = rho.sites()[0];
    let mismatch = 1.0 - rho.fidelity_with_pure(&secret.state(site))?;
    if mismatch < ROUNDOFF {
        return Ok(false);
    }
    Ok(rng.random::<f64>() < mismatch)
}

/// Aggregate a scenario over `trials` trials.
pub fn simulate_scenario(
    scenario: &SecurityScenario,
    sampler: &SecretSampler,
    trials: usize,
    seed: u64,
) -> Result<SecurityReport> {
    if trials == 0 {
        return Err(QssError::InvalidParameter("need at least one trial".into()));
    }
    let sim = SecuritySim::new(*scenario)?;
    let outcomes = sim.run(sampler, trials, seed)?;
    Ok(summarize(scenario, &outcomes, seed))
}

fn summarize(scenario: &SecurityScenario, outcomes: &[TrialOutcome], seed: u64) -> SecurityReport {
    let n = outcomes.len();
    let successes = outcomes.iter().filter(|o| o.success).count();
    let checks: Vec<bool> = outcomes.iter().filter_map(|o| o.flagged).collect();
    let flagged = checks.iter().filter(|f| **f).count();
    let (detection_rate, detection_ci) = if checks.is_empty() {
        (None, None)
    } else {
        (
            Some(flagged as f64 / checks.len() as f64),
            Some(wilson_interval(flagged, checks.len())),
        )
    };
    SecurityReport {
        scenario: scenario.kind,
        n_users: scenario.layout.n_users(),
        adversary: scenario.adversary,
        receiver: scenario.receiver,
        substitute: (scenario.kind == ScenarioKind::InterceptResend).then_some(scenario.substitute),
        trials: n,
        success_rate: successes as f64 / n as f64,
        ci: wilson_interval(successes, n),
        mean_fidelity: outcomes.iter().map(|o| o.receiver_fidelity).sum::<f64>() / n as f64,
        adversary_mean_fidelity: outcomes.iter().map(|o| o.adversary_fidelity).sum::<f64>()
            / n as f64,
        detection_rate,
        detection_ci,
        seed,
    }
}

/// Fraction of flagged check rounds, cycling through `known_secrets`.
pub fn run_check_rounds(
    scenario: &SecurityScenario,
    known_secrets: &[SecretAmplitudes],
    rounds: usize,
    seed: u64,
) -> Result<f64> {
    if !scenario.kind.has_check_rounds() {
        return Err(QssError::InvalidParameter(format!(
            "{} has no check rounds",
            scenario.kind
        )));
    }
    if known_secrets.is_empty() || rounds == 0 {
        return Err(QssError::InvalidParameter(
            "check rounds need secrets and at least one round".into(),
        ));
    }
    let sim = SecuritySim::new(*scenario)?;
    let root = SeedTree::new(seed)
        .named("check")
        .named(scenario.kind.name());
    let flags = (0..rounds)
        .into_par_iter()
        .map(|i| {
            let mut rng = root.child(i as u64).rng();
            Ok(sim
                .trial(known_secrets[i % known_secrets.len()], &mut rng)?
                .flagged
                .unwrap_or(false))
        })
        .collect::<Result<Vec<bool>>>()?;
    Ok(flags.iter().filter(|f| **f).count() as f64 / rounds as f64)
}

/// Expected check-round detection rate, by exact enumeration of the protocol
/// branches rather than sampling.
///
/// For Haar-random secrets every policy averages to 1/2 (`intercept_resend`)
/// and `lie_about_x` to `1 − E[(|α|²−|β|²)²] = 2/3`.
pub fn expected_detection_rate(
    scenario: &SecurityScenario,
    sampler: &SecretSampler,
) -> Result<f64> {
    scenario.validate()?;
    match (scenario.kind, sampler) {
        (ScenarioKind::Honest, _) => Ok(0.0),
        (ScenarioKind::InterceptResend, _) if scenario.victim() != scenario.receiver => Ok(0.0),
        (ScenarioKind::InterceptResend, SecretSampler::Haar) => Ok(0.5),
        (ScenarioKind::LieAboutX, SecretSampler::Haar) => Ok(2.0 / 3.0),
        (ScenarioKind::InterceptResend, SecretSampler::Fixed(secret)) => {
            let site = Site::Atom(scenario.receiver);
            let sub = match scenario.substitute {
                SubstitutePolicy::Ground => {
                    DensityMatrix::from_pure(&PureState::qubit(site, ZERO, ONE))
                }
                // the Haar average of |φ⟩⟨φ| is I/2
                SubstitutePolicy::MaximallyMixed | SubstitutePolicy::RandomPure => {
                    DensityMatrix::maximally_mixed(site)
                }
            };
            enumerate_detection(scenario, secret, |_, c| {
                let rho = sub.conjugate(&c.matrix())?;
                Ok(1.0 - rho.fidelity_with_pure(&secret.state(site))?)
            })
        }
        (ScenarioKind::LieAboutX, SecretSampler::Fixed(secret)) => {
            let table = derive_correction_table(
                &scenario.layout,
                &InteractionSchedule::canonical(),
                scenario.receiver,
            )?;
            let k = table
                .x_atoms()
                .iter()
                .position(|&a| a == scenario.adversary)
                .expect("adversary");
            let site = Site::Atom(scenario.receiver);
            enumerate_detection(scenario, secret, |branch, _| {
                let (state, alice, x) = branch;
                let mut lied = x.to_vec();
                lied[k] ^= 1;
                let mut s = state.clone();
                s.apply_unitary(&table.lookup(alice, &lied)?.matrix(), &[site])?;
                Ok(1.0 - fidelity_up_to_phase(&secret.state(site), &s)?)
            })
        }
        (kind, _) => Err(QssError::InvalidParameter(format!(
            "{kind} has no check rounds"
        ))),
    }
}

type BranchView<'a> = (&'a PureState, &'a [usize], &'a [usize]);

fn enumerate_detection<F>(
    scenario: &SecurityScenario,
    secret: &SecretAmplitudes,
    mismatch: F,
) -> Result<f64>
where
    F: Fn(BranchView<'_>, crate::quantum::Correction) -> Result<f64>,
{
    let layout = &scenario.layout;
    let table =
        derive_correction_table(layout, &InteractionSchedule::canonical(), scenario.receiver)?;
    let initial = prepare_initial(secret, layout)?;
    let mut total = 0.0;
    for dist in distribute_exhaustive(&initial, layout, &InteractionSchedule::canonical())? {
        for rec in recover_exhaustive(&dist.residual, &dist.alice_outcome, &table, secret)? {
            // receiver's state before its correction
            let pre = project(
                &dist.residual,
                &PartyLayout::sites(table.x_atoms()),
                Basis::X,
                &rec.x_outcome,
            )?
            .into_state()
            .expect("recorded branch has nonzero probability");
            let p = dist.probability * rec.probability();
            total += p * mismatch((&pre, &dist.alice_outcome, &rec.x_outcome), rec.correction)?;
        }
    }
    Ok(total)
}
