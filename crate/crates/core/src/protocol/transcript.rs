use serde::{Deserialize, Serialize};

use super::distribution::{distribute_exhaustive, distribute_sampled, prepare_initial};
use super::recovery::{recover_exhaustive, recover_sampled, RecoveryBranch};
use super::{
    derive_correction_table, CorrectionTable, DistributionBranch, PartyLayout, SecretAmplitudes,
};
use crate::cavity::InteractionSchedule;
use crate::quantum::{Basis, Correction};
use crate::rng::SeedTree;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

/// One protocol step. Serialized with an `"event"` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Prepare {
        sites: Vec<u32>,
        alpha: [f64; 2],
        beta: [f64; 2],
    },
    Interact {
        pair: [u32; 2],
        lambda_t: f64,
        omega_t: f64,
    },
    AliceMeasure {
        sites: Vec<u32>,
        outcome: String,
        prob: f64,
    },
    /// Classical message on the public channel.
    Announce {
        from: String,
        to: String,
        message: String,
    },
    XMeasure {
        user: u32,
        outcome: String,
        prob: f64,
    },
    Correct {
        user: u32,
        pauli: Correction,
    },
    /// `prob` is the joint probability of the branch ending here.
    Recover {
        user: u32,
        fidelity: f64,
        prob: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptLine {
    pub trial: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<usize>,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolTranscript {
    pub n_users: u32,
    pub receiver: u32,
    pub schedule: InteractionSchedule,
    pub mode: Mode,
    pub seed: Option<u64>,
    pub lines: Vec<TranscriptLine>,
}

impl ProtocolTranscript {
    fn recoveries(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.lines.iter().filter_map(|l| match l.event {
            Event::Recover { fidelity, prob, .. } => Some((fidelity, prob)),
            _ => None,
        })
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.recoveries().map(|(f, _)| f).collect()
    }

    pub fn branch_probabilities(&self) -> Vec<f64> {
        self.recoveries().map(|(_, p)| p).collect()
    }

    pub fn min_fidelity(&self) -> f64 {
        self.fidelities().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Probability-weighted fidelity over the recorded branches.
    pub fn mean_fidelity(&self) -> f64 {
        let (num, den) = self
            .recoveries()
            .fold((0.0, 0.0), |(n, d), (f, p)| (n + f * p, d + p));
        num / den
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            out.push_str(&serde_json::to_string(line).expect("transcript line serializes"));
            out.push('\n');
        }
        out
    }
}

/// A configured protocol instance: layout, interaction schedule, receiver and
/// the correction table (always derived on the canonical schedule, so a
/// perturbed schedule shows up as imperfect recovery).
#[derive(Debug, Clone)]
pub struct Protocol {
    layout: PartyLayout,
    schedule: InteractionSchedule,
    table: CorrectionTable,
}

impl Protocol {
    pub fn new(layout: PartyLayout, schedule: InteractionSchedule, receiver: u32) -> Result<Self> {
        let table = derive_correction_table(&layout, &InteractionSchedule::canonical(), receiver)?;
        Ok(Self {
            layout,
            schedule,
            table,
        })
    }

    pub fn with_table(
        layout: PartyLayout,
        schedule: InteractionSchedule,
        table: CorrectionTable,
    ) -> Self {
        Self {
            layout,
            schedule,
            table,
        }
    }

    pub fn layout(&self) -> &PartyLayout {
        &self.layout
    }

    pub fn schedule(&self) -> &InteractionSchedule {
        &self.schedule
    }

    pub fn table(&self) -> &CorrectionTable {
        &self.table
    }

    pub fn receiver(&self) -> u32 {
        self.table.receiver()
    }

    fn preamble(&self, secret: &SecretAmplitudes, trial: usize) -> Vec<TranscriptLine> {
        let line = |event| TranscriptLine {
            trial,
            branch: None,
            event,
        };
        let mut lines = vec![line(Event::Prepare {
            sites: (1..=self.layout.atom_count()).collect(),
            alpha: [secret.alpha.re, secret.alpha.im],
            beta: [secret.beta.re, secret.beta.im],
        })];
        for pair in self.layout.cavity_pairs() {
            lines.push(line(Event::Interact {
                pair,
                lambda_t: self.schedule.lambda_t,
                omega_t: self.schedule.omega_t,
            }));
        }
        lines
    }

    fn branch_lines(
        &self,
        trial: usize,
        branch: Option<usize>,
        dist: &DistributionBranch,
        rec: &RecoveryBranch,
    ) -> Vec<TranscriptLine> {
        let line = |event| TranscriptLine {
            trial,
            branch,
            event,
        };
        let receiver = self.receiver();
        let alice = dist.alice_string();
        let mut lines = vec![
            line(Event::AliceMeasure {
                sites: self.layout.measured_atoms(),
                outcome: alice.clone(),
                prob: dist.probability,
            }),
            line(Event::Announce {
                from: "alice".into(),
                to: "all".into(),
                message: alice,
            }),
        ];
        for ((&atom, &digit), &prob) in self
            .table
            .x_atoms()
            .iter()
            .zip(&rec.x_outcome)
            .zip(&rec.x_probabilities)
        {
            let outcome = Basis::X.symbol(digit).to_string();
            lines.push(line(Event::XMeasure {
                user: atom,
                outcome: outcome.clone(),
                prob,
            }));
            lines.push(line(Event::Announce {
                from: self.layout.user_name(atom),
                to: self.layout.user_name(receiver),
                message: outcome,
            }));
        }
        lines.push(line(Event::Correct {
            user: receiver,
            pauli: rec.correction,
        }));
        lines.push(line(Event::Recover {
            user: receiver,
            fidelity: rec.fidelity,
            prob: dist.probability * rec.probability(),
        }));
        lines
    }

    /// Enumerate every (Alice outcome, X outcomes) branch.
    pub fn run_exhaustive(
        &self,
        secret: &SecretAmplitudes,
        trial: usize,
    ) -> Result<ProtocolTranscript> {
        let initial = prepare_initial(secret, &self.layout)?;
        let mut lines = self.preamble(secret, trial);
        let mut branch = 0;
        for dist in distribute_exhaustive(&initial, &self.layout, &self.schedule)? {
            for rec in recover_exhaustive(&dist.residual, &dist.alice_outcome, &self.table, secret)?
            {
                lines.extend(self.branch_lines(trial, Some(branch), &dist, &rec));
                branch += 1;
            }
        }
        Ok(self.transcript(Mode::Exhaustive, None, lines))
    }

    /// One sampled run; trial `trial` draws from `seeds.child(trial)` only.
    pub fn run_sampled(
        &self,
        secret: &SecretAmplitudes,
        seeds: SeedTree,
        trial: usize,
    ) -> Result<ProtocolTranscript> {
        let mut rng = seeds.child(trial as u64).rng();
        let initial = prepare_initial(secret, &self.layout)?;
        let mut lines = self.preamble(secret, trial);
        let dist = distribute_sampled(&initial, &self.layout, &self.schedule, &mut rng)?;
        let rec = recover_sampled(
            &dist.residual,
            &dist.alice_outcome,
            &self.table,
            secret,
            &mut rng,
        )?;
        lines.extend(self.branch_lines(trial, None, &dist, &rec));
        Ok(self.transcript(Mode::Sampled, None, lines))
    }

    fn transcript(
        &self,
        mode: Mode,
        seed: Option<u64>,
        lines: Vec<TranscriptLine>,
    ) -> ProtocolTranscript {
        ProtocolTranscript {
            n_users: self.layout.n_users(),
            receiver: self.receiver(),
            schedule: self.schedule,
            mode,
            seed,
            lines,
        }
    }
}

/// Prepare, distribute and recover once in sampled mode on the canonical schedule.
pub fn run_full_trial(
    secret: &SecretAmplitudes,
    layout: &PartyLayout,
    receiver: u32,
    seed: u64,
) -> Result<ProtocolTranscript> {
    let protocol = Protocol::new(*layout, InteractionSchedule::canonical(), receiver)?;
    let mut t = protocol.run_sampled(secret, SeedTree::new(seed).named("trial"), 0)?;
    t.seed = Some(seed);
    Ok(t)
}
