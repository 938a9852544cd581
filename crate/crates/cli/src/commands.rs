use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use qss_core::cavity::{
    default_ladder, validate_effective, InteractionSchedule, LadderPoint, ValidationEntry,
};
use qss_core::protocol::{
    parity_rule, Event, PartyLayout, Protocol, ProtocolTranscript, SecretAmplitudes,
    TranscriptLine, RECOVERY_TOL,
};
use qss_core::quantum::Basis;
use qss_core::rng::SeedTree;
use qss_core::security::{
    expected_detection_rate, simulate_scenario, ScenarioKind, SecretSampler, SecurityReport,
    SecurityScenario, SubstitutePolicy,
};
use qss_core::VERSION;

use crate::config::{ConfigArgs, ConfigError, ModeArg, SecretSpec};

/// Largest acceptable change in deviation when the Fock cutoff grows by 2.
pub const FOCK_TOL: f64 = 1e-3;
/// Target half-width of the success-rate interval.
pub const CI_HALF_WIDTH: f64 = 0.015;

const DEFAULT_FOCK_CUTOFF: usize = 8;
const DEFAULT_SAMPLES: usize = 50;
const DEFAULT_SECURITY_TRIALS: usize = 1000;

/// Result of a subcommand that ran to completion.
#[derive(Debug)]
pub struct Outcome {
    pub passed: bool,
    pub message: String,
    pub warnings: Vec<String>,
}

/// The resolved configuration embedded in every output. Output paths and
/// thread counts are left out: they do not affect results.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Resolved {
    pub subcommand: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_users: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub receiver: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub secret: Option<ResolvedSecret>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<ModeArg>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<Vec<LadderPoint>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fock_cutoff: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adversary: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub substitute: Option<SubstitutePolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResolvedSecret {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<[f64; 2]>,
}

impl ResolvedSecret {
    fn explicit(s: &SecretAmplitudes) -> Self {
        Self {
            source: "explicit",
            alpha: Some([s.alpha.re, s.alpha.im]),
            beta: Some([s.beta.re, s.beta.im]),
        }
    }

    fn drawn(s: &SecretAmplitudes) -> Self {
        Self {
            source: "haar-random",
            ..Self::explicit(s)
        }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    config: &'a Resolved,
    #[serde(flatten)]
    body: T,
}

fn to_json<T: Serialize>(config: &Resolved, body: T) -> String {
    let mut s = serde_json::to_string_pretty(&Envelope {
        version: VERSION,
        config,
        body,
    })
    .expect("report serializes");
    s.push('\n');
    s
}

fn emit(path: Option<&Path>, contents: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, contents).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout()
                .lock()
                .write_all(contents.as_bytes())
                .context("writing stdout")
        }
    }
}

fn layout_of(args: &ConfigArgs) -> Result<PartyLayout, ConfigError> {
    PartyLayout::new(args.n_users.unwrap_or(2)).map_err(|e| ConfigError(e.to_string()))
}

fn receiver_of(args: &ConfigArgs, layout: &PartyLayout) -> Result<u32, ConfigError> {
    let r = args.receiver.unwrap_or_else(|| layout.default_receiver());
    layout
        .check_receiver(r)
        .map_err(|e| ConfigError(e.to_string()))?;
    Ok(r)
}

/// Resolve the secret; Haar-random secrets are drawn from `seed / secret`.
fn secret_of(
    args: &ConfigArgs,
    warnings: &mut Vec<String>,
) -> Result<(SecretAmplitudes, ResolvedSecret), ConfigError> {
    match args.secret_spec()? {
        SecretSpec::HaarRandom => {
            let seed = args.require_seed("a haar-random secret")?;
            let s = SecretAmplitudes::haar(&mut SeedTree::new(seed).named("secret").rng());
            Ok((s, ResolvedSecret::drawn(&s)))
        }
        SecretSpec::Explicit(a, b) => {
            let (s, w) = SecretSpec::explicit(a, b)?;
            warnings.extend(w);
            Ok((s, ResolvedSecret::explicit(&s)))
        }
    }
}

/// First transcript line.
#[derive(Serialize)]
struct ConfigLine<'a> {
    event: &'static str,
    version: &'static str,
    config: &'a Resolved,
}

#[derive(Serialize)]
struct RunSummary {
    mode: ModeArg,
    branches: usize,
    min_fidelity: f64,
    mean_fidelity: f64,
    /// Recorded branches per Alice outcome.
    outcome_histogram: BTreeMap<String, usize>,
    /// Total probability per Alice outcome (exhaustive mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    outcome_probability: Option<BTreeMap<String, f64>>,
    passed: bool,
}

/// One CSV row per recorded branch.
struct BranchRow {
    trial: usize,
    branch: Option<usize>,
    alice: String,
    x: String,
    pauli: String,
    fidelity: f64,
    prob: f64,
}

fn branch_rows(lines: &[TranscriptLine]) -> Vec<BranchRow> {
    let mut rows = Vec::new();
    let mut cur: Option<BranchRow> = None;
    for line in lines {
        match &line.event {
            Event::AliceMeasure { outcome, .. } => {
                cur = Some(BranchRow {
                    trial: line.trial,
                    branch: line.branch,
                    alice: outcome.clone(),
                    x: String::new(),
                    pauli: String::new(),
                    fidelity: f64::NAN,
                    prob: 0.0,
                })
            }
            Event::XMeasure { outcome, .. } => {
                cur.as_mut().expect("x after alice").x.push_str(outcome)
            }
            Event::Correct { pauli, .. } => {
                cur.as_mut().expect("correct after alice").pauli = pauli.to_string()
            }
            Event::Recover { fidelity, prob, .. } => {
                let mut row = cur.take().expect("recover after alice");
                row.fidelity = *fidelity;
                row.prob = *prob;
                rows.push(row);
            }
            _ => {}
        }
    }
    rows
}

fn csv_text(rows: &[BranchRow]) -> String {
    let mut s = String::from("trial,branch,alice_outcome,x_outcomes,pauli,fidelity\n");
    for r in rows {
        let branch = r.branch.map(|b| b.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.trial, branch, r.alice, r.x, r.pauli, r.fidelity
        )
        .unwrap();
    }
    s
}

pub fn cmd_run(args: &ConfigArgs) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let layout = layout_of(args)?;
    let receiver = receiver_of(args, &layout)?;
    let mode = args.mode.unwrap_or(ModeArg::Exhaustive);
    let seed = match mode {
        ModeArg::Sampled => Some(args.require_seed("sampled mode")?),
        ModeArg::Exhaustive => args.seed,
    };
    let (secret, resolved_secret) = secret_of(args, &mut warnings)?;
    let canonical = InteractionSchedule::canonical();
    let schedule = InteractionSchedule::from_angles(
        args.lambda_t.unwrap_or(canonical.lambda_t),
        args.omega_t.unwrap_or(canonical.omega_t),
    );
    let trials = match mode {
        ModeArg::Sampled => {
            let t = args.trials.unwrap_or(1);
            if t == 0 {
                return Err(ConfigError("trials must be at least 1".into()).into());
            }
            Some(t)
        }
        ModeArg::Exhaustive => None,
    };
    let config = Resolved {
        subcommand: "run",
        n_users: Some(layout.n_users()),
        receiver: Some(receiver),
        secret: Some(resolved_secret),
        lambda_t: Some(schedule.lambda_t),
        omega_t: Some(schedule.omega_t),
        mode: Some(mode),
        trials,
        seed,
        ..Default::default()
    };

    let protocol = Protocol::new(layout, schedule, receiver)?;
    let lines: Vec<TranscriptLine> = match mode {
        ModeArg::Exhaustive => protocol.run_exhaustive(&secret, 0)?.lines,
        ModeArg::Sampled => {
            let seeds = SeedTree::new(seed.expect("sampled seed")).named("trial");
            let per_trial = (0..trials.expect("sampled trials"))
                .into_par_iter()
                .map(|i| protocol.run_sampled(&secret, seeds, i))
                .collect::<qss_core::Result<Vec<ProtocolTranscript>>>()?;
            per_trial.into_iter().flat_map(|t| t.lines).collect()
        }
    };

    let rows = branch_rows(&lines);
    let min_fidelity = rows
        .iter()
        .map(|r| r.fidelity)
        .fold(f64::INFINITY, f64::min);
    let mean_fidelity = match mode {
        ModeArg::Exhaustive => {
            rows.iter().map(|r| r.fidelity * r.prob).sum::<f64>()
                / rows.iter().map(|r| r.prob).sum::<f64>()
        }
        ModeArg::Sampled => rows.iter().map(|r| r.fidelity).sum::<f64>() / rows.len() as f64,
    };
    let mut outcome_histogram = BTreeMap::new();
    let mut outcome_probability = BTreeMap::new();
    for r in &rows {
        *outcome_histogram.entry(r.alice.clone()).or_insert(0) += 1;
        *outcome_probability.entry(r.alice.clone()).or_insert(0.0) += r.prob;
    }
    let passed = min_fidelity >= 1.0 - RECOVERY_TOL;
    let summary = RunSummary {
        mode,
        branches: rows.len(),
        min_fidelity,
        mean_fidelity,
        outcome_histogram,
        outcome_probability: (mode == ModeArg::Exhaustive).then_some(outcome_probability),
        passed,
    };

    let mut jsonl = serde_json::to_string(&ConfigLine {
        event: "config",
        version: VERSION,
        config: &config,
    })?;
    jsonl.push('\n');
    for line in &lines {
        jsonl.push_str(&serde_json::to_string(line)?);
        jsonl.push('\n');
    }
    emit(args.out.as_deref(), &jsonl)?;
    let summary_text = to_json(&config, &summary);
    match &args.summary {
        Some(p) => emit(Some(p), &summary_text)?,
        None => eprint!("{summary_text}"),
    }
    if let Some(p) = &args.csv {
        emit(Some(p), &csv_text(&rows))?;
    }
    let message = format!(
        "{} branches, min fidelity {:.12}, mean fidelity {:.12}",
        rows.len(),
        min_fidelity,
        mean_fidelity
    );
    Ok(Outcome {
        passed,
        message: if passed {
            message
        } else {
            format!("recovery below 1 - {RECOVERY_TOL:e}: {message}")
        },
        warnings,
    })
}

pub fn cmd_table(args: &ConfigArgs) -> Result<Outcome> {
    let layout = layout_of(args)?;
    let receiver = receiver_of(args, &layout)?;
    let config = Resolved {
        subcommand: "table",
        n_users: Some(layout.n_users()),
        receiver: Some(receiver),
        ..Default::default()
    };
    let protocol = Protocol::new(layout, InteractionSchedule::canonical(), receiver)?;
    let table = protocol.table();

    let mismatches: Vec<String> = table
        .iter()
        .filter(|(a, x, c)| parity_rule(&layout, receiver, a, x) != *c)
        .map(|(a, x, c)| format!("{}/{} -> {c}", Basis::Z.format(a), Basis::X.format(x)))
        .collect();
    emit(args.out.as_deref(), &to_json(&config, table))?;

    let all_e = vec![1; table.alice_atoms().len()];
    let all_plus = vec![0; table.x_atoms().len()];
    let spot = table.lookup(&all_e, &all_plus)?;
    eprintln!(
        "spot check: ({}, {}) -> {spot}",
        Basis::Z.format(&all_e),
        Basis::X.format(&all_plus)
    );

    let passed = mismatches.is_empty();
    Ok(Outcome {
        passed,
        message: if passed {
            format!("{} entries, all verified", table.len())
        } else {
            format!(
                "closed-form rule disagrees on {} entries: {}",
                mismatches.len(),
                mismatches.join(", ")
            )
        },
        warnings: Vec::new(),
    })
}

#[derive(Serialize)]
struct ValidationBody<'a> {
    fock_cutoff: usize,
    samples: usize,
    seed: u64,
    ladder: &'a [ValidationEntry],
    trend: TrendCheck,
    fock_convergence: FockCheck,
    warnings: &'a [String],
}

#[derive(Serialize)]
struct TrendCheck {
    /// `None` when the ladder has a single point.
    passed: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notice: Option<String>,
}

#[derive(Serialize)]
struct FockCheck {
    raised_cutoff: usize,
    per_point: Vec<f64>,
    max_change: f64,
    tolerance: f64,
    passed: bool,
}

pub fn cmd_validate(args: &ConfigArgs) -> Result<Outcome> {
    let ladder = args.ladder_points()?.unwrap_or_else(default_ladder);
    let fock_cutoff = args.fock_cutoff.unwrap_or(DEFAULT_FOCK_CUTOFF);
    let samples = args.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = args.require_seed("validation sampling")?;
    for p in &ladder {
        qss_core::cavity::CavityParams::from_ratios(
            p.delta_over_g,
            p.omega_over_delta,
            fock_cutoff,
        )
        .map_err(|e| ConfigError(e.to_string()))?;
    }
    if samples < 10 {
        return Err(ConfigError("samples must be at least 10".into()).into());
    }
    let config = Resolved {
        subcommand: "validate",
        ladder: Some(ladder.clone()),
        fock_cutoff: Some(fock_cutoff),
        samples: Some(samples),
        seed: Some(seed),
        ..Default::default()
    };

    let base = validate_effective(&ladder, fock_cutoff, samples, seed)?;
    let raised = validate_effective(&ladder, fock_cutoff + 2, samples, seed)?;
    let per_point: Vec<f64> = base
        .ladder
        .iter()
        .zip(&raised.ladder)
        .map(|(a, b)| (a.deviation - b.deviation).abs())
        .collect();
    let max_change = per_point.iter().copied().fold(0.0, f64::max);
    let fock = FockCheck {
        raised_cutoff: fock_cutoff + 2,
        per_point,
        max_change,
        tolerance: FOCK_TOL,
        passed: max_change < FOCK_TOL,
    };
    let trend_passed = base.trend_ok();
    let trend = TrendCheck {
        passed: trend_passed,
        notice: trend_passed
            .is_none()
            .then(|| "single-point ladder: trend check skipped".to_string()),
    };
    let warnings: Vec<String> = base
        .ladder
        .iter()
        .filter(|e| e.leak_warning)
        .map(|e| {
            format!(
                "truncation leak {:.3e} at delta/g={}, omega/delta={}, F={}",
                e.leak, e.delta_over_g, e.omega_over_delta, e.fock_cutoff
            )
        })
        .collect();
    if let Some(n) = &trend.notice {
        eprintln!("notice: {n}");
    }
    let passed = trend_passed != Some(false) && fock.passed;
    let message = format!(
        "trend {}, max Fock change {:.3e}",
        match trend_passed {
            Some(true) => "pass",
            Some(false) => "FAIL",
            None => "skipped",
        },
        fock.max_change
    );
    let body = ValidationBody {
        fock_cutoff,
        samples,
        seed,
        ladder: &base.ladder,
        trend,
        fock_convergence: fock,
        warnings: &warnings,
    };
    emit(args.out.as_deref(), &to_json(&config, body))?;
    Ok(Outcome {
        passed,
        message,
        warnings,
    })
}

#[derive(Serialize)]
struct SecurityBody<'a> {
    #[serde(flatten)]
    report: &'a SecurityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    expected_detection_rate: Option<f64>,
    assertion: &'static str,
    passed: bool,
    warnings: &'a [String],
}

pub fn cmd_security(args: &ConfigArgs) -> Result<Outcome> {
    let mut warnings = Vec::new();
    let layout = layout_of(args)?;
    let kind: ScenarioKind = args
        .scenario
        .as_deref()
        .ok_or_else(|| ConfigError("--scenario is required".into()))?
        .parse()
        .map_err(ConfigError)?;
    let adversary = args.adversary.unwrap_or(4);
    let receiver = match (kind, args.receiver) {
        (_, Some(r)) => r,
        (
            ScenarioKind::AssignedWithCooperation | ScenarioKind::AssignedWithoutCooperation,
            None,
        ) => adversary,
        (_, None) if adversary == layout.default_receiver() => 4,
        (_, None) => layout.default_receiver(),
    };
    let substitute: SubstitutePolicy = match &args.substitute {
        Some(s) => s.parse().map_err(ConfigError)?,
        None => SubstitutePolicy::Ground,
    };
    let scenario = SecurityScenario {
        kind,
        layout,
        adversary,
        receiver,
        substitute,
    };
    scenario
        .validate()
        .map_err(|e| ConfigError(e.to_string()))?;
    let trials = args.trials.unwrap_or(DEFAULT_SECURITY_TRIALS);
    if trials == 0 {
        return Err(ConfigError("trials must be at least 1".into()).into());
    }
    let seed = args.require_seed("security trials")?;
    let (sampler, resolved_secret) = match args.secret_spec()? {
        SecretSpec::HaarRandom => (
            SecretSampler::Haar,
            ResolvedSecret {
                source: "haar-random",
                alpha: None,
                beta: None,
            },
        ),
        SecretSpec::Explicit(a, b) => {
            let (s, w) = SecretSpec::explicit(a, b)?;
            warnings.extend(w);
            (SecretSampler::Fixed(s), ResolvedSecret::explicit(&s))
        }
    };
    let config = Resolved {
        subcommand: "security",
        n_users: Some(layout.n_users()),
        receiver: Some(receiver),
        secret: Some(resolved_secret),
        trials: Some(trials),
        scenario: Some(kind),
        adversary: Some(adversary),
        substitute: (kind == ScenarioKind::InterceptResend).then_some(substitute),
        seed: Some(seed),
        ..Default::default()
    };

    let report = simulate_scenario(&scenario, &sampler, trials, seed)?;
    let half_width = (report.ci[1] - report.ci[0]) / 2.0;
    if half_width > CI_HALF_WIDTH {
        warnings.push(format!(
            "{trials} trials give a success-rate interval half-width of {half_width:.4}, above {CI_HALF_WIDTH}"
        ));
    }
    let expected = if kind.has_check_rounds() {
        Some(expected_detection_rate(&scenario, &sampler)?)
    } else {
        None
    };
    let (assertion, passed) = match kind {
        ScenarioKind::Honest => (
            "success_rate == 1 and detection_rate == 0",
            report.success_rate == 1.0 && report.detection_rate == Some(0.0),
        ),
        ScenarioKind::AssignedWithCooperation => ("success_rate == 1", report.success_rate == 1.0),
        ScenarioKind::AssignedWithoutCooperation => (
            "0.5 inside the 95% interval",
            report.ci[0] <= 0.5 && 0.5 <= report.ci[1],
        ),
        ScenarioKind::LieAboutX | ScenarioKind::InterceptResend => ("report only", true),
    };
    let body = SecurityBody {
        report: &report,
        expected_detection_rate: expected,
        assertion,
        passed,
        warnings: &warnings,
    };
    emit(args.out.as_deref(), &to_json(&config, body))?;
    let mut message = format!(
        "{kind}: success_rate {} over {} trials, 95% interval [{:.4}, {:.4}]",
        report.success_rate, report.trials, report.ci[0], report.ci[1]
    );
    if let Some(d) = report.detection_rate {
        write!(message, ", detection_rate {d}").unwrap();
    }
    if !passed {
        message = format!("assertion failed ({assertion}): {message}");
    }
    Ok(Outcome {
        passed,
        message,
        warnings,
    })
}
