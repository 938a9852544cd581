use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qss_core::cavity::LadderPoint;
use qss_core::protocol::SecretAmplitudes;

/// Secrets whose norm is off by at most this much are renormalized.
pub const RENORMALIZE_TOL: f64 = 1e-6;

pub const SEED_ENV: &str = "QSS_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "qss",
    version,
    about = "Cavity-QED quantum secret sharing simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the protocol and write a JSON-lines transcript.
    Run(ConfigArgs),
    /// Build and export the receiver's correction table.
    Table(ConfigArgs),
    /// Compare the effective two-atom evolution against the full cavity model.
    Validate(ConfigArgs),
    /// Simulate an adversary scenario.
    Security(ConfigArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run(_) => "run",
            Command::Table(_) => "table",
            Command::Validate(_) => "validate",
            Command::Security(_) => "security",
        }
    }

    pub fn args(&self) -> &ConfigArgs {
        match self {
            Command::Run(a) | Command::Table(a) | Command::Validate(a) | Command::Security(a) => a,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

/// Flags shared by every subcommand. A `--config` JSON file uses the same
/// names in snake_case; flags win over the file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigArgs {
    /// JSON file with flat keys mirroring these flags.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// `haar-random` or `alpha_re,alpha_im,beta_re,beta_im`.
    #[arg(long, allow_hyphen_values = true)]
    pub secret: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_im: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta_im: Option<f64>,
    #[arg(long)]
    pub n_users: Option<u32>,
    /// Atom label of the receiving user (default: the last user's atom).
    #[arg(long)]
    pub receiver: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_t: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_t: Option<f64>,
    #[arg(long)]
    pub delta_over_g: Option<f64>,
    #[arg(long)]
    pub omega_over_delta: Option<f64>,
    /// Validation ladder as `d:o,d:o,...` (δ/g and Ω/δ per point).
    #[arg(long)]
    pub ladder: Option<String>,
    #[arg(long)]
    pub fock_cutoff: Option<usize>,
    /// Random two-atom inputs per validation point.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Root seed; falls back to the QSS_SEED environment variable.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// a | b | c | d | honest, or the long scenario names.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Adversary's atom label.
    #[arg(long)]
    pub adversary: Option<u32>,
    /// ground | mixed | random
    #[arg(long)]
    pub substitute: Option<String>,
    /// Main output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary file for `run` (stderr when absent).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// CSV summary with one row per recorded branch.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
}

macro_rules! overlay {
    ($flags:expr, $file:expr; $($field:ident),* $(,)?) => {
        ConfigArgs { config: None, $($field: $flags.$field.clone().or($file.$field),)* }
    };
}

impl ConfigArgs {
    /// Flags over file values.
    pub fn over(&self, file: ConfigArgs) -> ConfigArgs {
        overlay!(self, file; secret, alpha_re, alpha_im, beta_re, beta_im, n_users, receiver,
            lambda_t, omega_t, delta_over_g, omega_over_delta, ladder, fock_cutoff, samples,
            trials, seed, mode, scenario, adversary, substitute, out, summary, csv, threads)
    }

    /// Read `--config` (if any), overlay the flags and apply the seed fallback.
    pub fn resolve(&self) -> Result<ConfigArgs, ConfigError> {
        let mut merged = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| {
                    ConfigError(format!("cannot read config {}: {e}", path.display()))
                })?;
                let file: ConfigArgs = serde_json::from_str(&text)
                    .map_err(|e| ConfigError(format!("bad config {}: {e}", path.display())))?;
                self.over(file)
            }
            None => self.clone(),
        };
        if merged.seed.is_none() {
            if let Ok(v) = std::env::var(SEED_ENV) {
                let seed = v.trim().parse().map_err(|_| {
                    ConfigError(format!("{SEED_ENV}={v:?} is not an unsigned integer"))
                })?;
                merged.seed = Some(seed);
            }
        }
        Ok(merged)
    }

    pub fn require_seed(&self, why: &str) -> Result<u64, ConfigError> {
        self.seed.ok_or_else(|| {
            ConfigError(format!(
                "a seed is required for {why} (pass --seed or set {SEED_ENV})"
            ))
        })
    }

    pub fn secret_spec(&self) -> Result<SecretSpec, ConfigError> {
        let parts = [self.alpha_re, self.alpha_im, self.beta_re, self.beta_im];
        let has_parts = parts.iter().any(Option::is_some);
        match (&self.secret, has_parts) {
            (Some(_), true) => Err(ConfigError(
                "give the secret either as --secret or as --alpha-re/... not both".into(),
            )),
            (None, true) => {
                let [ar, ai, br, bi] = parts.map(|p| p.unwrap_or(0.0));
                Ok(SecretSpec::Explicit(
                    Complex64::new(ar, ai),
                    Complex64::new(br, bi),
                ))
            }
            (None, false) => Ok(SecretSpec::HaarRandom),
            (Some(s), false) => SecretSpec::parse(s),
        }
    }

    pub fn ladder_points(&self) -> Result<Option<Vec<LadderPoint>>, ConfigError> {
        match (&self.ladder, self.delta_over_g, self.omega_over_delta) {
            (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(ConfigError(
                "give either --ladder or --delta-over-g/--omega-over-delta".into(),
            )),
            (Some(text), None, None) => text
                .split(',')
                .map(|pair| {
                    let (d, o) = pair
                        .split_once(':')
                        .ok_or_else(|| ConfigError(format!("ladder point {pair:?} is not d:o")))?;
                    let num = |s: &str| {
                        s.trim().parse::<f64>().map_err(|_| {
                            ConfigError(format!("ladder point {pair:?} is not numeric"))
                        })
                    };
                    Ok(LadderPoint::new(num(d)?, num(o)?))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            (None, Some(d), Some(o)) => Ok(Some(vec![LadderPoint::new(d, o)])),
            (None, None, None) => Ok(None),
            _ => Err(ConfigError(
                "--delta-over-g and --omega-over-delta go together".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SecretSpec {
    HaarRandom,
    Explicit(Complex64, Complex64),
}

impl SecretSpec {
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        if s == "haar-random" {
            return Ok(SecretSpec::HaarRandom);
        }
        let nums = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| {
                ConfigError(format!(
                    "secret {s:?} is neither haar-random nor four numbers"
                ))
            })?;
        match nums[..] {
            [ar, ai, br, bi] => Ok(SecretSpec::Explicit(
                Complex64::new(ar, ai),
                Complex64::new(br, bi),
            )),
            _ => Err(ConfigError(format!(
                "secret {s:?} needs alpha_re,alpha_im,beta_re,beta_im"
            ))),
        }
    }

    /// Check normalization; returns the secret and a warning when it was
    /// renormalized.
    pub fn explicit(
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<(SecretAmplitudes, Option<String>), ConfigError> {
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > RENORMALIZE_TOL {
            return Err(ConfigError(format!(
                "secret must be normalized: |alpha|^2 + |beta|^2 = {:.6} (allowed norm error {RENORMALIZE_TOL:e})",
                norm * norm
            )));
        }
        let warning = ((norm - 1.0).abs() > 1e-12)
            .then(|| format!("secret norm {norm:.9} renormalized to 1"));
        let secret =
            SecretAmplitudes::normalized(alpha, beta).map_err(|e| ConfigError(e.to_string()))?;
        Ok((secret, warning))
    }
}

/// Invalid or missing configuration; exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}
