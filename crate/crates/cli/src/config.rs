//! Run configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! nx = 4
//! nu = 2
//! seed = 42
//! n_samples = 1000000
//! output_dir = "out"
//! checks = []            # empty runs every check of the command
//!
//! [sigma]
//! kind = "random-spd"    # "identity" | "diagonal" | "random-spd"
//! eigenvalues = [3.0, 1.0]
//! range = [0.5, 3.0]
//!
//! [trainer]
//! rule = "oja"           # "oja" | "eghr"
//! mode = "closed"        # "closed" | "empirical"
//! learning_rate = 0.02
//! steps = 5000
//! batch_size = 100
//! record_every = 10
//! threshold = 1e-6
//! init = "random"        # "random" | "principal"
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use frame_hebb_core::learning::{Mode, Rule, TrainerConfig};
use frame_hebb_core::linalg::{CovarianceModel, Matrix};
use frame_hebb_core::{gaussian::derive_seed, random};
use serde::Deserialize;

use crate::checks::CheckName;
use crate::error::CliError;

/// Largest condition number of `Σ` the harness accepts.
///
/// The exact frame checks need far less: the restricted-inverse residual
/// grows like κ²·ε and the coefficient identities like κ·ε, so they meet
/// their tolerances only up to κ ≈ 10³ and report failures above that.
pub const MAX_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SigmaSpec {
    Identity,
    Diagonal { eigenvalues: Vec<f64> },
    /// Evenly spaced eigenvalues from `range[1]` down to `range[0]` in a
    /// seeded random orthonormal basis.
    RandomSpd { range: [f64; 2] },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitSpec {
    Random,
    Principal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleSpec {
    Oja,
    Eghr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Closed,
    Empirical,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerSection {
    pub rule: RuleSpec,
    pub mode: ModeSpec,
    pub learning_rate: Option<f64>,
    pub steps: usize,
    pub batch_size: usize,
    pub record_every: usize,
    pub threshold: f64,
    pub init: InitSpec,
}

impl Default for TrainerSection {
    fn default() -> Self {
        Self {
            rule: RuleSpec::Oja,
            mode: ModeSpec::Closed,
            learning_rate: None,
            steps: 5000,
            batch_size: 100,
            record_every: 10,
            threshold: 1e-6,
            init: InitSpec::Random,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub nx: usize,
    pub nu: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub output_dir: PathBuf,
    pub checks: Vec<String>,
    pub sigma: SigmaSpec,
    pub trainer: TrainerSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            nx: 4,
            nu: 2,
            seed: 42,
            n_samples: 1_000_000,
            output_dir: PathBuf::from("out"),
            checks: Vec::new(),
            sigma: SigmaSpec::RandomSpd { range: [0.5, 3.0] },
            trainer: TrainerSection::default(),
        }
    }
}

/// Flag values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub nx: Option<usize>,
    pub nu: Option<usize>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub checks: Option<Vec<String>>,
    pub rule: Option<RuleSpec>,
    pub mode: Option<ModeSpec>,
    pub learning_rate: Option<f64>,
    pub steps: Option<usize>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.nx {
            self.nx = v;
        }
        if let Some(v) = o.nu {
            self.nu = v;
        }
        if let Some(v) = o.samples {
            self.n_samples = v;
        }
        if let Some(v) = &o.out {
            self.output_dir = v.clone();
        }
        if let Some(v) = &o.checks {
            self.checks = v.clone();
        }
        if let Some(v) = o.rule {
            self.trainer.rule = v;
        }
        if let Some(v) = o.mode {
            self.trainer.mode = v;
        }
        if let Some(v) = o.learning_rate {
            self.trainer.learning_rate = Some(v);
        }
        if let Some(v) = o.steps {
            self.trainer.steps = v;
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.nx == 0 || self.nu == 0 {
            return Err(CliError::Config("nx and nu must be at least 1".into()));
        }
        if self.nu > self.nx {
            return Err(CliError::Config(format!("nu ({}) must not exceed nx ({})", self.nu, self.nx)));
        }
        if self.n_samples == 0 {
            return Err(CliError::Config("n_samples must be at least 1".into()));
        }
        for name in &self.checks {
            if CheckName::parse(name).is_none() {
                return Err(CliError::Config(format!("unknown check name '{name}'")));
            }
        }
        match &self.sigma {
            SigmaSpec::Identity => {}
            SigmaSpec::Diagonal { eigenvalues } => {
                if eigenvalues.len() != self.nx {
                    return Err(CliError::Config(format!(
                        "sigma lists {} eigenvalues but nx is {}",
                        eigenvalues.len(),
                        self.nx
                    )));
                }
            }
            SigmaSpec::RandomSpd { range } => {
                if !(range[0] > 0.0 && range[1] >= range[0]) {
                    return Err(CliError::Config("sigma range must satisfy 0 < lo <= hi".into()));
                }
            }
        }
        self.trainer_config()?.validate(self.mode()).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.trainer.threshold >= 0.0) {
            return Err(CliError::Config("trainer threshold must be non-negative".into()));
        }
        Ok(())
    }

    /// Builds `Σ`, rejecting anything with condition number above
    /// [`MAX_CONDITION`].
    pub fn covariance(&self) -> Result<CovarianceModel, CliError> {
        let eig: Vec<f64> = match &self.sigma {
            SigmaSpec::Identity => vec![1.0; self.nx],
            SigmaSpec::Diagonal { eigenvalues } => eigenvalues.clone(),
            SigmaSpec::RandomSpd { range } => {
                let [lo, hi] = *range;
                (0..self.nx)
                    .map(|i| if self.nx == 1 { hi } else { hi - (hi - lo) * i as f64 / (self.nx - 1) as f64 })
                    .collect()
            }
        };
        let (max, min) = eig.iter().fold((f64::MIN, f64::MAX), |(a, b), v| (a.max(*v), b.min(*v)));
        if !(min > 0.0) || max / min > MAX_CONDITION {
            return Err(CliError::Config(format!(
                "covariance is degenerate: eigenvalues span [{min:e}, {max:e}], condition limit {MAX_CONDITION:e}"
            )));
        }
        let cov = match &self.sigma {
            SigmaSpec::RandomSpd { .. } => {
                let q = random::orthogonal(&mut random::rng(derive_seed(self.seed, 0x5167_4d41)), self.nx);
                CovarianceModel::from_spectrum(&q, &eig)?
            }
            _ => CovarianceModel::new(Matrix::from_diagonal(&eig))?,
        };
        Ok(cov)
    }

    pub fn rule(&self) -> Rule {
        match self.trainer.rule {
            RuleSpec::Oja => Rule::Oja,
            RuleSpec::Eghr => Rule::Eghr,
        }
    }

    pub fn mode(&self) -> Mode {
        match self.trainer.mode {
            ModeSpec::Closed => Mode::Closed,
            ModeSpec::Empirical => Mode::Empirical,
        }
    }

    pub fn trainer_config(&self) -> Result<TrainerConfig, CliError> {
        let mode = self.mode();
        let base = match mode {
            Mode::Closed => TrainerConfig::closed(self.trainer.steps),
            Mode::Empirical => TrainerConfig::empirical(self.trainer.steps, derive_seed(self.seed, 0x7472_6169)),
        };
        Ok(TrainerConfig {
            learning_rate: self.trainer.learning_rate.unwrap_or(base.learning_rate),
            batch_size: if mode == Mode::Empirical { self.trainer.batch_size } else { 0 },
            record_every: self.trainer.record_every,
            ..base
        })
    }

    /// Canonical description of the inputs that determine a check's result.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "nx={};nu={};seed={};n={};sigma=", self.nx, self.nu, self.seed, self.n_samples);
        match &self.sigma {
            SigmaSpec::Identity => s.push_str("identity"),
            SigmaSpec::Diagonal { eigenvalues } => {
                let _ = write!(s, "diagonal{eigenvalues:?}");
            }
            SigmaSpec::RandomSpd { range } => {
                let _ = write!(s, "random-spd{range:?}");
            }
        }
        s
    }

    /// Like [`RunConfig::canonical`], with the trainer settings appended.
    pub fn canonical_with_trainer(&self) -> String {
        let t = &self.trainer;
        format!(
            "{};rule={:?};mode={:?};eta={:?};steps={};batch={};every={};threshold={:?};init={:?}",
            self.canonical(),
            t.rule,
            t.mode,
            t.learning_rate,
            t.steps,
            t.batch_size,
            t.record_every,
            t.threshold,
            t.init
        )
    }
}
