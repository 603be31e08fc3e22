//! The named checks the harness can run, and how each maps onto the core
//! library.

use frame_hebb_core::checks::{self, CheckOutcome, Estimator};
use frame_hebb_core::gaussian::derive_seed;
use frame_hebb_core::learning::WeightMatrix;
use frame_hebb_core::linalg::CovarianceModel;
use frame_hebb_core::random;

use crate::config::RunConfig;
use crate::error::CliError;

/// Random instances drawn by the pointwise identity checks.
pub const INSTANCES: usize = 1000;
/// Skew directions fed to the kernel check.
pub const SKEW_DIRECTIONS: usize = 100;
/// Sample size for the Stein check, capped by `n_samples`.
pub const STEIN_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckName {
    ClosedFormIdentity,
    FixedPointSharing,
    SteinIdentity,
    OjaEmpiricalRate,
    EghrEmpiricalRate,
    FrameBounds,
    KernelAnnihilation,
    RestrictedInverse,
    CoefficientIdentity,
    CancellationIdentity,
    IsserlisConsistency,
    FrameOperatorAgreement,
    FrameOperatorRate,
    ReconstructionRate,
    DerivationExact,
    DerivationMonteCarlo,
}

pub const EQUIVALENCE_CHECKS: [CheckName; 5] = [
    CheckName::ClosedFormIdentity,
    CheckName::FixedPointSharing,
    CheckName::SteinIdentity,
    CheckName::OjaEmpiricalRate,
    CheckName::EghrEmpiricalRate,
];

pub const FRAME_CHECKS: [CheckName; 11] = [
    CheckName::FrameBounds,
    CheckName::KernelAnnihilation,
    CheckName::RestrictedInverse,
    CheckName::CoefficientIdentity,
    CheckName::CancellationIdentity,
    CheckName::IsserlisConsistency,
    CheckName::FrameOperatorAgreement,
    CheckName::FrameOperatorRate,
    CheckName::ReconstructionRate,
    CheckName::DerivationExact,
    CheckName::DerivationMonteCarlo,
];

pub const GROUP_LEARNING: &str = "learning-rule-identities";
pub const GROUP_FRAME: &str = "frame-machinery";
pub const GROUP_TRAINING: &str = "training";

impl CheckName {
    pub const ALL: [CheckName; 16] = [
        CheckName::ClosedFormIdentity,
        CheckName::FixedPointSharing,
        CheckName::SteinIdentity,
        CheckName::OjaEmpiricalRate,
        CheckName::EghrEmpiricalRate,
        CheckName::FrameBounds,
        CheckName::KernelAnnihilation,
        CheckName::RestrictedInverse,
        CheckName::CoefficientIdentity,
        CheckName::CancellationIdentity,
        CheckName::IsserlisConsistency,
        CheckName::FrameOperatorAgreement,
        CheckName::FrameOperatorRate,
        CheckName::ReconstructionRate,
        CheckName::DerivationExact,
        CheckName::DerivationMonteCarlo,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::ClosedFormIdentity => "closed-form-identity",
            CheckName::FixedPointSharing => "fixed-point-sharing",
            CheckName::SteinIdentity => "stein-identity",
            CheckName::OjaEmpiricalRate => "oja-empirical-rate",
            CheckName::EghrEmpiricalRate => "eghr-empirical-rate",
            CheckName::FrameBounds => "frame-bounds",
            CheckName::KernelAnnihilation => "kernel-annihilation",
            CheckName::RestrictedInverse => "restricted-inverse",
            CheckName::CoefficientIdentity => "coefficient-identity",
            CheckName::CancellationIdentity => "cancellation-identity",
            CheckName::IsserlisConsistency => "isserlis-consistency",
            CheckName::FrameOperatorAgreement => "frame-operator-agreement",
            CheckName::FrameOperatorRate => "frame-operator-rate",
            CheckName::ReconstructionRate => "reconstruction-rate",
            CheckName::DerivationExact => "derivation-exact",
            CheckName::DerivationMonteCarlo => "derivation-monte-carlo",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }

    pub fn group(self) -> &'static str {
        if EQUIVALENCE_CHECKS.contains(&self) {
            GROUP_LEARNING
        } else {
            GROUP_FRAME
        }
    }

    /// Stable per-check stream index, so a check's seed does not depend on
    /// which other checks were selected.
    fn stream(self) -> u64 {
        Self::ALL.iter().position(|c| *c == self).unwrap() as u64 + 1
    }

    pub fn seed(self, base: u64) -> u64 {
        derive_seed(base, self.stream())
    }
}

/// The checks of `available` that `cfg.checks` selects (all when empty),
/// in registry order.
pub fn select(cfg: &RunConfig, available: &[CheckName]) -> Result<Vec<CheckName>, CliError> {
    if cfg.checks.is_empty() {
        return Ok(available.to_vec());
    }
    let mut wanted = Vec::new();
    for name in &cfg.checks {
        let c = CheckName::parse(name).ok_or_else(|| CliError::Config(format!("unknown check name '{name}'")))?;
        if !available.contains(&c) {
            return Err(CliError::Config(format!("check '{name}' does not belong to this command")));
        }
        wanted.push(c);
    }
    Ok(available.iter().copied().filter(|c| wanted.contains(c)).collect())
}

/// Runs one check on the configured covariance with its derived seed.
pub fn run(check: CheckName, cfg: &RunConfig, cov: &CovarianceModel, seed: u64) -> Result<CheckOutcome, CliError> {
    let mut rng = random::rng(seed);
    let nu = cfg.nu;
    let n = cfg.n_samples;
    // One fixed W for the sampling checks, drawn first from the check's stream.
    let w = || -> Result<WeightMatrix, CliError> {
        let mut r = random::rng(derive_seed(seed, 0));
        Ok(WeightMatrix::new(random::uniform_matrix(&mut r, nu, cov.dim(), 1.0))?)
    };
    let sizes = checks::decade_sizes(n);
    let outcome = match check {
        CheckName::ClosedFormIdentity => {
            let ws = (0..INSTANCES)
                .map(|_| WeightMatrix::new(random::uniform_matrix(&mut rng, nu, cov.dim(), 1.0)))
                .collect::<Result<Vec<_>, _>>()?;
            checks::closed_form_identity(ws.iter().map(|w| (w, cov)))?
        }
        CheckName::FixedPointSharing => checks::fixed_point_sharing(&mut rng, cov, nu, INSTANCES)?,
        CheckName::SteinIdentity => checks::stein_identity(cov, n.clamp(2, STEIN_SAMPLES), seed)?,
        CheckName::OjaEmpiricalRate => checks::convergence_rate(Estimator::OjaUpdate, &w()?, cov, &sizes, seed)?,
        CheckName::EghrEmpiricalRate => checks::convergence_rate(Estimator::EghrUpdate, &w()?, cov, &sizes, seed)?,
        CheckName::FrameBounds => checks::frame_bounds_check(&mut rng, cov, INSTANCES)?,
        CheckName::KernelAnnihilation => checks::kernel_annihilation(&mut rng, cov, SKEW_DIRECTIONS)?,
        CheckName::RestrictedInverse => checks::restricted_inverse_check(&mut rng, cov, INSTANCES)?,
        CheckName::CoefficientIdentity => checks::coefficient_identity(&mut rng, cov, nu, INSTANCES)?,
        CheckName::CancellationIdentity => checks::cancellation_identity(&mut rng, cov, nu, INSTANCES)?,
        CheckName::IsserlisConsistency => checks::isserlis_consistency(cov)?,
        CheckName::FrameOperatorAgreement => checks::frame_operator_agreement(cov, n.max(2), seed)?,
        CheckName::FrameOperatorRate => checks::convergence_rate(Estimator::FrameOperator, &w()?, cov, &sizes, seed)?,
        CheckName::ReconstructionRate => checks::convergence_rate(Estimator::Reconstruction, &w()?, cov, &sizes, seed)?,
        CheckName::DerivationExact => checks::derivation_exact(&w()?, cov, n.max(2), seed)?,
        CheckName::DerivationMonteCarlo => checks::derivation_monte_carlo(&w()?, cov, n.max(2), seed)?,
    };
    Ok(outcome)
}
