//! Error taxonomy and the exit-code contract.
//!
//! Every failure surfaces as exactly one line on stderr of the form
//!
//! ```text
//! gmlab: error[<kind>] <message>
//! ```
//!
//! with the process exit code determined by the kind: `2` for configuration
//! errors (bad flags, unknown kernels, unreadable files), `3` for numeric
//! precision or invariant failures, `4` for instances too large to solve.

use gmlab_core::chain::ChainError;
use gmlab_core::existence::DerivationError;
use gmlab_core::gfunctions::EvalError;
use gmlab_core::hellinger::HellingerError;
use gmlab_core::transfer::TransferError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Precision(String),
    #[error("{0}")]
    TooLarge(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Precision(_) => "precision",
            CliError::TooLarge(_) => "too-large",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Precision(_) => 3,
            CliError::TooLarge(_) => 4,
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::UnsupportedSymbol { .. } | EvalError::OutsideSubshift { .. } => {
                CliError::Config(e.to_string())
            }
            EvalError::PrecisionUnavailable { .. } | EvalError::HeavyTail { .. } => {
                CliError::Precision(e.to_string())
            }
        }
    }
}

impl From<ChainError> for CliError {
    fn from(e: ChainError) -> Self {
        match e {
            ChainError::Eval(inner) => inner.into(),
            ChainError::BadMixture(_) | ChainError::NoEnvelope => CliError::Config(e.to_string()),
            ChainError::ImpossibleHistory
            | ChainError::EmptySupport
            | ChainError::SamplerStalled { .. } => CliError::Precision(e.to_string()),
        }
    }
}

impl From<TransferError> for CliError {
    fn from(e: TransferError) -> Self {
        match e {
            TransferError::TooLarge { .. } => CliError::TooLarge(e.to_string()),
            TransferError::BadTruncation => CliError::Config(e.to_string()),
            TransferError::Eval(inner) => inner.into(),
            TransferError::Chain(inner) => inner.into(),
            TransferError::DeadState(_) | TransferError::NoUniqueSolution { .. } => {
                CliError::Precision(e.to_string())
            }
        }
    }
}

impl From<HellingerError> for CliError {
    fn from(e: HellingerError) -> Self {
        match e {
            HellingerError::Chain(inner) => inner.into(),
            HellingerError::LengthMismatch(..) | HellingerError::InvalidDistribution(_) => {
                CliError::Precision(e.to_string())
            }
        }
    }
}

impl From<DerivationError> for CliError {
    fn from(e: DerivationError) -> Self {
        match e {
            DerivationError::Eval(inner) => inner.into(),
            DerivationError::NoLogRatioBound | DerivationError::InvalidAtBase { .. } => {
                CliError::Config(e.to_string())
            }
            DerivationError::Envelope(_) | DerivationError::UnresolvedTail { .. } => {
                CliError::Precision(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
