use thiserror::Error;

/// Errors raised while building networks, states and evolutions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },

    #[error("coupling matrix is not symmetric at ({row}, {col}): {forward} != {backward}")]
    AsymmetricCoupling {
        row: usize,
        col: usize,
        forward: f64,
        backward: f64,
    },

    #[error("coupling matrix has nonzero diagonal entry {value} at site {site}")]
    NonzeroSelfCoupling { site: usize, value: f64 },

    #[error("dephasing rate at site {site} is negative ({value})")]
    NegativeDephasing { site: usize, value: f64 },

    #[error("a network needs at least 2 sites, got {0}")]
    TooFewSites(usize),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("site index {site} out of range for a {n_sites}-site network")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error("fermions cannot share site {0}")]
    SameSiteFermion(usize),

    #[error("state requires bosons; fermion statistics are excluded by Pauli exclusion")]
    FermionNotAllowed,

    #[error("invariant violated at z = {z}: {what}")]
    InvariantViolation { z: f64, what: String },

    #[error("negative joint probability {value} at ({p}, {q})")]
    NegativeProbability { p: usize, q: usize, value: f64 },

    #[error("initial amplitudes are not normalized: total weight {0}")]
    NormalizationError(f64),

    #[error("integration step too large: dz * rate = {0} exceeds 0.05")]
    StepTooLarge(f64),

    #[error("correlation matrix sums to zero")]
    ZeroMatrix,

    #[error("eigenvalue solver failed: {0}")]
    EigSolverFailure(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Variant name, for diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::AsymmetricCoupling { .. } => "AsymmetricCoupling",
            Error::NonzeroSelfCoupling { .. } => "NonzeroSelfCoupling",
            Error::NegativeDephasing { .. } => "NegativeDephasing",
            Error::TooFewSites(_) => "TooFewSites",
            Error::NonFinite(_) => "NonFinite",
            Error::InvalidParameter { .. } => "InvalidParameter",
            Error::SiteOutOfRange { .. } => "SiteOutOfRange",
            Error::SameSiteFermion(_) => "SameSiteFermion",
            Error::FermionNotAllowed => "FermionNotAllowed",
            Error::InvariantViolation { .. } => "InvariantViolation",
            Error::NegativeProbability { .. } => "NegativeProbability",
            Error::NormalizationError(_) => "NormalizationError",
            Error::StepTooLarge(_) => "StepTooLarge",
            Error::ZeroMatrix => "ZeroMatrix",
            Error::EigSolverFailure(_) => "EigSolverFailure",
            Error::BasisMismatch(_) => "BasisMismatch",
        }
    }

    /// Whether the error comes from the inputs rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::AsymmetricCoupling { .. }
                | Error::NonzeroSelfCoupling { .. }
                | Error::NegativeDephasing { .. }
                | Error::TooFewSites(_)
                | Error::NonFinite(_)
                | Error::InvalidParameter { .. }
                | Error::SiteOutOfRange { .. }
                | Error::SameSiteFermion(_)
                | Error::FermionNotAllowed
                | Error::BasisMismatch(_)
                | Error::NormalizationError(_)
        )
    }
}
