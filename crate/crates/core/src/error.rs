use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be nonnegative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("cannot parse `{0}` as a number")]
    Parse(String),

    #[error("transmittance {0} is outside [0, 1]")]
    TransmittanceRange(f64),

    #[error("beam splitter needs two distinct modes, both were {0}")]
    CoincidentModes(usize),

    #[error("mode index {index} out of range for {n_modes} modes")]
    ModeIndex { index: usize, n_modes: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("duplicate mode label `{0}`")]
    DuplicateMode(String),

    #[error("mode subset must not be empty")]
    EmptySubset,

    #[error("mode subsets overlap on `{0}`")]
    Overlap(String),

    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("covariance matrix violates the uncertainty relation (smallest symplectic eigenvalue {0})")]
    Unphysical(f64),

    #[error("symplectic spectrum does not split into pairs (gap {0:e})")]
    NumericalDegeneracy(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid split ordering: {0}")]
    InvalidOrdering(String),

    #[error("degenerate split at stage {stage}: the arm is exhausted before `{label}` is split off")]
    DegenerateSplit { stage: usize, label: String },

    #[error("{what}: receiver count {m} exceeds the limit of {max}")]
    TooManyReceivers { what: &'static str, m: usize, max: usize },

    #[error("invalid receiver subset: {0}")]
    InvalidSubset(String),

    #[error("region has an unbounded constraint (total transmittance 1)")]
    UnboundedRegion,

    #[error("bound function is not a polymatroid rank function: {0}")]
    NotPolymatroid(String),

    #[error("density matrix has eigenvalue {0:e} below the validity threshold")]
    NegativeEigenvalue(f64),

    #[error("verification inconclusive: {0}")]
    Inconclusive(String),
}

pub(crate) fn check_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Negative { name, value })
    }
}
