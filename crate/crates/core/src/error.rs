use thiserror::Error;

/// Error taxonomy shared by every evidence computation.
///
/// Each variant maps to a distinct process exit code so shell callers can
/// distinguish a nonexistent bound from bad input without parsing messages.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum EvidenceError {
    /// No proper training sample exists (or the one supplied is improper).
    #[error("improper training sample: {0}")]
    ImproperTrainingSample(String),
    /// The requested bound does not exist for this model/prior combination.
    #[error("bound does not exist: {0}")]
    NonExistentBound(String),
    /// A design matrix is rank deficient.
    #[error("rank-deficient design: {0}")]
    RankDeficientDesign(String),
    /// An argument or intermediate value left its mathematical domain.
    #[error("domain violation: {0}")]
    DomainViolation(String),
    /// Fewer observations than the operation requires.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl EvidenceError {
    /// Process exit code for this error kind (0 is success, 1 is reserved
    /// for panics/unexpected failures, 2 covers all other input errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            EvidenceError::DomainViolation(_) => 2,
            EvidenceError::NonExistentBound(_) => 3,
            EvidenceError::ImproperTrainingSample(_) => 4,
            EvidenceError::RankDeficientDesign(_) => 5,
            EvidenceError::InsufficientData(_) => 6,
        }
    }
}

pub type Result<T> = std::result::Result<T, EvidenceError>;
