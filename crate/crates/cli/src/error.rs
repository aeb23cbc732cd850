use limitop::lower_norm::LowerNormError;
use limitop::limit_ops::LimitOpError;
use limitop::spec_io::SpecError;
use limitop::spectral::SpectralError;
use limitop::BandError;

/// A failed command together with the process exit status it maps to.
#[derive(Debug)]
pub enum CliError {
    /// Unreadable or malformed operator spec.
    Parse(String),
    /// Arguments or operator outside the preconditions of the requested operation.
    Precondition(String),
    /// The computation ran but did not reach a result.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Precondition(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Precondition(m) | CliError::Numeric(m) => m,
        }
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Parse(e.to_string())
    }
}

impl From<BandError> for CliError {
    fn from(e: BandError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<LowerNormError> for CliError {
    fn from(e: LowerNormError) -> Self {
        match e {
            LowerNormError::CertificateOverflow | LowerNormError::WorkBudgetExceeded { .. } => {
                CliError::Numeric(e.to_string())
            }
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<LimitOpError> for CliError {
    fn from(e: LimitOpError) -> Self {
        CliError::Precondition(e.to_string())
    }
}

impl From<SpectralError> for CliError {
    fn from(e: SpectralError) -> Self {
        match e {
            SpectralError::Band(b) => b.into(),
            SpectralError::LowerNorm(l) => l.into(),
            SpectralError::LimitOp(l) => l.into(),
            SpectralError::ScheduleTooShallow { .. }
            | SpectralError::WitnessSearchExhausted { .. }
            | SpectralError::NoStableSubsequence { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Precondition(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Precondition(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Precondition(format!("csv: {e}"))
    }
}
