use thiserror::Error;

/// Errors raised while building or querying band operators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("abstract entries cannot be materialized as complex matrices")]
    AbstractEntriesNotMaterializable,
    #[error("invalid entry: {0}")]
    InvalidEntry(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("block scheme `{0}` declares no norm bound")]
    UnboundedScheme(String),
    #[error("operation not supported for block-scheme diagonals: {0}")]
    SchemeNotSupported(String),
}
