//! Limit operators: enumeration of `σ_op(A)` for supported classes, numerical checks of
//! P-strong convergence, and the example operators.

mod enumerate;
mod flip;
mod gallery;
mod pconv;
mod sections;

use thiserror::Error;

use crate::error::BandError;

pub use enumerate::{
    enumerate_spectrum, enumerate_spectrum_with, OperatorSpectrumEnum, Representative, RichTag, ORBIT_RULE,
};
pub(crate) use enumerate::{tail_operator, Side};
pub use flip::FlipOperator;
pub use gallery::{gallery, GalleryOperator, GalleryParams, GALLERY_NAMES};
pub use pconv::{bn_identity, flip_sum, pconv_check, residual, PConvVerdict, PConvergenceReport, DEFAULT_TOL};
pub use sections::FiniteSections;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LimitOpError {
    #[error(transparent)]
    Band(#[from] BandError),
    #[error("no enumeration rule for this operator class: {0}")]
    UnsupportedClass(String),
    #[error("unknown gallery operator '{0}'")]
    UnknownName(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
