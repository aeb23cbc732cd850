//! Spectra of limit operators: Floquet symbols of periodic operators, essential spectra
//! as unions over the operator spectrum, P-Fredholm checks and the localization of a
//! limit operator with minimal lower norm.

mod essential;
mod floquet;
mod localize;

use thiserror::Error;

use crate::band::{entry_lower_norm, BandOperator, Interval, Window};
use crate::error::BandError;
use crate::limit_ops::{tail_operator, LimitOpError, Side};
use crate::lower_norm::{nu_exact, LowerNormError};

pub use essential::{
    essential_spectrum, floquet_union, fredholm_check, gamma_grid, EssMode, EssentialSpectrum, FloquetUnion,
    FredholmReport, FredholmVerdict, GammaGrid, GammaPoint, GridBox, GridVerdict, RepCheck,
};
pub use floquet::{floquet_nu, floquet_spectrum, period, symbol, FloquetSpectrum, DEFAULT_SAMPLES};
pub use localize::{
    theorem8_localize, Identification, LocalizationSchedule, LocalizationStage, LocalizationStep,
    LocalizationTrace, PROBE_CAP, WITNESS_CAP,
};

#[derive(Debug, Clone, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Band(#[from] BandError),
    #[error(transparent)]
    LowerNorm(#[from] LowerNormError),
    #[error(transparent)]
    LimitOp(#[from] LimitOpError),
    #[error("unsupported operator class: {0}")]
    UnsupportedClass(String),
    #[error("operator spectrum enumeration is not exhaustive")]
    NotExhaustive,
    #[error("mode not supported here: {0}")]
    UnsupportedMode(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("stage {stage}: residual {residual} at l = {l} is not below r_l = {r_l}")]
    ScheduleTooShallow { stage: usize, l: usize, residual: f64, r_l: f64 },
    #[error("stage {stage}, step {step}: no witness below {target} within the search cap (best {best})")]
    WitnessSearchExhausted { stage: usize, step: usize, best: f64, target: f64 },
    #[error("no stable subsequence among the {} stages", trace.stages.len())]
    NoStableSubsequence { trace: Box<LocalizationTrace> },
}

/// θ-samples used when a representative's lower norm comes from its symbol.
pub const NU_SAMPLES: usize = 256;

/// Lower norm of a limit operator on all of Z.
///
/// Periodic operators use `min_θ σ_min` of the symbol. Eventually periodic ones take the
/// minimum of both tails and a finite section around the irregular zone; this is exact
/// when the zone does not couple the tails (block-diagonal junctions) and an upper bound
/// otherwise. Abstract diagonal operators give the infimum of entry lower norms.
pub fn representative_nu(b: &BandOperator) -> Result<f64, SpectralError> {
    let ts = b.tail_structure();
    if b.is_abstract() {
        if !b.is_diagonal() {
            return Err(SpectralError::UnsupportedClass("non-diagonal abstract operator".into()));
        }
        let range = match ts.zone {
            None => 0..ts.joint_period() as i64,
            Some((zl, zh)) => zl - ts.left_period as i64..zh + ts.right_period as i64,
        };
        return Ok(range.map(|i| entry_lower_norm(&b.entry_at(i, i))).fold(f64::INFINITY, f64::min));
    }
    let Some((zl, zh)) = ts.zone else {
        return floquet_nu(b, NU_SAMPLES);
    };
    if b.has_scheme() {
        return Err(SpectralError::UnsupportedClass("block schemes are not limit operators here".into()));
    }
    let left = floquet_nu(&tail_operator(b, Side::Left)?, NU_SAMPLES)?;
    let right = floquet_nu(&tail_operator(b, Side::Right)?, NU_SAMPLES)?;
    let h = 4 * (ts.left_period.max(ts.right_period) as i64 + b.band_width() as i64) + 64;
    let window = Window::Interval(Interval {
        lo: zl - h,
        hi: zh - 1 + h,
    });
    let mid = nu_exact(b, &window, crate::band::PNorm::TWO)?.value;
    Ok(left.min(right).min(mid))
}
