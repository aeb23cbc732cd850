//! Lower norms, limit operators and essential spectra of banded infinite matrices.
//!
//! Operators act on `l^p(Z, C^d)` as `A = Σ_α a_α V_α` with `(V_α x)_i = x_{i−α}`.
//! Exact lower norms are computed at p = 2 as smallest singular values of column
//! sections; windows on infinite domains are reduced to finitely many positions using
//! the periodic tail structure of the diagonals.

pub mod band;
pub mod entry;
pub mod error;
pub mod scheme;

pub use band::{BandOperator, CoeffSeq, Interval, PNorm, Periodic, TailStructure, VectorSegment, Window};
pub use entry::{AbstractEntry, Entry, EntryDim, C64};
pub use error::BandError;

mod banded;
mod dense;
pub mod limit_ops;
pub mod lower_norm;
pub mod spec_io;
pub mod spectral;

pub use lower_norm::{
    certified_lower_norm, nu_exact, nu_restricted, verify_certificate, window_size, LowerNormError,
    LowerNormEstimate, WindowCertificate,
};
