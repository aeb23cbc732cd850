//! Lower norms `ν(A|_F) = inf ‖A χ_F x‖ / ‖x‖` and their window-restricted versions.
//!
//! At p = 2 the lower norm of a finite column section is its smallest singular value.
//! Small sections go through a dense SVD; large ones through bisection on the inertia of
//! the banded Gram matrix, with inverse iteration supplying witnesses.

mod certificate;
mod scan;

use serde::Serialize;
use thiserror::Error;

use crate::band::{entry_lower_norm, BandOperator, Interval, PNorm, VectorSegment, Window};
use crate::banded;
use crate::dense;
use crate::entry::{Entry, C64};
use crate::error::BandError;

pub use certificate::{window_size, window_size_by, CertInternals, CertMethod, CertOption, WindowCertificate};
pub(crate) use scan::window_positions;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LowerNormError {
    #[error(transparent)]
    Band(#[from] BandError),
    #[error("p = {0} is only supported for diagonal operators; use p = 2")]
    UnsupportedP(String),
    #[error("window is infinite; use certified_lower_norm")]
    InfiniteWindow,
    #[error("infinite window cannot be reduced to finitely many positions: {0}")]
    NonReducibleInfiniteWindow(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("approximation error {eps} exceeds the budget delta/3 = {}", delta / 3.0)]
    BudgetExhausted { eps: f64, delta: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("certificate constants overflow 64-bit integers")]
    CertificateOverflow,
    #[error("window scan needs {columns} column visits, above the work budget {budget}")]
    WorkBudgetExceeded { columns: u128, budget: u128 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EstimateKind {
    Exact,
    /// The true lower norm lies in `[value − δ, value]`.
    UpperWithinDelta(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerNormEstimate {
    pub value: f64,
    pub kind: EstimateKind,
    pub witness: Option<VectorSegment>,
    pub p_norm: PNorm,
    /// Left end k of the minimizing window `[k, k + D]`.
    pub witness_offset: Option<i64>,
    pub certificate: Option<WindowCertificate>,
}

/// Numerical knobs. The defaults give values exact to about 1e-10 relative.
#[derive(Clone, Debug)]
pub struct NuOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Sections with at most this many scalar columns use a dense SVD.
    pub dense_max_cols: usize,
    /// Inverse iteration is skipped when the stored factor would exceed this many entries.
    pub witness_max_entries: usize,
    /// Upper limit on the total number of section columns one scan may visit.
    pub work_budget: u128,
    /// Skip witnesses for large sections (certified runs only need the value).
    pub want_witness: bool,
}

impl Default for NuOptions {
    fn default() -> Self {
        NuOptions {
            rel_tol: 1e-10,
            abs_tol: 0.0,
            dense_max_cols: 320,
            witness_max_entries: 1 << 24,
            work_budget: 4_000_000_000,
            want_witness: true,
        }
    }
}

fn check_p(a: &BandOperator, p: PNorm) -> Result<(), LowerNormError> {
    p.validate().map_err(LowerNormError::InvalidParameter)?;
    if !p.is_two() && !a.is_diagonal() {
        return Err(LowerNormError::UnsupportedP(p.label()));
    }
    if a.is_abstract() && !a.is_diagonal() {
        return Err(BandError::AbstractEntriesNotMaterializable.into());
    }
    Ok(())
}

/// Exact lower norm of `A|_F` for finite F.
pub fn nu_exact(a: &BandOperator, f: &Window, p: PNorm) -> Result<LowerNormEstimate, LowerNormError> {
    nu_exact_with(a, f, p, &NuOptions::default())
}

pub fn nu_exact_with(
    a: &BandOperator,
    f: &Window,
    p: PNorm,
    opts: &NuOptions,
) -> Result<LowerNormEstimate, LowerNormError> {
    check_p(a, p)?;
    let pieces = f.pieces().ok_or(LowerNormError::InfiniteWindow)?;
    if a.is_diagonal() {
        return Ok(diagonal_estimate(a, &pieces, p));
    }
    let (value, witness) = section_exact(a, &pieces, opts);
    Ok(LowerNormEstimate {
        value,
        kind: EstimateKind::Exact,
        witness,
        p_norm: p,
        witness_offset: Some(pieces[0].lo),
        certificate: None,
    })
}

/// Restricted lower norm ν_D: minimum over window positions k of `ν(A|_{F ∩ [k, k+D]})`.
pub fn nu_restricted(a: &BandOperator, f: &Window, d: u64, p: PNorm) -> Result<LowerNormEstimate, LowerNormError> {
    nu_restricted_with(a, f, d, p, &NuOptions::default())
}

pub fn nu_restricted_with(
    a: &BandOperator,
    f: &Window,
    d: u64,
    p: PNorm,
    opts: &NuOptions,
) -> Result<LowerNormEstimate, LowerNormError> {
    check_p(a, p)?;
    if a.is_diagonal() {
        // Single-site vectors already realize the infimum, whatever D is.
        return match f.pieces() {
            Some(pieces) => Ok(diagonal_estimate(a, &pieces, p)),
            None => scan::diagonal_all(a, p),
        };
    }
    if !f.is_finite() {
        if let Some(layout) = a.block_layout() {
            return scan::block_diagonal_all(a, &layout, d, p, opts);
        }
    }
    let positions = window_positions(a, f, d)?;
    let total: u128 = positions.iter().map(|(_, s)| dense::scalar_cols(s, a.d()) as u128).sum();
    if total > opts.work_budget {
        return Err(LowerNormError::WorkBudgetExceeded {
            columns: total,
            budget: opts.work_budget,
        });
    }
    let (value, arg, witness) = scan::min_over_sections(a, &positions, opts);
    Ok(LowerNormEstimate {
        value,
        kind: EstimateKind::Exact,
        witness,
        p_norm: p,
        witness_offset: Some(positions[arg].0),
        certificate: None,
    })
}

/// Measured sides of the inequality `ν(A|_F) ≤ ν_D(A|_F) ≤ ν(A|_F) + δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CertificateReport {
    pub nu: f64,
    pub nu_d: f64,
    pub gap: f64,
    pub delta: f64,
    #[serde(rename = "D")]
    pub d: u64,
    pub holds: bool,
}

/// Check a certificate on a finite window by computing both sides.
pub fn verify_certificate(
    a: &BandOperator,
    f: &Window,
    cert: &WindowCertificate,
) -> Result<CertificateReport, LowerNormError> {
    if !cert.p.is_two() {
        return Err(LowerNormError::UnsupportedP(cert.p.label()));
    }
    let r = a.wiener_norm_bound()?;
    if r >= cert.r {
        return Err(LowerNormError::PreconditionViolated(format!(
            "norm bound {r} is not below certificate r = {}",
            cert.r
        )));
    }
    if a.band_width() as u64 > cert.w {
        return Err(LowerNormError::PreconditionViolated(format!(
            "band-width {} exceeds certificate w = {}",
            a.band_width(),
            cert.w
        )));
    }
    if !f.is_finite() {
        return Err(LowerNormError::InfiniteWindow);
    }
    let nu = nu_exact(a, f, PNorm::TWO)?.value;
    let nu_d = nu_restricted(a, f, cert.d, PNorm::TWO)?.value;
    let gap = nu_d - nu;
    // Both sides are exact to ~1e-10 relative; allow that much slack beyond the stated bounds.
    let slack = 1e-12 + 1e-9 * nu.max(nu_d);
    Ok(CertificateReport {
        nu,
        nu_d,
        gap,
        delta: cert.delta,
        d: cert.d,
        holds: gap >= -slack && gap <= cert.delta + slack,
    })
}

/// Norm bound used for certificates: the Wiener bound plus a relative safety margin.
pub fn certificate_r(a: &BandOperator) -> Result<f64, LowerNormError> {
    let r = a.wiener_norm_bound()?;
    Ok(r * (1.0 + 1e-12) + 1e-300)
}

/// Lower norm of a (band-dominated) target, certified within δ.
///
/// `a` is a band operator approximating the target to within `band_approx_error` in norm.
/// With ε = band_approx_error and τ the bisection tolerance, the window comes from a
/// certificate for δ − 2ε − τ and the result is `ν_D(A|_F) + ε`, so the target's lower
/// norm lies in `[value − δ, value]`.
pub fn certified_lower_norm(
    a: &BandOperator,
    f: &Window,
    delta: f64,
    band_approx_error: f64,
) -> Result<LowerNormEstimate, LowerNormError> {
    certified_lower_norm_with(a, f, delta, band_approx_error, None)
}

pub fn certified_lower_norm_with(
    a: &BandOperator,
    f: &Window,
    delta: f64,
    band_approx_error: f64,
    tolerance: Option<f64>,
) -> Result<LowerNormEstimate, LowerNormError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(LowerNormError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let eps = band_approx_error;
    if !(eps >= 0.0) {
        return Err(LowerNormError::InvalidParameter("bandApproxError must be nonnegative".into()));
    }
    if eps > delta / 3.0 {
        return Err(LowerNormError::BudgetExhausted { eps, delta });
    }
    let tau = tolerance.unwrap_or(delta / 100.0);
    if !(tau >= 0.0 && tau < delta / 3.0) {
        return Err(LowerNormError::InvalidParameter("tolerance must lie in [0, delta/3)".into()));
    }
    check_p(a, PNorm::TWO)?;
    let r = certificate_r(a)?;
    let w = (a.band_width() as u64).max(1);
    let cert = window_size(delta - 2.0 * eps - tau, r, w, PNorm::TWO, 1)?;
    let opts = NuOptions {
        rel_tol: 0.0,
        abs_tol: tau,
        want_witness: false,
        ..NuOptions::default()
    };
    let est = nu_restricted_with(a, f, cert.d, PNorm::TWO, &opts)?;
    Ok(LowerNormEstimate {
        value: est.value + eps,
        kind: EstimateKind::UpperWithinDelta(delta),
        certificate: Some(cert),
        ..est
    })
}

/// Lower norm of a diagonal operator on finite pieces: the infimum of entry lower norms.
fn diagonal_estimate(a: &BandOperator, pieces: &[Interval], p: PNorm) -> LowerNormEstimate {
    let mut best = (f64::INFINITY, pieces[0].lo);
    for piece in pieces {
        for i in piece.iter() {
            let v = entry_lower_norm(&a.diagonal_entry(i));
            if v < best.0 {
                best = (v, i);
            }
        }
    }
    diagonal_result(a, best.0, best.1, p)
}

pub(crate) fn diagonal_result(a: &BandOperator, value: f64, at: i64, p: PNorm) -> LowerNormEstimate {
    let witness = match a.diagonal_entry(at) {
        Entry::Abstract(_) => None,
        Entry::Scalar(_) => Some(VectorSegment::new(at, 1, vec![C64::new(1.0, 0.0)], p)),
        Entry::Matrix(m) => {
            let svd = m.svd(false, true);
            let (idx, _) = svd
                .singular_values
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            let vt = svd.v_t.expect("requested");
            let x = vt.row(idx).iter().map(|z| z.conj()).collect();
            Some(VectorSegment::new(at, a.d(), x, p))
        }
    };
    LowerNormEstimate {
        value,
        kind: EstimateKind::Exact,
        witness,
        p_norm: p,
        witness_offset: Some(at),
        certificate: None,
    }
}

/// Smallest singular value of one finite section, with a witness when affordable.
pub(crate) fn section_exact(
    a: &BandOperator,
    pieces: &[Interval],
    opts: &NuOptions,
) -> (f64, Option<VectorSegment>) {
    let d = a.d();
    if dense::scalar_cols(pieces, d) <= opts.dense_max_cols {
        let (s, x) = dense::sigma_min_witness(a, pieces);
        return (s, Some(embed(pieces, d, &x)));
    }
    let ts = a.tail_structure();
    let upper = a.wiener_norm_bound().unwrap_or(f64::MAX) * (1.0 + 1e-9) + 1e-300;
    let fits = |v: f64| banded::probe(a, &ts, pieces, (v * (1.0 - 1e-9)).powi(2)) == banded::Probe::Exceeds;
    if opts.want_witness {
        if let Some((v, x)) = banded::inverse_iteration(a, pieces, opts.witness_max_entries, 0.0) {
            // Confirm no smaller singular value hides elsewhere in the section.
            if fits(v) {
                return (v, Some(embed(pieces, d, &x)));
            }
        }
    }
    let sections = [pieces.to_vec()];
    let br = banded::bisect(a, &ts, &sections, upper, opts.abs_tol, opts.rel_tol);
    if opts.want_witness {
        // Clustered small singular values: shift just under the bracket and iterate again.
        for back in [1e-6, 1e-3, 1e-1] {
            let Some((v, x)) = banded::inverse_iteration(a, pieces, opts.witness_max_entries, br.hi * (1.0 - back))
            else {
                continue;
            };
            if v <= br.hi * (1.0 + 1e-8) && fits(v) {
                return (v, Some(embed(pieces, d, &x)));
            }
        }
    }
    (br.hi, None)
}

/// Place scalar-expanded column values over the hull of the pieces, zero in the gaps.
pub(crate) fn embed(pieces: &[Interval], d: usize, x: &[C64]) -> VectorSegment {
    let lo = pieces[0].lo;
    let hi = pieces[pieces.len() - 1].hi;
    let mut data = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize * d];
    let mut t = 0;
    for p in pieces {
        for i in p.iter() {
            let base = (i - lo) as usize * d;
            data[base..base + d].copy_from_slice(&x[t..t + d]);
            t += d;
        }
    }
    VectorSegment::new(lo, d, data, PNorm::TWO)
}
