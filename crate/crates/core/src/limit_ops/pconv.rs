use rayon::prelude::*;
use serde::Serialize;

use super::flip::FlipOperator;
use super::sections::{merge, spectral_norm, FiniteSections};
use super::LimitOpError;
use crate::band::{BandOperator, CoeffSeq, Interval, Periodic};
use crate::entry::{Entry, EntryDim};

pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum PConvVerdict {
    ConvergesNumerically(f64),
    /// Smallest residual persisting over the last quarter of tested n, maximized over m.
    FailsToConverge(f64),
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PConvergenceReport {
    pub window_half_widths: Vec<usize>,
    pub ns: Vec<usize>,
    /// `residuals[mi][ni] = e(ns[ni], ms[mi])`.
    pub residuals: Vec<Vec<f64>>,
    /// First tested n from which every residual for this m stays below tol.
    pub thresholds: Vec<Option<usize>>,
    pub tol: f64,
    pub verdict: PConvVerdict,
}

/// `max(‖P_m (A_n − A)‖₂, ‖(A_n − A) P_m‖₂)` from the exact finite blocks.
pub fn residual(an: &dyn FiniteSections, a: &dyn FiniteSections, m: usize) -> Result<f64, LimitOpError> {
    if an.entry_dim() != a.entry_dim() {
        return Err(LimitOpError::InvalidParameter("entry dimensions differ".into()));
    }
    let pm = [Interval {
        lo: -(m as i64),
        hi: m as i64,
    }];
    let cols = merge([an.cols_touching(pm[0]), a.cols_touching(pm[0])].concat());
    let left = an.block(&pm, &cols)? - a.block(&pm, &cols)?;
    let rows = merge([an.rows_touching(pm[0]), a.rows_touching(pm[0])].concat());
    let right = an.block(&rows, &pm)? - a.block(&rows, &pm)?;
    Ok(spectral_norm(&left).max(spectral_norm(&right)))
}

/// Tabulates residuals of `seq(n)` against `candidate` and classifies the trend.
///
/// `ConvergesNumerically` needs, for every m, residuals below tol from some n on (with that
/// n in the first three quarters of the tested range) and no growth from the first half of
/// the range to the second. `FailsToConverge` needs a floor of at least 10·tol over the last
/// quarter for some m.
pub fn pconv_check<S, F>(
    seq: F,
    candidate: &dyn FiniteSections,
    ms: &[usize],
    ns: &[usize],
    tol: f64,
) -> Result<PConvergenceReport, LimitOpError>
where
    S: FiniteSections,
    F: Fn(usize) -> S + Sync,
{
    if ms.is_empty() || ns.is_empty() {
        return Err(LimitOpError::InvalidParameter("need at least one m and one n".into()));
    }
    if !(tol > 0.0) {
        return Err(LimitOpError::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    let cells: Vec<f64> = (0..ms.len() * ns.len())
        .into_par_iter()
        .map(|c| {
            let (mi, ni) = (c / ns.len(), c % ns.len());
            residual(&seq(ns[ni]), candidate, ms[mi])
        })
        .collect::<Result<_, _>>()?;
    let residuals: Vec<Vec<f64>> = cells.chunks(ns.len()).map(|r| r.to_vec()).collect();

    let thresholds: Vec<Option<usize>> = residuals
        .iter()
        .map(|row| {
            let first_bad_from_end = row.iter().rposition(|&e| e >= tol);
            match first_bad_from_end {
                None => Some(ns[0]),
                Some(i) if i + 1 < ns.len() => Some(ns[i + 1]),
                Some(_) => None,
            }
        })
        .collect();

    let last_quarter = ns.len() - (ns.len() / 4).max(1);
    let half = ns.len() / 2;
    let converges = residuals.iter().zip(&thresholds).all(|(row, th)| {
        let Some(t) = th else { return false };
        let t_idx = ns.iter().position(|n| n == t).unwrap_or(0);
        let early = row[..half.max(1)].iter().cloned().fold(0.0, f64::max);
        let late = row[half..].iter().cloned().fold(0.0, f64::max);
        (ns.len() < 4 || t_idx <= last_quarter) && late <= early + tol
    });
    let floor = residuals
        .iter()
        .map(|row| row[last_quarter..].iter().cloned().fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let verdict = if converges {
        PConvVerdict::ConvergesNumerically(tol)
    } else if floor >= 10.0 * tol {
        PConvVerdict::FailsToConverge(floor)
    } else {
        PConvVerdict::Inconclusive
    };
    Ok(PConvergenceReport {
        window_half_widths: ms.to_vec(),
        ns: ns.to_vec(),
        residuals,
        thresholds,
        tol,
        verdict,
    })
}

/// `V_{−n}(I + J)V_n` with J the flip.
pub fn flip_sum(n: usize) -> FlipOperator {
    FlipOperator {
        a: crate::entry::C64::new(1.0, 0.0),
        ..FlipOperator::flip()
    }
    .shift_conjugate(n as i64)
}

/// `B_n = P_n + (1/n)(I − P_n)`, the identity on `[−n, n]` and `1/n` outside.
pub fn bn_identity(n: usize) -> BandOperator {
    let n = n.max(1);
    let tail = Periodic::constant(Entry::real(1.0 / n as f64));
    BandOperator::diagonal(
        EntryDim::Finite(1),
        CoeffSeq::EventuallyPeriodic {
            left: tail.clone(),
            core_start: -(n as i64),
            core: vec![Entry::real(1.0); 2 * n + 1],
            right: tail,
        },
    )
    .expect("scalar diagonal is valid")
}
