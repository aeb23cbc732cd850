//! Window-position enumeration and minimization for ν_D.

use std::collections::BTreeSet;

use rayon::prelude::*;

use super::{diagonal_result, embed, section_exact, LowerNormError, LowerNormEstimate, NuOptions};
use crate::band::{entry_lower_norm, BlockLayout, BandOperator, Interval, PNorm, VectorSegment, Window};
use crate::banded;
use crate::dense;

pub(crate) type Section = (i64, Vec<Interval>);

const MAX_POSITIONS: u128 = 50_000_000;

/// Representative window positions `k` (window `[k, k + D]`) and the column pieces `F ∩ [k, k + D]`.
///
/// For infinite F every other position repeats one of these by periodicity of the tails.
pub(crate) fn window_positions(a: &BandOperator, f: &Window, d: u64) -> Result<Vec<Section>, LowerNormError> {
    let w = a.band_width() as i64;
    match f.pieces() {
        Some(pieces) => {
            let hull = f.hull().expect("finite window");
            if d >= hull.diam() {
                return Ok(vec![(hull.lo, pieces)]);
            }
            let d = d as i64;
            let mut out: Vec<Section> = Vec::new();
            for k in hull.lo..=hull.hi - d {
                let clip = f.clip(Interval { lo: k, hi: k + d });
                if clip.is_empty() || out.last().is_some_and(|(_, prev)| *prev == clip) {
                    continue;
                }
                out.push((k, clip));
            }
            Ok(out)
        }
        None => {
            let ts = a.tail_structure();
            let d_i = i64::try_from(d)
                .ok()
                .filter(|&x| x < i64::MAX / 4)
                .ok_or_else(|| LowerNormError::InvalidParameter(format!("window size {d} too large")))?;
            let (klo, khi) = match ts.zone {
                None => (0, ts.joint_period() as i64 - 1),
                Some((zl, zh)) => (
                    zl - d_i - w - ts.left_period as i64,
                    zh + w + ts.right_period as i64 - 1,
                ),
            };
            let count = (khi - klo + 1) as u128;
            if count > MAX_POSITIONS {
                return Err(LowerNormError::WorkBudgetExceeded {
                    columns: count * (d as u128 + 1),
                    budget: MAX_POSITIONS,
                });
            }
            Ok((klo..=khi)
                .map(|k| (k, vec![Interval { lo: k, hi: k + d_i }]))
                .collect())
        }
    }
}

/// Minimum of σ_min over sections; ties go to the earliest section.
pub(crate) fn min_over_sections(
    a: &BandOperator,
    sections: &[Section],
    opts: &NuOptions,
) -> (f64, usize, Option<VectorSegment>) {
    let d = a.d();
    let small = sections
        .iter()
        .all(|(_, s)| dense::scalar_cols(s, d) <= opts.dense_max_cols);
    if small {
        let values: Vec<f64> = sections
            .par_iter()
            .map(|(_, s)| dense::sigma_min(a, s))
            .collect();
        let m = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let arg = values
            .iter()
            .position(|&v| v <= m * (1.0 + 1e-13) + 1e-300)
            .expect("nonempty");
        let (v, x) = dense::sigma_min_witness(a, &sections[arg].1);
        return (v, arg, Some(embed(&sections[arg].1, d, &x)));
    }
    let ts = a.tail_structure();
    let pieces: Vec<Vec<Interval>> = sections.iter().map(|(_, s)| s.clone()).collect();
    let upper = a.wiener_norm_bound().unwrap_or(f64::MAX) * (1.0 + 1e-9) + 1e-300;
    let br = banded::bisect(a, &ts, &pieces, upper, opts.abs_tol, opts.rel_tol);
    if !opts.want_witness {
        return (br.hi, br.arg, None);
    }
    let (v, x) = section_exact(a, &pieces[br.arg], opts);
    // The exact value of the arg section lies in [lo, hi]; keep the tighter of the two.
    (v.min(br.hi), br.arg, x)
}

/// ν over all of Z for a diagonal operator: one period of each tail plus the irregular zone.
pub(crate) fn diagonal_all(a: &BandOperator, p: PNorm) -> Result<LowerNormEstimate, LowerNormError> {
    let ts = a.tail_structure();
    let (lo, hi) = match ts.zone {
        None => (0, ts.joint_period() as i64 - 1),
        Some((zl, zh)) => (zl - ts.left_period as i64, zh + ts.right_period as i64 - 1),
    };
    let mut best = (f64::INFINITY, lo);
    for i in lo..=hi {
        let v = entry_lower_norm(&a.diagonal_entry(i));
        if v < best.0 {
            best = (v, i);
        }
    }
    Ok(diagonal_result(a, best.0, best.1, p))
}

/// ν_D over Z for a block-diagonal scheme operator.
///
/// A window meets each block in a contiguous run, and σ_min of a block-diagonal section is
/// the minimum over its blocks, so it suffices to slide full-length windows inside one
/// block of each type, plus one identity column outside the block range.
pub(crate) fn block_diagonal_all(
    a: &BandOperator,
    layout: &BlockLayout,
    d: u64,
    p: PNorm,
    opts: &NuOptions,
) -> Result<LowerNormEstimate, LowerNormError> {
    let (rlo, _) = layout.scheme.region();
    let first = rlo - layout.offset;
    let mut sections: Vec<Section> = vec![(
        first - 1 - d.min(i64::MAX as u64 / 4) as i64,
        vec![Interval { lo: first - 1, hi: first - 1 }],
    )];
    let mut seen = BTreeSet::new();
    for b in layout.blocks() {
        if !seen.insert(b.k) {
            continue;
        }
        let len = (d + 1).min(b.size as u64) as i64;
        for t in 0..=(b.size as i64 - len) {
            let lo = b.start + t;
            sections.push((lo, vec![Interval { lo, hi: lo + len - 1 }]));
        }
    }
    let (value, arg, witness) = min_over_sections(a, &sections, opts);
    Ok(LowerNormEstimate {
        value,
        kind: super::EstimateKind::Exact,
        witness,
        p_norm: p,
        witness_offset: Some(sections[arg].0),
        certificate: None,
    })
}
