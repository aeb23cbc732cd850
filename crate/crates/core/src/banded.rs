//! Streaming LDLᴴ factorization of banded Gram matrices `H = (A χ_S)ᴴ (A χ_S)`.
//!
//! Rows of H are generated on the fly from the operator, so windows with millions of
//! columns need only O(bandwidth²) memory. The inertia of `H − μI` answers
//! "is σ_min(A χ_S) > √μ?": a non-positive pivot in a leading block means some leading
//! section, and hence the whole section, has an eigenvalue ≤ μ. Once the remaining
//! columns are periodic and the factorization state repeats over one period, all later
//! pivots repeat too and the scan stops early.

use crate::band::{BandOperator, Interval, TailStructure};
use crate::entry::{C64, ZERO};

/// Outcome of an inertia probe at threshold μ.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Probe {
    /// λ_min(H) > μ.
    Exceeds,
    /// λ_min(H) ≤ μ; the first non-positive pivot appeared at this block column.
    Below { block: i64 },
}

const STATE_RTOL: f64 = 1e-13;

struct GramLdl<'a> {
    op: &'a BandOperator,
    d: usize,
    w: usize,
    bw: usize,
    len: usize,
    cap: usize,
    mu: f64,
    t: usize,
    cols: Vec<C64>,
    blk: Vec<i64>,
    lrow: Vec<C64>,
    piv: Vec<f64>,
    lt: Vec<C64>,
    pdl: Vec<C64>,
    scale: f64,
    full: Option<(Vec<C64>, Vec<f64>)>,
}

impl<'a> GramLdl<'a> {
    fn new(op: &'a BandOperator, mu: f64, keep_full: bool) -> Self {
        let d = op.d();
        let w = op.band_width();
        let bw = (2 * w + 1) * d - 1;
        let len = (2 * w + 1) * d;
        let cap = bw + 1;
        GramLdl {
            op,
            d,
            w,
            bw,
            len,
            cap,
            mu,
            t: 0,
            cols: vec![ZERO; cap * len],
            blk: vec![0; cap],
            lrow: vec![ZERO; cap * bw.max(1)],
            piv: vec![0.0; cap],
            lt: vec![ZERO; bw.max(1)],
            pdl: vec![ZERO; bw.max(1)],
            scale: 0.0,
            full: keep_full.then(|| (Vec::new(), Vec::new())),
        }
    }

    /// Append scalar column (c, b) of `A χ_S`; returns the new pivot.
    fn push(&mut self, c: i64, b: usize) -> f64 {
        let (d, w, bw, len, cap) = (self.d, self.w as i64, self.bw, self.len, self.cap);
        let slot = self.t % cap;
        {
            let col = &mut self.cols[slot * len..(slot + 1) * len];
            for r in 0..(2 * w + 1) {
                let i = c - w + r;
                for a in 0..d {
                    col[r as usize * d + a] = self.op.elem(i, a, c, b);
                }
            }
        }
        self.blk[slot] = c;
        let nb = bw.min(self.t);
        for m in (0..nb).rev() {
            let s = self.t - 1 - m;
            let ss = s % cap;
            let delta = (c - self.blk[ss]) as usize;
            let mut h = ZERO;
            if delta <= 2 * self.w {
                let off = delta * d;
                let cs = &self.cols[ss * len..(ss + 1) * len];
                let ct = &self.cols[slot * len..(slot + 1) * len];
                for k in 0..len - off {
                    h += cs[k + off] * ct[k].conj();
                }
            }
            let ls = &self.lrow[ss * bw..(ss + 1) * bw];
            let mut sum = ZERO;
            for mp in (m + 1)..nb {
                sum += self.pdl[mp] * ls[mp - m - 1].conj();
            }
            let l = (h - sum) / self.piv[ss];
            self.lt[m] = l;
            self.pdl[m] = l * self.piv[(self.t - 1 - m) % cap];
        }
        let ct = &self.cols[slot * len..(slot + 1) * len];
        let hdiag: f64 = ct.iter().map(|z| z.norm_sqr()).sum();
        self.scale = self.scale.max(hdiag);
        let mut dt = hdiag - self.mu;
        for m in 0..nb {
            dt -= (self.lt[m] * self.pdl[m].conj()).re;
        }
        for m in nb..bw {
            self.lt[m] = ZERO;
        }
        if bw > 0 {
            self.lrow[slot * bw..(slot + 1) * bw].copy_from_slice(&self.lt[..bw]);
        }
        self.piv[slot] = dt;
        if let Some((lf, df)) = &mut self.full {
            lf.extend_from_slice(&self.lt[..bw]);
            df.push(dt);
        }
        self.t += 1;
        dt
    }

    /// Pivots and multipliers of the last `bw` rows, oldest first.
    fn snapshot(&self) -> (Vec<f64>, Vec<C64>) {
        let n = self.bw.min(self.t);
        let mut p = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(n * self.bw);
        for m in (0..n).rev() {
            let s = (self.t - 1 - m) % self.cap;
            p.push(self.piv[s]);
            l.extend_from_slice(&self.lrow[s * self.bw..(s + 1) * self.bw]);
        }
        (p, l)
    }

    fn same_state(&self, old: &(Vec<f64>, Vec<C64>), new: &(Vec<f64>, Vec<C64>)) -> bool {
        if old.0.len() != new.0.len() {
            return false;
        }
        let ptol = STATE_RTOL * self.scale.max(f64::MIN_POSITIVE);
        old.0.iter().zip(&new.0).all(|(a, b)| (a - b).abs() <= ptol)
            && old
                .1
                .iter()
                .zip(&new.1)
                .all(|(a, b)| (a - b).norm() <= STATE_RTOL * (1.0 + a.norm()))
    }
}

/// First block column from which the remaining columns of `piece` form one periodic
/// stream, with the period in blocks.
fn regime(tails: &TailStructure, w: usize, piece: &Interval, is_last: bool) -> Option<(i64, u64)> {
    if !is_last {
        return None;
    }
    let margin = 6 * w as i64 + 2;
    let start = piece.lo + 2 * w as i64 + 1;
    match tails.zone {
        None => Some((start, tails.joint_period())),
        Some((zl, zh)) => {
            if piece.hi < zl - margin {
                Some((start, tails.left_period))
            } else {
                let s = start.max(zh + margin);
                (s <= piece.hi).then_some((s, tails.right_period))
            }
        }
    }
}

/// Inertia probe of `H − μI` for the column section `S = ⋃ pieces`.
pub(crate) fn probe(op: &BandOperator, tails: &TailStructure, pieces: &[Interval], mu: f64) -> Probe {
    let mut f = GramLdl::new(op, mu, false);
    let d = op.d();
    let np = pieces.len();
    for (pi, piece) in pieces.iter().enumerate() {
        let reg = regime(tails, op.band_width(), piece, pi + 1 == np);
        let mut snap: Option<(i64, (Vec<f64>, Vec<C64>))> = None;
        for c in piece.iter() {
            if let Some((start, q)) = reg {
                if c >= start {
                    match &snap {
                        None => snap = Some((c, f.snapshot())),
                        Some((c0, old)) if c - c0 == q as i64 => {
                            let now = f.snapshot();
                            if f.same_state(old, &now) {
                                return Probe::Exceeds;
                            }
                            snap = Some((c, now));
                        }
                        _ => {}
                    }
                }
            }
            for b in 0..d {
                if f.push(c, b) <= 0.0 {
                    return Probe::Below { block: c };
                }
            }
        }
    }
    Probe::Exceeds
}

/// Probe several sections in order; the index of the first one whose λ_min is ≤ μ.
pub(crate) fn first_below(
    op: &BandOperator,
    tails: &TailStructure,
    sections: &[Vec<Interval>],
    order: impl Iterator<Item = usize>,
    mu: f64,
) -> Option<usize> {
    order
        .into_iter()
        .find(|&k| matches!(probe(op, tails, &sections[k], mu), Probe::Below { .. }))
}

/// Upper end `hi` of a bisection bracket for `min_k σ_min(A χ_{S_k})`, plus the smallest
/// index k with `σ_min(A χ_{S_k}) ≤ hi`.
pub(crate) struct Bracket {
    pub hi: f64,
    pub arg: usize,
}

/// Bisection on σ over the inertia probe, stopped when `hi − lo ≤ abs_tol + rel_tol·hi`.
pub(crate) fn bisect(
    op: &BandOperator,
    tails: &TailStructure,
    sections: &[Vec<Interval>],
    upper: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Bracket {
    let n = sections.len();
    let mut lo = 0.0f64;
    let mut hi = upper;
    let mut last = 0usize;
    // Pivots carry errors of order ε‖H‖, which limits how finely σ can be resolved.
    let c = 1e-15 * upper * upper;
    let floor = |lo: f64| c.sqrt().min(c / (2.0 * lo));
    while hi - lo > abs_tol + rel_tol * hi && hi - lo > floor(lo) {
        let s = 0.5 * (lo + hi);
        let order = std::iter::once(last).chain((0..n).filter(move |&k| k != last));
        match first_below(op, tails, sections, order, s * s) {
            Some(k) => {
                hi = s;
                last = k;
            }
            None => lo = s,
        }
    }
    let arg = first_below(op, tails, sections, 0..n, hi * hi).unwrap_or(last);
    Bracket { hi, arg }
}

/// Smallest singular value of `A χ_S` by inverse iteration on the banded Gram matrix,
/// shifted by `sigma_below²` (which must lie under λ_min; pass 0 without an estimate).
///
/// Returns the value `‖A x‖` and the unit vector x (scalar-expanded over the columns of S),
/// or `None` when the factorization would exceed `max_entries` stored multipliers.
pub(crate) fn inverse_iteration(
    op: &BandOperator,
    pieces: &[Interval],
    max_entries: usize,
    sigma_below: f64,
) -> Option<(f64, Vec<C64>)> {
    let d = op.d();
    let n: usize = pieces.iter().map(|p| p.len()).sum::<usize>() * d;
    let bw = (2 * op.band_width() + 1) * d - 1;
    if n.saturating_mul(bw.max(1)) > max_entries {
        return None;
    }
    let wiener = op.wiener_norm_bound().ok()?;
    let eta = 1e-14 * wiener * wiener;
    let mut f = GramLdl::new(op, sigma_below * sigma_below - eta, true);
    let mut cols = Vec::with_capacity(n);
    for piece in pieces {
        for c in piece.iter() {
            for b in 0..d {
                cols.push((c, b));
                if f.push(c, b) <= 0.0 {
                    return None;
                }
            }
        }
    }
    let (lf, df) = f.full.take().expect("full storage requested");
    let bwm = bw.max(1);
    let solve = |x: &mut [C64]| {
        for t in 0..n {
            let nb = bw.min(t);
            let mut acc = x[t];
            for m in 0..nb {
                acc -= lf[t * bwm + m] * x[t - 1 - m];
            }
            x[t] = acc;
        }
        for t in 0..n {
            x[t] /= df[t];
        }
        for t in (0..n).rev() {
            let mut acc = x[t];
            for m in 0..bw {
                let r = t + 1 + m;
                if r >= n {
                    break;
                }
                acc -= lf[r * bwm + m].conj() * x[r];
            }
            x[t] = acc;
        }
    };
    let normalize = |x: &mut [C64]| {
        let nrm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for z in x.iter_mut() {
            *z /= nrm;
        }
    };
    let mut x: Vec<C64> = (0..n)
        .map(|t| {
            let t = t as f64;
            C64::new(1.0 + 0.5 * (1.7 * t + 0.3).sin(), 0.3 * (2.3 * t).cos())
        })
        .collect();
    normalize(&mut x);
    let value = |x: &[C64]| section_apply_norm(op, pieces, x);
    let mut prev = f64::INFINITY;
    let mut cur = value(&x);
    for _ in 0..500 {
        solve(&mut x);
        normalize(&mut x);
        let v = value(&x);
        prev = prev.min(cur);
        cur = v;
        if (prev - cur).abs() <= 1e-13 * prev.max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Some((cur, x))
}

/// `‖A χ_S x‖₂` for x given over the scalar columns of S.
pub(crate) fn section_apply_norm(op: &BandOperator, pieces: &[Interval], x: &[C64]) -> f64 {
    let d = op.d();
    let w = op.band_width() as i64;
    let hull = Interval {
        lo: pieces[0].lo - w,
        hi: pieces[pieces.len() - 1].hi + w,
    };
    let mut y = vec![ZERO; hull.len() * d];
    let mut t = 0usize;
    for p in pieces {
        for c in p.iter() {
            for i in c - w..=c + w {
                let ri = (i - hull.lo) as usize * d;
                for b in 0..d {
                    let xv = x[t + b];
                    if xv == ZERO {
                        continue;
                    }
                    for a in 0..d {
                        y[ri + a] += op.elem(i, a, c, b) * xv;
                    }
                }
            }
            t += d;
        }
    }
    y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
