//! Reference computations that do not go through the library's solvers.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use limitop::{BandOperator, CoeffSeq, Entry, EntryDim, Periodic, C64};

/// Scalar band operator given by explicit diagonal values on `[lo, hi]` and constant
/// continuations beyond, so that the oracle can read entries straight from the data.
pub struct RawBand {
    pub w: i64,
    pub lo: i64,
    pub diags: BTreeMap<i64, Vec<C64>>,
}

impl RawBand {
    /// Entries drawn uniformly from the unit disk, then scaled so that the Wiener bound
    /// `Σ_α sup_i |a_α(i)|` is at most `r_max`.
    pub fn random(rng: &mut ChaCha8Rng, w: i64, lo: i64, hi: i64, r_max: f64) -> RawBand {
        let mut disk = || loop {
            let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            if z.norm() <= 1.0 {
                break z;
            }
        };
        let mut diags: BTreeMap<i64, Vec<C64>> =
            (-w..=w).map(|alpha| (alpha, (lo..=hi).map(|_| disk()).collect())).collect();
        let wiener: f64 = diags.values().map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max)).sum();
        if wiener > r_max {
            let s = r_max / wiener;
            diags.values_mut().flat_map(|v| v.iter_mut()).for_each(|z| *z *= s);
        }
        RawBand { w, lo, diags }
    }

    /// `a_α(i)`: the stored value, clamped to the nearest end outside the stored range.
    pub fn coef(&self, alpha: i64, i: i64) -> C64 {
        match self.diags.get(&alpha) {
            None => C64::new(0.0, 0.0),
            Some(v) => v[(i - self.lo).clamp(0, v.len() as i64 - 1) as usize],
        }
    }

    pub fn wiener(&self) -> f64 {
        self.diags.values().map(|v| v.iter().map(|z| z.norm()).fold(0.0, f64::max)).sum()
    }

    pub fn operator(&self) -> BandOperator {
        let seqs = self.diags.iter().map(|(&alpha, v)| {
            let left = Periodic::constant(Entry::Scalar(v[0]));
            let right = Periodic::constant(Entry::Scalar(v[v.len() - 1]));
            let core = v[1..v.len() - 1].iter().map(|&z| Entry::Scalar(z)).collect();
            (alpha, CoeffSeq::EventuallyPeriodic { left, core_start: self.lo + 1, core, right })
        });
        BandOperator::new(EntryDim::Finite(1), seqs).expect("valid operator")
    }

    /// Columns `c0..=c1` with every row they reach.
    pub fn matrix(&self, c0: i64, c1: i64) -> DMatrix<C64> {
        let r0 = c0 - self.w;
        let rows = (c1 - c0 + 1 + 2 * self.w) as usize;
        DMatrix::from_fn(rows, (c1 - c0 + 1) as usize, |r, c| {
            let (i, j) = (r0 + r as i64, c0 + c as i64);
            if (i - j).abs() <= self.w {
                self.coef(i - j, i)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }
}

pub fn sigma_min(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().min()
}

pub fn sigma_max(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}

/// `ν(A|_[f0, f1])` from one dense SVD.
pub fn nu(a: &RawBand, f0: i64, f1: i64) -> f64 {
    sigma_min(&a.matrix(f0, f1))
}

/// `ν_D(A|_[f0, f1])`: the minimum over every window `[k, k + D]` inside F.
pub fn nu_d(a: &RawBand, f0: i64, f1: i64, d: u64) -> f64 {
    let d = d as i64;
    if f1 - f0 <= d {
        return nu(a, f0, f1);
    }
    (f0..=f1 - d).map(|k| nu(a, k, k + d)).fold(f64::INFINITY, f64::min)
}

/// `min_θ |Σ_α c_α e^{iαθ} − λ|`, sampled and then refined by golden-section search.
pub fn symbol_min(coeffs: &[(i64, C64)], lambda: C64) -> f64 {
    let g = |t: f64| {
        coeffs.iter().map(|&(alpha, c)| c * C64::from_polar(1.0, alpha as f64 * t)).sum::<C64>() - lambda
    };
    let f = |t: f64| g(t).norm();
    let n = 4096;
    let h = std::f64::consts::TAU / n as f64;
    let samples: Vec<f64> = (0..n).map(|k| f(k as f64 * h)).collect();
    let mut best = f64::INFINITY;
    for k in 0..n {
        let (prev, next) = (samples[(k + n - 1) % n], samples[(k + 1) % n]);
        if samples[k] > prev || samples[k] > next {
            continue;
        }
        let (mut a, mut b) = ((k as f64 - 1.0) * h, (k as f64 + 1.0) * h);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (c, d) = (b - phi * (b - a), a + phi * (b - a));
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.min(f(0.5 * (a + b))).min(samples[k]);
    }
    best
}

/// Distance from x to a union of real intervals.
pub fn dist_to_union(x: f64, union: &[(f64, f64)]) -> f64 {
    union.iter().map(|&(a, b)| (a - x).max(x - b).max(0.0)).fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between a finite set of complex points and a union of real intervals.
pub fn hausdorff(points: &[C64], union: &[(f64, f64)]) -> f64 {
    let to_union = points
        .iter()
        .map(|z| dist_to_union(z.re, union).hypot(z.im))
        .fold(0.0, f64::max);
    let from_union = union
        .iter()
        .flat_map(|&(a, b)| {
            let n = ((b - a) / 1e-3).ceil().max(1.0) as usize;
            (0..=n).map(move |t| a + (b - a) * t as f64 / n as f64)
        })
        .map(|x| points.iter().map(|z| (z.re - x).hypot(z.im)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    to_union.max(from_union)
}

/// Spectrum of the Laurent operator `V_1 + V_{−1} + v`: the interval `[v − 2, v + 2]`.
pub fn laplacian_band(v: f64) -> (f64, f64) {
    (v - 2.0, v + 2.0)
}

/// Union of real intervals, merged.
pub fn merge(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// `‖(V_1 + V_{−1} + v) x‖₂` for a vector given by its values on consecutive sites.
pub fn laplacian_apply_norm(v: f64, x: &[C64]) -> f64 {
    let n = x.len() as i64;
    let at = |i: i64| if (0..n).contains(&i) { x[i as usize] } else { C64::new(0.0, 0.0) };
    (-1..=n).map(|i| (at(i - 1) + at(i + 1) + at(i) * v).norm_sqr()).sum::<f64>().sqrt()
}

/// Eventually constant Schrödinger operator: off-diagonals 1, potential `left` on i < 0,
/// 1 at the origin and `right` on i > 0.
pub fn schrodinger(left: f64, right: f64) -> BandOperator {
    BandOperator::new(
        EntryDim::Finite(1),
        [
            (1, CoeffSeq::Constant(Entry::real(1.0))),
            (-1, CoeffSeq::Constant(Entry::real(1.0))),
            (
                0,
                CoeffSeq::EventuallyPeriodic {
                    left: Periodic::constant(Entry::real(left)),
                    core_start: 0,
                    core: vec![Entry::real(1.0)],
                    right: Periodic::constant(Entry::real(right)),
                },
            ),
        ],
    )
    .expect("valid operator")
}
