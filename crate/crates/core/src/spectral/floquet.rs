use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::SpectralError;
use crate::band::{BandOperator, CoeffSeq, Interval};
use crate::entry::{C64, ZERO};

pub const DEFAULT_SAMPLES: usize = 2048;

/// Sampled spectrum of a periodic operator.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FloquetSpectrum {
    pub q: usize,
    pub theta_samples: Vec<f64>,
    /// Eigenvalues of the symbol at every sample, concatenated.
    pub eigenvalue_cloud: Vec<C64>,
    pub self_adjoint: bool,
    /// Range of each sorted eigenvalue branch; only for self-adjoint operators.
    pub bands: Option<Vec<(f64, f64)>>,
}

impl FloquetSpectrum {
    /// Bands merged into disjoint intervals.
    pub fn band_union(&self) -> Option<Vec<(f64, f64)>> {
        self.bands.as_ref().map(|b| merge_bands(b.clone()))
    }
}

pub(crate) fn merge_bands(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
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

/// Period of an operator whose diagonals are all constant or periodic.
pub fn period(b: &BandOperator) -> Result<usize, SpectralError> {
    if b.is_abstract() {
        return Err(SpectralError::UnsupportedClass("abstract entries".into()));
    }
    for seq in b.diagonals().values() {
        if !matches!(seq, CoeffSeq::Constant(_) | CoeffSeq::Periodic(_)) {
            return Err(SpectralError::UnsupportedClass(
                "Floquet analysis needs constant or periodic diagonals".into(),
            ));
        }
    }
    Ok(b.tail_structure().joint_period() as usize)
}

/// The `qd × qd` symbol at θ, normalized so that a scalar Laurent operator gives
/// `a(θ) = Σ a_α e^{iαθ}`.
pub fn symbol(b: &BandOperator, q: usize, theta: f64) -> DMatrix<C64> {
    let d = b.d();
    let qi = q as i64;
    let mut s = DMatrix::from_element(q * d, q * d, ZERO);
    for (&alpha, seq) in b.diagonals() {
        for t in 0..qi {
            let src = t - alpha;
            let (tp, cell) = (src.rem_euclid(qi), src.div_euclid(qi));
            let phase = C64::from_polar(1.0, -theta * cell as f64);
            let e = seq.get(t);
            for a in 0..d {
                for c in 0..d {
                    s[(t as usize * d + a, tp as usize * d + c)] += e.elem(a, c) * phase;
                }
            }
        }
    }
    s
}

fn thetas(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 * PI * k as f64 / m as f64).collect()
}

pub(crate) fn is_self_adjoint(b: &BandOperator, q: usize) -> bool {
    let Ok(adj) = b.adjoint() else { return false };
    let h = (q + b.band_width()) as i64;
    adj.approx_eq_on(b, Interval { lo: -h, hi: h }, 1e-14)
}

pub fn floquet_spectrum(b: &BandOperator, m: usize) -> Result<FloquetSpectrum, SpectralError> {
    if m == 0 {
        return Err(SpectralError::InvalidParameter("need at least one theta sample".into()));
    }
    let q = period(b)?;
    let sa = is_self_adjoint(b, q);
    let theta_samples = thetas(m);
    let per_theta: Vec<Vec<C64>> = theta_samples
        .par_iter()
        .map(|&th| {
            let s = symbol(b, q, th);
            if sa {
                let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().cloned().collect();
                ev.sort_by(f64::total_cmp);
                ev.into_iter().map(|x| C64::new(x, 0.0)).collect()
            } else if s.nrows() == 1 {
                vec![s[(0, 0)]]
            } else {
                let (_, t) = s.schur().unpack();
                t.diagonal().iter().cloned().collect()
            }
        })
        .collect();
    let bands = sa.then(|| {
        let n = q * b.d();
        (0..n)
            .map(|j| {
                per_theta
                    .iter()
                    .map(|ev| ev[j].re)
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)))
            })
            .collect()
    });
    Ok(FloquetSpectrum {
        q,
        theta_samples,
        eigenvalue_cloud: per_theta.into_iter().flatten().collect(),
        self_adjoint: sa,
        bands,
    })
}

/// `min_θ σ_min(S(θ))`: m samples, then golden-section refinement around the lowest local
/// minima. The lower norm of a periodic operator on all of Z.
pub fn floquet_nu(b: &BandOperator, m: usize) -> Result<f64, SpectralError> {
    let q = period(b)?;
    let f = |th: f64| {
        let s = symbol(b, q, th);
        s.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let th = thetas(m.max(3));
    let vals: Vec<f64> = th.par_iter().map(|&t| f(t)).collect();
    let n = vals.len();
    let mut minima: Vec<usize> = (0..n)
        .filter(|&k| vals[k] <= vals[(k + n - 1) % n] && vals[k] <= vals[(k + 1) % n])
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    minima.truncate(REFINED_MINIMA);
    let h = std::f64::consts::TAU / n as f64;
    let refined = minima
        .par_iter()
        .map(|&k| golden_min(&f, th[k] - h, th[k] + h))
        .reduce(|| f64::INFINITY, f64::min);
    Ok(vals.iter().cloned().fold(refined, f64::min))
}

const REFINED_MINIMA: usize = 16;

/// Minimum of f on [a, b] by golden-section search, assuming one local minimum there.
fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - phi * (b - a), a + phi * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.min(fd);
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
        best = best.min(fc).min(fd);
    }
    best
}
