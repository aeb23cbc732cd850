use rayon::prelude::*;
use serde::Serialize;

use super::floquet::{floquet_spectrum, merge_bands, FloquetSpectrum};
use super::{representative_nu, SpectralError};
use crate::band::{BandOperator, CoeffSeq, Window};
use crate::entry::C64;
use crate::limit_ops::{enumerate_spectrum, OperatorSpectrumEnum};
use crate::lower_norm::certified_lower_norm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EssMode {
    FloquetUnion,
    GammaGrid,
}

/// Rectangle `[re0, re1] × [im0, im1]` sampled on an `nx × ny` lattice, endpoints included.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridBox {
    pub re0: f64,
    pub re1: f64,
    pub im0: f64,
    pub im1: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridBox {
    fn axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
        if n == 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    }

    pub fn points(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                v.push(C64::new(
                    Self::axis(self.re0, self.re1, self.nx, i),
                    Self::axis(self.im0, self.im1, self.ny, j),
                ));
            }
        }
        v
    }

    fn validate(&self) -> Result<(), SpectralError> {
        let finite = [self.re0, self.re1, self.im0, self.im1].iter().all(|x| x.is_finite());
        if !finite || self.re0 > self.re1 || self.im0 > self.im1 || self.nx == 0 || self.ny == 0 {
            return Err(SpectralError::InvalidParameter(format!("bad grid {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridVerdict {
    In,
    Boundary,
    Out,
}

impl GridVerdict {
    pub fn label(self) -> &'static str {
        match self {
            GridVerdict::In => "in",
            GridVerdict::Boundary => "boundary",
            GridVerdict::Out => "out",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaPoint {
    pub re: f64,
    pub im: f64,
    pub gamma: f64,
    pub verdict: GridVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaGrid {
    pub grid: GridBox,
    pub delta: f64,
    /// Whether the representatives cover all of σ_op(A). If not, only the inclusion
    /// "union over the listed representatives ⊆ sp_ess" is meaningful.
    pub complete: bool,
    pub points: Vec<GammaPoint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FloquetUnion {
    pub labels: Vec<String>,
    pub spectra: Vec<FloquetSpectrum>,
    /// Union of all bands when every representative is self-adjoint.
    pub bands: Option<Vec<(f64, f64)>>,
}

#[derive(Clone, Debug, Serialize)]
pub enum EssentialSpectrum {
    FloquetUnion(FloquetUnion),
    GammaGrid(GammaGrid),
}

fn complete(e: &OperatorSpectrumEnum) -> bool {
    e.exhaustive && e.truncated_at.is_none()
}

/// `sp_ess(A)` as the union of the Floquet spectra of its limit operators.
pub fn floquet_union(a: &BandOperator, samples: usize) -> Result<FloquetUnion, SpectralError> {
    let e = enumerate_spectrum(a)?;
    if !complete(&e) {
        return Err(SpectralError::NotExhaustive);
    }
    let mut labels = Vec::new();
    let mut spectra = Vec::new();
    for r in &e.representatives {
        if r.operator.tail_structure().zone.is_some() {
            return Err(SpectralError::UnsupportedMode(format!(
                "representative '{}' is not periodic",
                r.label
            )));
        }
        labels.push(r.label.clone());
        spectra.push(floquet_spectrum(&r.operator, samples)?);
    }
    let bands = spectra
        .iter()
        .map(|s| s.bands.clone())
        .collect::<Option<Vec<_>>>()
        .map(|b| merge_bands(b.concat()));
    Ok(FloquetUnion { labels, spectra, bands })
}

fn is_scalar_laurent(b: &BandOperator) -> bool {
    b.d() == 1 && !b.is_abstract() && b.diagonals().values().all(|s| matches!(s, CoeffSeq::Constant(_)))
}

/// A representative with its adjoint, or `None` where `ν(B − λ) = ν((B − λ)^*)` anyway.
struct Pair {
    op: BandOperator,
    adj: Option<BandOperator>,
}

fn pairs(e: &OperatorSpectrumEnum) -> Result<Vec<Pair>, SpectralError> {
    e.representatives
        .iter()
        .map(|r| {
            let op = r.operator.clone();
            let adj = if is_scalar_laurent(&op) {
                None
            } else {
                Some(op.adjoint()?)
            };
            Ok(Pair { op, adj })
        })
        .collect()
}

/// `min(ν(B − λ), ν(B^* − λ̄))` for one representative, certified within δ.
fn gamma_pair(p: &Pair, lambda: C64, delta: f64) -> Result<f64, SpectralError> {
    let nu = |b: &BandOperator, z: C64| -> Result<f64, SpectralError> {
        Ok(certified_lower_norm(&b.plus_identity(-z)?, &Window::All, delta, 0.0)?.value)
    };
    let mut g = nu(&p.op, lambda)?;
    if let Some(adj) = &p.adj {
        g = g.min(nu(adj, lambda.conj())?);
    }
    Ok(g)
}

pub fn gamma_grid(a: &BandOperator, grid: &GridBox, delta: f64) -> Result<GammaGrid, SpectralError> {
    grid.validate()?;
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let e = enumerate_spectrum(a)?;
    if !e.exhaustive {
        return Err(SpectralError::NotExhaustive);
    }
    let reps = pairs(&e)?;
    let points = grid
        .points()
        .par_iter()
        .map(|&lambda| {
            let mut gamma = f64::INFINITY;
            for p in &reps {
                gamma = gamma.min(gamma_pair(p, lambda, delta)?);
            }
            let verdict = if gamma <= delta {
                GridVerdict::In
            } else if gamma > 2.0 * delta {
                GridVerdict::Out
            } else {
                GridVerdict::Boundary
            };
            Ok(GammaPoint {
                re: lambda.re,
                im: lambda.im,
                gamma,
                verdict,
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    Ok(GammaGrid {
        grid: *grid,
        delta,
        complete: complete(&e),
        points,
    })
}

pub fn essential_spectrum(
    a: &BandOperator,
    mode: EssMode,
    grid: Option<&GridBox>,
    delta: f64,
    samples: usize,
) -> Result<EssentialSpectrum, SpectralError> {
    match mode {
        EssMode::FloquetUnion => Ok(EssentialSpectrum::FloquetUnion(floquet_union(a, samples)?)),
        EssMode::GammaGrid => {
            let g = grid.ok_or_else(|| SpectralError::InvalidParameter("GammaGrid needs a grid".into()))?;
            Ok(EssentialSpectrum::GammaGrid(gamma_grid(a, g, delta)?))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FredholmVerdict {
    PFredholm,
    NotPFredholm,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RepCheck {
    pub label: String,
    /// Certified ν(B); the true value lies in `[nu − δ, nu]`.
    pub nu: f64,
    /// Certified ν(B^*); absent for scalar Laurent operators, where it equals `nu`.
    pub nu_adjoint: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FredholmReport {
    pub verdict: FredholmVerdict,
    pub delta: f64,
    /// Minimum certified lower norm over representatives and their adjoints.
    pub gamma: f64,
    pub checks: Vec<RepCheck>,
    /// Representative attaining `gamma`.
    pub attained_by: String,
    /// `1/gamma`: with `gamma > δ`, every limit operator is invertible and its inverse has
    /// norm at most `1/(gamma − δ)`; `1/gamma` is the value attained by `attained_by`
    /// up to the certificate slack.
    pub inverse_bound: Option<f64>,
    /// Lower norm of the attaining representative (and its adjoint) from its symbol or section.
    pub attained_nu: f64,
}

/// P-Fredholmness at resolution δ: every limit operator invertible (γ > δ), some limit
/// operator with certified lower norm below δ (γ < δ), or undecided.
pub fn fredholm_check(a: &BandOperator, delta: f64) -> Result<FredholmReport, SpectralError> {
    if !(delta > 0.0) {
        return Err(SpectralError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let e = enumerate_spectrum(a)?;
    if !complete(&e) {
        return Err(SpectralError::NotExhaustive);
    }
    let reps = pairs(&e)?;
    let checks = e
        .representatives
        .par_iter()
        .zip(&reps)
        .map(|(r, p)| {
            let cert = |b: &BandOperator| -> Result<f64, SpectralError> {
                Ok(certified_lower_norm(b, &Window::All, delta, 0.0)?.value)
            };
            Ok(RepCheck {
                label: r.label.clone(),
                nu: cert(&p.op)?,
                nu_adjoint: p.adj.as_ref().map(cert).transpose()?,
            })
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    let (idx, gamma) = checks
        .iter()
        .map(|c| c.nu.min(c.nu_adjoint.unwrap_or(f64::INFINITY)))
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, g)| if g < acc.1 { (i, g) } else { acc });
    let verdict = if gamma > delta {
        FredholmVerdict::PFredholm
    } else if gamma < delta {
        FredholmVerdict::NotPFredholm
    } else {
        FredholmVerdict::Inconclusive
    };
    let rep = &e.representatives[idx].operator;
    let attained_nu = representative_nu(rep)?.min(match &reps[idx].adj {
        Some(adj) => representative_nu(adj)?,
        None => f64::INFINITY,
    });
    Ok(FredholmReport {
        verdict,
        delta,
        gamma,
        checks,
        attained_by: e.representatives[idx].label.clone(),
        inverse_bound: (verdict == FredholmVerdict::PFredholm).then(|| 1.0 / gamma),
        attained_nu,
    })
}
