use serde::Serialize;

use super::LowerNormError;
use crate::band::PNorm;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CertMethod {
    Proof1,
    Proof2,
    ExtremalP,
}

/// Auditable constants behind a window size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum CertInternals {
    /// m = ⌊(2Nr/δ)^p⌋ + 1, R = 4w, D = mR.
    Proof1 { m: u64, #[serde(rename = "R")] r_len: u64 },
    /// n0 least with d_n/c_n < (δ/4r)^p; c = c_{n0}, d = d_{n0}; D = 2·n0.
    Proof2 { n0: u64, c: u128, d: u128 },
    /// k = ⌊wr/δ⌋ + 1, D = 2k.
    ExtremalP { k: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertOption {
    pub method: CertMethod,
    #[serde(rename = "D")]
    pub d: u64,
    pub internals: CertInternals,
}

/// A window size D for which `ν(A|_F) ≤ ν_D(A|_F) ≤ ν(A|_F) + δ` holds for every band
/// operator with `‖A‖ < r` and band-width at most w.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowCertificate {
    pub delta: f64,
    pub r: f64,
    pub w: u64,
    pub p: PNorm,
    pub n: u32,
    pub d: u64,
    pub method: CertMethod,
    pub internals: CertInternals,
    /// Every applicable method, including the chosen one.
    pub alternatives: Vec<CertOption>,
}

fn overflow() -> LowerNormError {
    LowerNormError::CertificateOverflow
}

fn proof1(delta: f64, r: f64, w: u64, p: f64, n: u32) -> Result<CertOption, LowerNormError> {
    let x = (2.0 * n as f64 * r / delta).powf(p);
    if !x.is_finite() || x >= 2f64.powi(62) {
        return Err(overflow());
    }
    let m = x.floor() as u64 + 1;
    let r_len = 4u64.checked_mul(w).ok_or_else(overflow)?;
    let d = m.checked_mul(r_len).ok_or_else(overflow)?;
    Ok(CertOption {
        method: CertMethod::Proof1,
        d,
        internals: CertInternals::Proof1 { m, r_len },
    })
}

/// c_n = (2n+1)^N with c_{−1} = 0.
fn c_n(n: i128, big_n: u32) -> Option<u128> {
    if n < 0 {
        return Some(0);
    }
    (2 * n as u128 + 1).checked_pow(big_n)
}

fn counts(n: u64, w: u64, big_n: u32) -> Option<(u128, u128)> {
    let c = c_n(n as i128, big_n)?;
    let hi = c_n(n as i128 + w as i128, big_n)?;
    let lo = c_n((n as i128 - w as i128).max(-1), big_n)?;
    Some((c, hi - lo))
}

fn ratio_below(n: u64, w: u64, big_n: u32, threshold: f64) -> Option<bool> {
    let (c, d) = counts(n, w, big_n)?;
    Some((d as f64) / (c as f64) < threshold)
}

fn proof2(delta: f64, r: f64, w: u64, p: f64, n: u32) -> Result<CertOption, LowerNormError> {
    let threshold = (delta / (4.0 * r)).powf(p);
    if threshold <= 0.0 || !threshold.is_finite() {
        return Err(overflow());
    }
    // d_n/c_n is non-increasing in n: bracket by doubling, then binary search.
    let mut hi = 1u64;
    while !ratio_below(hi, w, n, threshold).ok_or_else(overflow)? {
        hi = hi.checked_mul(2).filter(|&h| h < (1 << 62)).ok_or_else(overflow)?;
    }
    let mut lo = 0u64;
    if ratio_below(0, w, n, threshold).ok_or_else(overflow)? {
        hi = 0;
    }
    while lo + 1 < hi {
        let mid = lo + (hi - lo) / 2;
        if ratio_below(mid, w, n, threshold).ok_or_else(overflow)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let n0 = hi;
    let (c, d) = counts(n0, w, n).ok_or_else(overflow)?;
    Ok(CertOption {
        method: CertMethod::Proof2,
        d: n0.checked_mul(2).ok_or_else(overflow)?,
        internals: CertInternals::Proof2 { n0, c, d },
    })
}

fn extremal(delta: f64, r: f64, w: u64) -> Result<CertOption, LowerNormError> {
    let x = w as f64 * r / delta;
    if !x.is_finite() || x >= 2f64.powi(61) {
        return Err(overflow());
    }
    let k = x.floor() as u64 + 1;
    Ok(CertOption {
        method: CertMethod::ExtremalP,
        d: 2 * k,
        internals: CertInternals::ExtremalP { k },
    })
}

/// Smallest certified window size over all applicable constructions.
///
/// Ties go to the earlier method in the order Proof1, Proof2, ExtremalP.
pub fn window_size(delta: f64, r: f64, w: u64, p: PNorm, n: u32) -> Result<WindowCertificate, LowerNormError> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(LowerNormError::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(LowerNormError::InvalidParameter(format!("r must be positive, got {r}")));
    }
    if w < 1 {
        return Err(LowerNormError::InvalidParameter("w must be at least 1".into()));
    }
    if n < 1 {
        return Err(LowerNormError::InvalidParameter("N must be at least 1".into()));
    }
    let p = p.validate().map_err(LowerNormError::InvalidParameter)?;
    let alternatives = match p {
        PNorm::Finite(pf) => vec![proof1(delta, r, w, pf, n)?, proof2(delta, r, w, pf, n)?],
        PNorm::Zero | PNorm::Infinity => vec![extremal(delta, r, w)?],
    };
    let best = *alternatives
        .iter()
        .min_by_key(|o| o.d)
        .expect("at least one method applies");
    Ok(WindowCertificate {
        delta,
        r,
        w,
        p,
        n,
        d: best.d,
        method: best.method,
        internals: best.internals,
        alternatives,
    })
}

/// Certificate from one specific construction.
pub fn window_size_by(
    delta: f64,
    r: f64,
    w: u64,
    p: PNorm,
    n: u32,
    method: CertMethod,
) -> Result<WindowCertificate, LowerNormError> {
    let all = window_size(delta, r, w, p, n)?;
    let opt = *all
        .alternatives
        .iter()
        .find(|o| o.method == method)
        .ok_or_else(|| {
            LowerNormError::InvalidParameter(format!("{method:?} does not apply for p = {}", p.label()))
        })?;
    Ok(WindowCertificate {
        d: opt.d,
        method: opt.method,
        internals: opt.internals,
        ..all
    })
}
