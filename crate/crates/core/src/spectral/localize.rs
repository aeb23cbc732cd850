use rayon::prelude::*;
use serde::Serialize;

use super::{representative_nu, SpectralError};
use crate::band::{BandOperator, Interval, PNorm, VectorSegment, Window};
use crate::limit_ops::{enumerate_spectrum, OperatorSpectrumEnum};
use crate::lower_norm::{certificate_r, nu_exact, window_size};

/// Largest window diameter tried when searching for a witness.
pub const WITNESS_CAP: u64 = 16384;
/// Largest probe window used to match final operators against representatives.
pub const PROBE_CAP: u64 = 4096;

const MATCH_TOL: f64 = 1e-9;

/// Tolerances `δ_k = 2^{−k}`, tails `r_l = Σ_{k≥l} δ_k = 2^{−l+1}` and window sizes `D_k`
/// for k = 0..=depth.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationSchedule {
    pub depth: usize,
    pub deltas: Vec<f64>,
    pub tails: Vec<f64>,
    pub window_sizes: Vec<u64>,
    pub r: f64,
    pub w: u64,
}

impl LocalizationSchedule {
    /// `D_k` is the certified window size for `δ_k/2`, rounded up to even and raised where
    /// needed so that `D_{k+1} > 2·D_k`.
    pub fn new(depth: usize, r: f64, w: u64) -> Result<LocalizationSchedule, SpectralError> {
        if depth == 0 || depth > 40 {
            return Err(SpectralError::InvalidParameter(format!("depth must lie in 1..=40, got {depth}")));
        }
        let deltas: Vec<f64> = (0..=depth).map(|k| 0.5f64.powi(k as i32)).collect();
        let tails: Vec<f64> = (0..=depth).map(|l| 2.0 * 0.5f64.powi(l as i32)).collect();
        let mut window_sizes: Vec<u64> = Vec::with_capacity(depth + 1);
        for &dk in &deltas {
            let mut d = window_size(dk / 2.0, r, w.max(1), PNorm::TWO, 1)?.d;
            d += d % 2;
            if let Some(&prev) = window_sizes.last() {
                if d <= 2 * prev {
                    d = 2 * prev + 2;
                }
            }
            window_sizes.push(d);
        }
        Ok(LocalizationSchedule {
            depth,
            deltas,
            tails,
            window_sizes,
            r,
            w: w.max(1),
        })
    }

    /// Schedule valid for A and every listed limit operator.
    pub fn for_operator(
        a: &BandOperator,
        spectrum: &OperatorSpectrumEnum,
        depth: usize,
    ) -> Result<LocalizationSchedule, SpectralError> {
        let mut r = certificate_r(a)?;
        let mut w = a.band_width();
        for rep in &spectrum.representatives {
            r = r.max(certificate_r(&rep.operator)?);
            w = w.max(rep.operator.band_width());
        }
        Self::new(depth, r, w as u64)
    }

    /// `F_s = {−s/2, …, s/2}`.
    pub fn f(s: u64) -> Interval {
        Interval::centered(s)
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationStep {
    pub k: usize,
    /// `x_n^k` with unit norm.
    #[serde(skip)]
    pub witness: VectorSegment,
    pub witness_support: Interval,
    /// `‖C_n^{k−1} x_n^k‖` (`‖B_n x_n^0‖` for k = 0).
    pub witness_value: f64,
    /// Acceptance bound `ν(B_n) + δ_{n−k}/2`.
    pub threshold: f64,
    /// `j_n^k`, so that `C_n^k = V_{j} C_n^{k−1} V_{−j}`.
    pub shift: i64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationStage {
    pub n: usize,
    pub initial_rep: usize,
    pub initial_label: String,
    pub nu_initial: f64,
    #[serde(skip)]
    pub initial: BandOperator,
    pub steps: Vec<LocalizationStep>,
    /// `C_n = V_t B_n V_{−t}` with t the sum of all step shifts.
    #[serde(skip)]
    pub final_operator: BandOperator,
    pub total_shift: i64,
    /// For l = 0..=n: `‖C_n z_l‖ − ν(B_n)` with `z_l` the shifted step-(n−l) witness,
    /// supported in `F_{3D_l}`. Bounds `ν(C_n|_{F_{3D_l}}) − ν(B_n)` from above.
    pub residuals: Vec<f64>,
    /// Representative index and shift t with `C_n = V_{−t} R V_t` on the probe window.
    pub matched: Option<(usize, i64)>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Identification {
    pub rep: usize,
    pub label: String,
    pub shift: i64,
    pub nu: f64,
    /// Stages whose final operators agree with this representative on the probe window.
    pub stages: Vec<usize>,
    /// For l = 0..=depth: the smallest `ν(B_n) + residual_l` over those stages, an upper
    /// bound for `ν(C|_{F_{3D_l}})`.
    pub closing_bounds: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LocalizationTrace {
    pub schedule: LocalizationSchedule,
    pub rep_labels: Vec<String>,
    pub rep_nus: Vec<f64>,
    pub min_rep_nu: f64,
    pub probe: Interval,
    pub stages: Vec<LocalizationStage>,
    pub identified: Option<Identification>,
}

/// Runs the construction from the minimum-attainment proof to the schedule's depth.
///
/// Stage n starts from the representative `B_n` chosen from the list ordered by
/// decreasing ν so that the last stages use the smallest value. A witness is accepted
/// once `‖C x‖ < ν(B_n) + δ/2`; since `ν_D(C|_F) ≥ ν(C) = ν(B_n)`, this implies the
/// proof's condition `‖C x‖ < ν_D(C|_F) + δ/2` without computing ν_D for the huge D.
pub fn theorem8_localize(a: &BandOperator, depth: usize) -> Result<LocalizationTrace, SpectralError> {
    let spectrum = enumerate_spectrum(a)?;
    if !spectrum.exhaustive {
        return Err(SpectralError::NotExhaustive);
    }
    let schedule = LocalizationSchedule::for_operator(a, &spectrum, depth)?;
    let reps = &spectrum.representatives;
    let rep_nus: Vec<f64> = reps
        .par_iter()
        .map(|r| representative_nu(&r.operator))
        .collect::<Result<_, _>>()?;
    let min_rep_nu = rep_nus.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut order: Vec<usize> = (0..reps.len()).collect();
    // Values equal to 1e-12 count as ties and keep enumeration order.
    order.sort_by_key(|&i| std::cmp::Reverse((rep_nus[i] * 1e12).round() as i64));
    let m = order.len();
    let pick = |n: usize| order[n.min(m).max((m + n).saturating_sub(depth)).clamp(1, m) - 1];

    let probe_len = (3 * schedule.window_sizes[1.min(depth)]).min(PROBE_CAP);
    let probe = Interval::centered(probe_len.max(6 * (schedule.w + 1)));

    let stages = (1..=depth)
        .into_par_iter()
        .map(|n| {
            let idx = pick(n);
            run_stage(n, idx, &reps[idx].label, &reps[idx].operator, rep_nus[idx], &schedule)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut trace = LocalizationTrace {
        rep_labels: reps.iter().map(|r| r.label.clone()).collect(),
        rep_nus,
        min_rep_nu,
        probe,
        schedule,
        stages,
        identified: None,
    };
    for st in &mut trace.stages {
        st.matched = match_representative(&st.final_operator, &spectrum, probe);
    }
    trace.identified = identify(&trace, &spectrum);
    match trace.identified {
        Some(_) => Ok(trace),
        None => Err(SpectralError::NoStableSubsequence { trace: Box::new(trace) }),
    }
}

fn centralizing_shift(supp: Interval) -> i64 {
    -(supp.lo + (supp.hi - supp.lo) / 2)
}

fn run_stage(
    n: usize,
    idx: usize,
    label: &str,
    b: &BandOperator,
    nu_b: f64,
    sch: &LocalizationSchedule,
) -> Result<LocalizationStage, SpectralError> {
    let d = &sch.window_sizes;
    let delta = &sch.deltas;
    let mut steps: Vec<LocalizationStep> = Vec::with_capacity(n + 1);
    let mut c = b.clone();
    // Shifted witnesses y_n^k = V_{j_n^k} x_n^k.
    let mut ys: Vec<VectorSegment> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let (region, max_diam, slack) = if k == 0 {
            (None, d[n], delta[n] / 2.0)
        } else {
            (Some(LocalizationSchedule::f(d[n - k + 1])), d[n - k], delta[n - k] / 2.0)
        };
        let threshold = nu_b + slack;
        let (x, value) = find_witness(&c, region, max_diam, threshold).map_err(|best| {
            SpectralError::WitnessSearchExhausted {
                stage: n,
                step: k,
                best,
                target: threshold,
            }
        })?;
        let supp = x.support().expect("witness is nonzero");
        assert!(supp.diam() <= max_diam, "witness diameter exceeds D");
        if let Some(f) = region {
            assert!(f.contains(supp.lo) && f.contains(supp.hi), "witness leaves its window");
        }
        let j = centralizing_shift(supp);
        if let Some(f) = region {
            assert!(f.contains(j), "shift outside F_D");
        }
        let y = x.shifted(j);
        let ys_supp = y.support().expect("nonzero");
        let fk = LocalizationSchedule::f(max_diam);
        assert!(fk.contains(ys_supp.lo) && fk.contains(ys_supp.hi), "centralized witness not in F_D");
        c = c.shift_conjugate(-j);
        steps.push(LocalizationStep {
            k,
            witness: x,
            witness_support: supp,
            witness_value: value,
            threshold,
            shift: j,
        });
        ys.push(y);
    }

    // Inequality (4) via (5) and (6): z_l = V_J y_n^{n−l} with J = j_n^n + … + j_n^{n−l+1}.
    let mut residuals = Vec::with_capacity(n + 1);
    for l in 0..=n {
        let jsum: i64 = steps[n - l + 1..].iter().map(|s| s.shift).sum();
        assert!(LocalizationSchedule::f(d[l]).contains(jsum), "shift budget exceeded");
        let z = ys[n - l].shifted(jsum);
        let zs = z.support().expect("nonzero");
        let f3 = LocalizationSchedule::f(3 * d[l]);
        assert!(f3.contains(zs.lo) && f3.contains(zs.hi), "witness outside F_3D");
        let res = c.apply_norm(&z) / z.norm() - nu_b;
        if res >= sch.tails[l] {
            return Err(SpectralError::ScheduleTooShallow {
                stage: n,
                l,
                residual: res,
                r_l: sch.tails[l],
            });
        }
        residuals.push(res);
    }
    Ok(LocalizationStage {
        n,
        initial_rep: idx,
        initial_label: label.to_string(),
        nu_initial: nu_b,
        initial: b.clone(),
        total_shift: steps.iter().map(|s| s.shift).sum(),
        steps,
        final_operator: c,
        residuals,
        matched: None,
    })
}

/// Left ends of candidate windows `[k, k + s]`: around the centre of the region, beside
/// both tails and across the irregular zone.
fn candidate_positions(c: &BandOperator, region: Option<Interval>, s: u64) -> Vec<i64> {
    let ts = c.tail_structure();
    let w = c.band_width() as i64;
    let s = s as i64;
    let (ql, qr) = (ts.left_period as i64, ts.right_period as i64);
    let mut v: Vec<i64> = (0..ql.max(qr)).map(|t| -s / 2 + t).collect();
    if let Some((zl, zh)) = ts.zone {
        v.extend((0..ql).map(|t| zl - s - w - 1 - t));
        v.extend((0..qr).map(|t| zh + w + t));
        let step = (s / 8).max(1);
        v.extend((-4..=4).map(|t| (zl + zh) / 2 - s / 2 + t * step));
        v.extend((0..ql.max(qr)).map(|t| zl - s / 2 + t));
    }
    v.sort_unstable();
    v.dedup();
    if let Some(f) = region {
        v.retain(|&k| f.contains(k) && f.contains(k + s));
    }
    v
}

/// Unit vector x on a window of diameter ≤ `max_diam` (inside `region`) with
/// `‖C x‖ < target`. On failure returns the best value found.
fn find_witness(
    c: &BandOperator,
    region: Option<Interval>,
    max_diam: u64,
    target: f64,
) -> Result<(VectorSegment, f64), f64> {
    let cap = max_diam.min(WITNESS_CAP);
    let ts = c.tail_structure();
    let q = ts.left_period.max(ts.right_period);
    let mut s = (2 * (q + c.band_width() as u64)).max(8).min(cap);
    let mut best = f64::INFINITY;
    loop {
        let found = candidate_positions(c, region, s)
            .par_iter()
            .filter_map(|&k| {
                let win = Window::Interval(Interval { lo: k, hi: k + s as i64 });
                let est = nu_exact(c, &win, PNorm::TWO).ok()?;
                let x = est.witness?;
                let nx = x.norm();
                let x = VectorSegment::new(x.offset, x.dim, x.data.iter().map(|z| z / nx).collect(), x.p_norm);
                let x = x.trimmed();
                // Recompute rather than trust the solver's value.
                let v = c.apply_norm(&x);
                Some((v, k, x))
            })
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if let Some((v, _, x)) = found {
            best = best.min(v);
            if v < target - 1e-12 {
                return Ok((x, v));
            }
        }
        if s >= cap {
            return Err(best);
        }
        s = (2 * s).min(cap);
    }
}

fn match_representative(c: &BandOperator, spectrum: &OperatorSpectrumEnum, probe: Interval) -> Option<(usize, i64)> {
    let cz = c.tail_structure().zone;
    for (i, rep) in spectrum.representatives.iter().enumerate() {
        let r = &rep.operator;
        if r.entry_dim() != c.entry_dim() {
            continue;
        }
        let ts = r.tail_structure();
        let shifts: Vec<i64> = match (ts.zone, cz) {
            (None, _) => (0..ts.joint_period() as i64).collect(),
            (Some((zl, _)), Some((cl, _))) => vec![zl - cl],
            (Some(_), None) => vec![],
        };
        for t in shifts {
            if c.approx_eq_on(&r.shift_conjugate(t), probe, MATCH_TOL) {
                return Some((i, t));
            }
        }
    }
    None
}

/// The class of matches shared by the most stages (ties to the class reached latest);
/// needs at least two stages and must include the deepest one.
fn identify(trace: &LocalizationTrace, spectrum: &OperatorSpectrumEnum) -> Option<Identification> {
    let depth = trace.stages.len();
    let last = trace.stages.last()?.matched?;
    let members: Vec<usize> = trace
        .stages
        .iter()
        .filter(|s| s.matched == Some(last))
        .map(|s| s.n)
        .collect();
    if members.len() < 2 {
        return None;
    }
    let closing_bounds = (0..=depth)
        .map(|l| {
            trace
                .stages
                .iter()
                .filter(|s| members.contains(&s.n) && l < s.residuals.len())
                .map(|s| s.nu_initial + s.residuals[l])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Some(Identification {
        rep: last.0,
        label: spectrum.representatives[last.0].label.clone(),
        shift: last.1,
        nu: trace.rep_nus[last.0],
        stages: members,
        closing_bounds,
    })
}
