//! Reproducible check suites: each runs one scenario with fixed seeds and records every
//! assertion with the measured values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use limitop::limit_ops::{enumerate_spectrum, flip_sum, gallery, pconv_check, GalleryParams, PConvVerdict, DEFAULT_TOL};
use limitop::lower_norm::{certificate_r, window_size_by, CertMethod};
use limitop::scheme::block_b;
use limitop::spectral::{floquet_union, gamma_grid, representative_nu, theorem8_localize, GridBox, GridVerdict, SpectralError};
use limitop::{
    nu_exact, verify_certificate, window_size, BandOperator, CoeffSeq, Entry, EntryDim, Interval, PNorm, Periodic,
    Window, C64,
};

use crate::error::CliError;
use crate::report::to_json;
use crate::SuiteName;

#[derive(Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: Value,
}

#[derive(Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub assertions: Vec<Assertion>,
}

struct Checks(Vec<Assertion>);

impl Checks {
    fn check(&mut self, name: impl Into<String>, passed: bool, measured: Value) {
        self.0.push(Assertion {
            name: name.into(),
            passed,
            measured,
        });
    }
}

pub fn run(name: SuiteName, seed: u64) -> Result<SuiteReport, CliError> {
    let mut c = Checks(Vec::new());
    let label = match name {
        SuiteName::Prop6 => {
            prop6(&mut c, seed)?;
            "prop6"
        }
        SuiteName::Example13 => {
            example13(&mut c)?;
            "example13"
        }
        SuiteName::Example14 => {
            example14(&mut c)?;
            "example14"
        }
        SuiteName::Example16 => {
            example16(&mut c)?;
            "example16"
        }
        SuiteName::EssspecDemo => {
            essspec_demo(&mut c)?;
            "essspec-demo"
        }
        SuiteName::LocalizeDemo => {
            localize_demo(&mut c)?;
            "localize-demo"
        }
    };
    Ok(SuiteReport {
        suite: label.into(),
        seed,
        passed: c.0.iter().all(|a| a.passed),
        assertions: c.0,
    })
}

/// Scalar band operator with random entries in the unit disk on `[lo, hi]` (constant tails),
/// scaled so that its Wiener bound stays below `r_max`.
pub fn random_band(rng: &mut ChaCha8Rng, w: i64, lo: i64, hi: i64, r_max: f64) -> BandOperator {
    let mut disk = || loop {
        let z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if z.norm() <= 1.0 {
            break z;
        }
    };
    let mut diags: Vec<(i64, Vec<C64>)> = (-w..=w)
        .map(|alpha| (alpha, (lo..=hi + 2).map(|_| disk()).collect()))
        .collect();
    let wiener: f64 = diags
        .iter()
        .map(|(_, v)| v.iter().map(|z| z.norm()).fold(0.0, f64::max))
        .sum();
    let scale = if wiener > r_max { r_max / wiener } else { 1.0 };
    for (_, v) in &mut diags {
        for z in v.iter_mut() {
            *z *= scale;
        }
    }
    let seqs = diags.into_iter().map(|(alpha, v)| {
        let left = Periodic::constant(Entry::Scalar(v[0]));
        let right = Periodic::constant(Entry::Scalar(v[v.len() - 1]));
        let core = v[1..v.len() - 1].iter().map(|&z| Entry::Scalar(z)).collect();
        (alpha, CoeffSeq::EventuallyPeriodic { left, core_start: lo, core, right })
    });
    BandOperator::new(EntryDim::Finite(1), seqs).expect("random operator is valid")
}

fn prop6(c: &mut Checks, seed: u64) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = Window::Interval(Interval { lo: 0, hi: 200 });
    let (mut ok, mut max_gap, mut max_d) = (0, 0.0f64, 0u64);
    let mut failures = Vec::new();
    for t in 0..200 {
        let w = rng.random_range(1..=3);
        let a = random_band(&mut rng, w, -w - 1, 200 + w + 1, 3.99);
        let cert = window_size(0.25, certificate_r(&a)?, w as u64, PNorm::TWO, 1)?;
        let rep = verify_certificate(&a, &f, &cert)?;
        max_gap = max_gap.max(rep.gap);
        max_d = max_d.max(cert.d);
        if rep.holds {
            ok += 1;
        } else {
            failures.push(t);
        }
    }
    c.check(
        "certificate inequality on 200 random operators",
        ok == 200,
        json!({ "passed": ok, "of": 200, "maxGap": to_json(&max_gap), "maxD": max_d, "failures": failures }),
    );
    let worked = [
        (window_size(0.5, 2.0, 1, PNorm::TWO, 1)?.d, 260),
        (window_size(0.5, 2.0, 1, PNorm::Infinity, 1)?.d, 10),
        (window_size_by(0.25, 1.0, 1, PNorm::Finite(1.0), 1, CertMethod::Proof2)?.d, 64),
    ];
    c.check(
        "worked window sizes 260, 10 and Proof2 64",
        worked.iter().all(|(d, e)| d == e),
        json!(worked.iter().map(|p| p.0).collect::<Vec<_>>()),
    );
    Ok(())
}

fn example13(c: &mut Checks) -> Result<(), CliError> {
    let k_max = 30;
    let g = gallery("example13", &GalleryParams { n_max: k_max })?;
    let exact = (1..=k_max).all(|k| match g.block(k) {
        Some(Entry::Abstract(e)) => e.lower_norm == 1.0 / k as f64 && e.norm == 2.0 + 1.0 / k as f64,
        _ => false,
    });
    c.check("lowerNorm(B_k) = 1/k and norm(B_k) = 2 + 1/k, k = 1..30", exact, json!(k_max));
    let e = enumerate_spectrum(g.as_band().expect("band"))?;
    let nus = e
        .representatives
        .iter()
        .map(|r| representative_nu(&r.operator))
        .collect::<Result<Vec<_>, _>>()?;
    let min = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    c.check("every representative has ν > 0", min > 0.0, json!({ "min": to_json(&min) }));
    let trend: Vec<f64> = (1..=k_max)
        .map(|k| {
            e.representatives
                .iter()
                .zip(&nus)
                .filter(|(r, _)| r.index.is_none_or(|i| i <= k))
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let fits = trend.iter().enumerate().all(|(i, &v)| v == 1.0 / (i + 1) as f64);
    c.check("infimum over indices ≤ K equals 1/K", fits, to_json(&trend));
    c.check("operator is flagged non-rich", !e.rich, to_json(&e.rich_tag));
    Ok(())
}

fn example14(c: &mut Checks) -> Result<(), CliError> {
    let k_max = 30;
    let g = gallery("example14", &GalleryParams { n_max: k_max })?;
    let a = g.as_band().expect("band");
    let layout = a.block_layout().expect("layout");
    let mut worst = 0.0f64;
    for k in 1..=k_max {
        let b = layout.scheme.blocks().iter().find(|b| b.k == k).expect("every k appears");
        let f = Window::Interval(Interval { lo: b.start, hi: b.end() - 1 });
        worst = worst.max((nu_exact(a, &f, PNorm::TWO)?.value - 1.0 / (k as f64 + 1.0)).abs());
    }
    c.check("ν(C_k) = 1/(k+1), k = 1..30", worst <= 1e-9, json!({ "maxError": to_json(&worst) }));
    let norm_err = (1..=k_max)
        .map(|n| (block_b(n).singular_values().max() - 1.0).abs())
        .fold(0.0, f64::max);
    c.check("‖B_n‖₂ = 1, n = 1..30", norm_err <= 1e-9, json!({ "maxError": to_json(&norm_err) }));
    let e = enumerate_spectrum(a)?;
    let nus = e
        .representatives
        .iter()
        .map(|r| representative_nu(&r.operator))
        .collect::<Result<Vec<_>, _>>()?;
    let min = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    c.check(
        "min over representatives is 1/31 > 0 (not attained at 0)",
        (min - 1.0 / 31.0).abs() <= 1e-9 && min > 0.0,
        json!({ "min": to_json(&min), "representatives": nus.len() }),
    );
    let trend: Vec<f64> = (1..=k_max)
        .map(|k| {
            e.representatives
                .iter()
                .zip(&nus)
                .filter(|(r, _)| r.index.is_none_or(|i| i <= k))
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let dev = trend
        .iter()
        .enumerate()
        .map(|(i, &v)| (v - 1.0 / (i as f64 + 2.0)).abs())
        .fold(0.0, f64::max);
    c.check("infimum over indices ≤ K equals 1/(K+1)", dev <= 1e-9, json!({ "maxDeviation": to_json(&dev) }));
    Ok(())
}

fn example16(c: &mut Checks) -> Result<(), CliError> {
    let id = BandOperator::identity(EntryDim::Finite(1));
    let ms = [1, 2, 5, 10];
    let ns: Vec<usize> = (1..=200).collect();
    let rep = pconv_check(flip_sum, &id, &ms, &ns, DEFAULT_TOL)?;
    let ones = ms.iter().zip(&rep.residuals).all(|(&m, row)| ns.iter().zip(row).filter(|(&n, _)| n > m).all(|(_, &e)| e == 1.0));
    c.check("e(n, m) = 1 exactly for n > m", ones, json!({ "ms": ms, "nMax": 200 }));
    c.check(
        "verdict FailsToConverge(1)",
        rep.verdict == PConvVerdict::FailsToConverge(1.0),
        to_json(&rep.verdict),
    );
    Ok(())
}

/// Off-diagonals 1, potential `left` far left, 1 at site 0, `right` far right.
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

/// Hausdorff distance between points of the real axis and a union of intervals.
pub fn hausdorff_to_intervals(points: &[f64], union: &[(f64, f64)]) -> f64 {
    let dist_to_union = |x: f64| union.iter().map(|&(a, b)| (a - x).max(x - b).max(0.0)).fold(f64::INFINITY, f64::min);
    let one = points.iter().map(|&x| dist_to_union(x)).fold(0.0, f64::max);
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let dist_to_points = |x: f64| {
        let i = sorted.partition_point(|&p| p < x);
        let l = if i > 0 { x - sorted[i - 1] } else { f64::INFINITY };
        let r = if i < sorted.len() { sorted[i] - x } else { f64::INFINITY };
        l.min(r)
    };
    let other = union
        .iter()
        .flat_map(|&(a, b)| {
            let n = ((b - a) / 1e-3).ceil().max(1.0) as usize;
            (0..=n).map(move |t| a + (b - a) * t as f64 / n as f64)
        })
        .map(dist_to_points)
        .fold(0.0, f64::max);
    one.max(other)
}

fn essspec_demo(c: &mut Checks) -> Result<(), CliError> {
    let a = schrodinger(2.0, 0.0);
    let u = floquet_union(&a, limitop::spectral::DEFAULT_SAMPLES)?;
    let bands = u.bands.clone().unwrap_or_default();
    let ends: Vec<f64> = bands.iter().flat_map(|&(l, h)| [l, h]).collect();
    let err = if bands.len() == 1 {
        (bands[0].0 + 2.0).abs().max((bands[0].1 - 4.0).abs())
    } else {
        f64::INFINITY
    };
    c.check("Floquet union is [-2, 2] ∪ [0, 4] to 1e-6", err <= 1e-6, to_json(&ends));
    let grid = GridBox {
        re0: -3.0,
        re1: 5.0,
        im0: -1.0,
        im1: 1.0,
        nx: 161,
        ny: 5,
    };
    let g = gamma_grid(&a, &grid, 0.02)?;
    let inside: Vec<f64> = g.points.iter().filter(|p| p.verdict == GridVerdict::In).map(|p| p.re).collect();
    let off_axis = g.points.iter().any(|p| p.verdict == GridVerdict::In && p.im != 0.0);
    let h = hausdorff_to_intervals(&inside, &[(-2.0, 4.0)]);
    c.check(
        "γ-grid 'in' region within Hausdorff 0.05 of the union",
        h <= 0.05 && !off_axis,
        json!({ "hausdorff": to_json(&h), "inPoints": inside.len(), "grid": to_json(&grid) }),
    );
    Ok(())
}

fn localize_demo(c: &mut Checks) -> Result<(), CliError> {
    for (left, right) in [(2.0, 0.0), (6.0, 3.0)] {
        let a = schrodinger(left, right);
        let t = theorem8_localize(&a, 8)?;
        let id = t.identified.as_ref().expect("identified on success");
        let tails = &t.schedule.tails;
        let residuals_ok = t
            .stages
            .iter()
            .all(|s| s.residuals.iter().enumerate().all(|(l, &r)| r < tails[l]));
        let gap = (id.nu - t.min_rep_nu).abs();
        c.check(
            format!("potential {left}/{right}: limit operator of minimal ν within 2·r_8"),
            gap <= 2.0 * tails[8] && (t.rep_nus[id.rep] - t.min_rep_nu).abs() <= 1e-12,
            json!({ "label": id.label, "nu": to_json(&id.nu), "min": to_json(&t.min_rep_nu), "gap": to_json(&gap) }),
        );
        c.check(format!("potential {left}/{right}: every residual below r_l"), residuals_ok, json!(t.stages.len()));
    }
    let g = gallery("example14", &GalleryParams::default())?;
    match theorem8_localize(g.as_band().expect("band"), 8) {
        Err(SpectralError::NoStableSubsequence { trace }) => {
            let nus: Vec<f64> = trace.stages.iter().map(|s| s.nu_initial).collect();
            let falling = nus.windows(2).all(|w| w[1] <= w[0]) && nus.last() > Some(&0.0);
            c.check(
                "example14: no stable subsequence, stage ν falls but stays positive",
                falling && trace.min_rep_nu > 0.0,
                json!({ "stageNu": to_json(&nus), "min": to_json(&trace.min_rep_nu) }),
            );
        }
        other => c.check(
            "example14: no stable subsequence, stage ν falls but stays positive",
            false,
            json!(format!("{:?}", other.map(|t| t.identified.map(|i| i.label)))),
        ),
    }
    Ok(())
}
