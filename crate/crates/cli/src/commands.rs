use std::path::Path;

use serde_json::{json, Value};

use limitop::limit_ops::{
    bn_identity, enumerate_spectrum_with, flip_sum, gallery, pconv_check, FiniteSections, GalleryOperator,
    GalleryParams, PConvergenceReport,
};
use limitop::lower_norm::{certificate_r, CertMethod};
use limitop::scheme::{block_b, SchemeKind};
use limitop::spec_io::{flip_spec, parse_spec, spec_json, to_spec, SpecOperator};
use limitop::spectral::{
    fredholm_check, gamma_grid, floquet_union, representative_nu, theorem8_localize, GridBox, GridVerdict,
    SpectralError,
};
use limitop::{
    certified_lower_norm, nu_exact, nu_restricted, verify_certificate, window_size, BandOperator, EntryDim,
    Interval, PNorm, Window,
};

use crate::error::CliError;
use crate::report::{self, emit, fmt12, to_json, write_file};
use crate::{Command, ModeName, OpArg, SeqName, WindowArg};

pub fn load(path: &Path) -> Result<SpecOperator, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_spec(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_band(op: &OpArg) -> Result<BandOperator, CliError> {
    match load(&op.op)? {
        SpecOperator::Band(b) => Ok(b),
        SpecOperator::Flip(_) => Err(CliError::Precondition("this command needs a band operator, not the flip".into())),
    }
}

pub fn parse_p(s: &str) -> Result<PNorm, CliError> {
    let p = match s.trim() {
        "0" => PNorm::Zero,
        "inf" | "infinity" | "∞" => PNorm::Infinity,
        t => PNorm::Finite(t.parse().map_err(|_| CliError::Precondition(format!("cannot read p = '{t}'")))?),
    };
    p.validate().map_err(CliError::Precondition)
}

/// The window given by `--window` pairs, or `None` when there are none.
fn window(arg: &WindowArg) -> Result<Option<Window>, CliError> {
    if arg.window.is_empty() {
        return Ok(None);
    }
    let parts = arg
        .window
        .chunks(2)
        .map(|c| Interval::new(c[0], c[1]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Some(Window::union(parts)?))
}

fn required_window(arg: &WindowArg) -> Result<Window, CliError> {
    window(arg)?.ok_or_else(|| CliError::Precondition("a finite --window LO HI is required".into()))
}

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Nu { op, window: w, p, witness } => {
            let a = load_band(&op)?;
            let est = nu_exact(&a, &required_window(&w)?, parse_p(&p)?)?;
            emit(&report::estimate(&est, witness));
        }
        Command::NuD { op, window: w, d, p } => {
            let a = load_band(&op)?;
            let f = window(&w)?.unwrap_or(Window::All);
            let est = nu_restricted(&a, &f, d, parse_p(&p)?)?;
            let mut v = report::estimate(&est, false);
            v["D"] = d.into();
            emit(&v);
        }
        Command::WindowSize { delta, r, w, p, n, method } => {
            let p = parse_p(&p)?;
            let cert = match method.as_deref() {
                None => window_size(delta, r, w, p, n)?,
                Some(m) => {
                    let m = match m {
                        "proof1" => CertMethod::Proof1,
                        "proof2" => CertMethod::Proof2,
                        _ => CertMethod::ExtremalP,
                    };
                    limitop::lower_norm::window_size_by(delta, r, w, p, n, m)?
                }
            };
            emit(&report::certificate(&cert));
        }
        Command::VerifyCert { op, window: w, delta, r, w: bw } => {
            let a = load_band(&op)?;
            let r = match r {
                Some(r) => r,
                None => certificate_r(&a)? * (1.0 + 1e-9),
            };
            let bw = bw.unwrap_or(a.band_width() as u64).max(1);
            let cert = window_size(delta, r, bw, PNorm::TWO, 1)?;
            let rep = verify_certificate(&a, &required_window(&w)?, &cert)?;
            let mut v = to_json(&rep);
            v["certificate"] = report::certificate(&cert);
            emit(&v);
            if !rep.holds {
                return Err(CliError::Numeric(format!("certificate inequality fails: gap {}", rep.gap)));
            }
        }
        Command::CertifiedNu { op, window: w, delta, eps } => {
            let a = load_band(&op)?;
            let f = window(&w)?.unwrap_or(Window::All);
            emit(&report::estimate(&certified_lower_norm(&a, &f, delta, eps)?, false));
        }
        Command::SigmaOp { op, max_reps, nu } => sigma_op(&load_band(&op)?, max_reps, nu)?,
        Command::Pconv {
            seq,
            op,
            candidate,
            m,
            n_max,
            tol,
        } => pconv(seq, op.as_deref(), candidate.as_deref(), &m, n_max, tol)?,
        Command::Essspec {
            op,
            mode,
            grid_box,
            nx,
            ny,
            delta,
            samples,
            out,
        } => {
            let a = load_band(&op)?;
            match mode {
                ModeName::Floquet => essspec_floquet(&a, samples, out.as_deref())?,
                ModeName::Gamma => {
                    let b = grid_box.ok_or_else(|| CliError::Precondition("gamma mode needs --box".into()))?;
                    let grid = GridBox {
                        re0: b[0],
                        re1: b[1],
                        im0: b[2],
                        im1: b[3],
                        nx,
                        ny,
                    };
                    essspec_gamma(&a, &grid, delta, out.as_deref())?;
                }
            }
        }
        Command::Fredholm { op, delta } => emit(&to_json(&fredholm_check(&load_band(&op)?, delta)?)),
        Command::Localize { op, depth, out } => localize(&load_band(&op)?, depth, out.as_deref())?,
        Command::Example13 { k_max } => example13(k_max)?,
        Command::Example14 { k_max, p } => example14(k_max, parse_p(&p)?)?,
        Command::Example16 { m, n_max } => {
            let id = BandOperator::identity(EntryDim::Finite(1));
            let rep = pconv_check(flip_sum, &id, &m, &ns(n_max)?, limitop::limit_ops::DEFAULT_TOL)?;
            let ones = rep.window_half_widths.iter().zip(&rep.residuals).all(|(&m, row)| {
                rep.ns.iter().zip(row).filter(|(&n, _)| n > m).all(|(_, &e)| e == 1.0)
            });
            let mut v = pconv_json("flip-sum", &rep);
            v["allResidualsOneBeyondM"] = ones.into();
            emit(&v);
        }
        Command::Suite { name, seed, out } => {
            let rep = crate::suites::run(name, seed)?;
            let v = to_json(&rep);
            emit(&v);
            if let Some(path) = out {
                write_file(&path, &report::render(&v))?;
            }
            if let Some(bad) = rep.assertions.iter().find(|a| !a.passed) {
                return Err(CliError::Numeric(format!("suite assertion failed: {}", bad.name)));
            }
        }
        Command::Gallery { name, n_max, dump } => {
            let g = gallery(&name, &GalleryParams { n_max })?;
            if dump {
                let spec = match &g {
                    GalleryOperator::Band(b) => to_spec(b),
                    GalleryOperator::Flip(f) => flip_spec(f),
                };
                report::emit_text(&(spec_json(&spec) + "\n"));
            } else {
                emit(&gallery_summary(&name, &g)?);
            }
        }
    }
    Ok(())
}

fn ns(n_max: usize) -> Result<Vec<usize>, CliError> {
    if n_max == 0 {
        return Err(CliError::Precondition("--n-max must be positive".into()));
    }
    Ok((1..=n_max).collect())
}

fn gallery_summary(name: &str, g: &GalleryOperator) -> Result<Value, CliError> {
    Ok(match g {
        GalleryOperator::Band(b) => json!({
            "name": name,
            "entryDim": match b.entry_dim() { EntryDim::Finite(d) => Value::from(d), EntryDim::Abstract => "abstract".into() },
            "bandWidth": b.band_width(),
            "wienerBound": to_json(&b.wiener_norm_bound()?),
            "blocks": b.block_layout().map(|l| l.scheme.blocks().len()),
        }),
        GalleryOperator::Flip(f) => json!({ "name": name, "bandOperator": false, "a": [f.a.re, f.a.im], "b": [f.b.re, f.b.im], "j": f.j }),
    })
}

fn sigma_op(a: &BandOperator, max_reps: Option<usize>, with_nu: bool) -> Result<(), CliError> {
    if max_reps == Some(0) {
        return Err(CliError::Precondition("--max-reps must be positive".into()));
    }
    let e = enumerate_spectrum_with(a, max_reps)?;
    let total = e.representatives.len();
    let shown = &e.representatives[..max_reps.map_or(total, |k| k.min(total))];
    let reps = shown
        .iter()
        .map(|r| {
            let nu = if with_nu {
                to_json(&representative_nu(&r.operator)?)
            } else {
                Value::Null
            };
            Ok(json!({ "label": r.label, "index": r.index, "bandWidth": r.operator.band_width(), "nu": nu }))
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    emit(&json!({
        "orbitRule": e.orbit_rule,
        "rich": e.rich,
        "richTag": to_json(&e.rich_tag),
        "exhaustive": e.exhaustive,
        "truncatedAt": e.truncated_at,
        "listed": reps.len(),
        "representatives": reps,
    }));
    Ok(())
}

fn pconv_json(seq: &str, rep: &PConvergenceReport) -> Value {
    let mut v = to_json(rep);
    v["sequence"] = seq.into();
    v
}

fn candidate_or(path: Option<&Path>, default: BandOperator) -> Result<Box<dyn FiniteSections>, CliError> {
    Ok(match path {
        None => Box::new(default),
        Some(p) => match load(p)? {
            SpecOperator::Band(b) => Box::new(b),
            SpecOperator::Flip(f) => Box::new(f),
        },
    })
}

fn pconv(
    seq: SeqName,
    op: Option<&Path>,
    candidate: Option<&Path>,
    ms: &[usize],
    n_max: usize,
    tol: f64,
) -> Result<(), CliError> {
    let ns = ns(n_max)?;
    let id = || BandOperator::identity(EntryDim::Finite(1));
    let operand = || -> Result<BandOperator, CliError> {
        let p = op.ok_or_else(|| CliError::Precondition("this sequence needs --op".into()))?;
        load_band(&OpArg { op: p.to_path_buf() })
    };
    let (name, rep) = match seq {
        SeqName::FlipSum => {
            let c = candidate_or(candidate, id())?;
            ("flip-sum", pconv_check(flip_sum, c.as_ref(), ms, &ns, tol)?)
        }
        SeqName::BnIdentity => {
            let c = candidate_or(candidate, id())?;
            ("bn-identity", pconv_check(bn_identity, c.as_ref(), ms, &ns, tol)?)
        }
        SeqName::Constant => {
            let a = operand()?;
            let c = candidate_or(candidate, a.clone())?;
            ("constant", pconv_check(|_| a.clone(), c.as_ref(), ms, &ns, tol)?)
        }
        SeqName::Shifted => {
            let a = operand()?;
            let q = a.tail_structure().joint_period() as i64;
            let c = candidate_or(candidate, a.clone())?;
            ("shifted", pconv_check(|n| a.shift_conjugate(n as i64 * q), c.as_ref(), ms, &ns, tol)?)
        }
    };
    emit(&pconv_json(name, &rep));
    Ok(())
}

fn essspec_floquet(a: &BandOperator, samples: usize, out: Option<&Path>) -> Result<(), CliError> {
    let u = floquet_union(a, samples)?;
    let spectra: Vec<Value> = u
        .labels
        .iter()
        .zip(&u.spectra)
        .map(|(l, s)| json!({ "label": l, "q": s.q, "selfAdjoint": s.self_adjoint, "bands": to_json(&s.band_union()) }))
        .collect();
    emit(&json!({ "mode": "floquet", "samples": samples, "bands": to_json(&u.bands), "representatives": spectra }));
    if let Some(path) = out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["label", "re", "im"])?;
        for (l, s) in u.labels.iter().zip(&u.spectra) {
            for z in &s.eigenvalue_cloud {
                w.write_record([l.as_str(), &fmt12(z.re), &fmt12(z.im)])?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn essspec_gamma(a: &BandOperator, grid: &GridBox, delta: f64, out: Option<&Path>) -> Result<(), CliError> {
    let g = gamma_grid(a, grid, delta)?;
    let count = |v: GridVerdict| g.points.iter().filter(|p| p.verdict == v).count();
    emit(&json!({
        "mode": "gamma",
        "grid": to_json(&g.grid),
        "delta": to_json(&g.delta),
        "complete": g.complete,
        "in": count(GridVerdict::In),
        "boundary": count(GridVerdict::Boundary),
        "out": count(GridVerdict::Out),
    }));
    if let Some(path) = out {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["re", "im", "gamma", "verdict"])?;
        for p in &g.points {
            w.write_record([fmt12(p.re), fmt12(p.im), fmt12(p.gamma), p.verdict.label().to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn localize(a: &BandOperator, depth: usize, out: Option<&Path>) -> Result<(), CliError> {
    let (trace, err) = match theorem8_localize(a, depth) {
        Ok(t) => (t, None),
        Err(SpectralError::NoStableSubsequence { trace }) => {
            let msg = format!("no stable subsequence among the {} stages", trace.stages.len());
            (*trace, Some(CliError::Numeric(msg)))
        }
        Err(e) => return Err(e.into()),
    };
    let v = to_json(&trace);
    if let Some(path) = out {
        write_file(path, &report::render(&v))?;
    }
    let below = trace
        .stages
        .iter()
        .all(|s| s.residuals.iter().enumerate().all(|(l, &r)| r < trace.schedule.tails[l]));
    let stage_nus: Vec<f64> = trace.stages.iter().map(|s| s.nu_initial).collect();
    emit(&json!({
        "depth": depth,
        "windowSizes": trace.schedule.window_sizes,
        "minRepresentativeNu": to_json(&trace.min_rep_nu),
        "stageNu": to_json(&stage_nus),
        "residualsBelowTails": below,
        "identified": trace.identified.as_ref().map(|id| json!({
            "label": id.label,
            "nu": to_json(&id.nu),
            "shift": id.shift,
            "stages": id.stages,
            "gapToMinimum": to_json(&(id.nu - trace.min_rep_nu).abs()),
            "closingBounds": to_json(&id.closing_bounds),
        })),
    }));
    err.map_or(Ok(()), Err)
}

fn example13(k_max: usize) -> Result<(), CliError> {
    let g = gallery("example13", &GalleryParams { n_max: k_max })?;
    let rows: Vec<Value> = (1..=k_max)
        .map(|k| match g.block(k) {
            Some(limitop::Entry::Abstract(e)) => json!({ "k": k, "label": e.label, "lowerNorm": to_json(&e.lower_norm), "norm": to_json(&e.norm) }),
            _ => Value::Null,
        })
        .collect();
    let a = g.as_band().expect("example13 is a band operator");
    let e = enumerate_spectrum_with(a, Some(k_max))?;
    let reps = e
        .representatives
        .iter()
        .map(|r| Ok(json!({ "label": r.label, "index": r.index, "nu": to_json(&representative_nu(&r.operator)?) })))
        .collect::<Result<Vec<_>, SpectralError>>()?;
    emit(&json!({ "blocks": rows, "rich": e.rich, "richTag": to_json(&e.rich_tag), "representatives": reps }));
    Ok(())
}

fn example14(k_max: usize, p: PNorm) -> Result<(), CliError> {
    if !p.is_two() {
        return Err(CliError::Precondition(format!(
            "lower norms of the non-diagonal blocks are computed for p = 2 only, got p = {}",
            p.label()
        )));
    }
    let g = gallery("example14", &GalleryParams { n_max: k_max })?;
    let a = g.as_band().expect("example14 is a band operator");
    let layout = a.block_layout().expect("scheme layout");
    debug_assert_eq!(layout.scheme.kind(), SchemeKind::Example14);
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let b = layout.scheme.blocks().iter().find(|b| b.k == k).expect("every k appears");
        let f = Window::Interval(Interval { lo: b.start, hi: b.end() - 1 });
        let nu = nu_exact(a, &f, p)?.value;
        let b_norm = block_b(k).singular_values().max();
        rows.push(json!({ "k": k, "nuC": to_json(&nu), "expected": to_json(&(1.0 / (k as f64 + 1.0))), "normB": to_json(&b_norm) }));
    }
    let e = enumerate_spectrum_with(a, Some(k_max))?;
    let nus = e
        .representatives
        .iter()
        .map(|r| representative_nu(&r.operator))
        .collect::<Result<Vec<_>, _>>()?;
    let min = nus.iter().cloned().fold(f64::INFINITY, f64::min);
    emit(&json!({
        "p": p.label(),
        "blocks": rows,
        "representatives": e.representatives.len(),
        "minNu": to_json(&min),
        "minAttainedAtZero": min <= 0.0,
        "representativeNu": e.representatives.iter().zip(&nus).map(|(r, v)| json!({ "label": r.label, "nu": to_json(v) })).collect::<Vec<_>>(),
    }));
    Ok(())
}
