use serde::Serialize;

use super::LimitOpError;
use crate::band::{BandOperator, CoeffSeq, Interval, Periodic};
use crate::entry::{Entry, EntryDim};
use crate::scheme::{example13_entry, SchemeKind};

/// Why the operator is (or is not) rich.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RichTag {
    FiniteDimEntries,
    PaperAsserted,
    NotRich,
}

#[derive(Clone, Debug)]
pub struct Representative {
    pub label: String,
    pub operator: BandOperator,
    /// Block index k for scheme classes; the enumeration is cut after k = `truncated_at`.
    pub index: Option<usize>,
}

/// Limit operators of A, one representative per distinct operator up to the orbit rule.
#[derive(Clone, Debug)]
pub struct OperatorSpectrumEnum {
    pub representatives: Vec<Representative>,
    pub orbit_rule: String,
    pub rich: bool,
    pub rich_tag: RichTag,
    pub exhaustive: bool,
    /// Set when the class has infinitely many orbits and only k ≤ K were listed.
    pub truncated_at: Option<usize>,
}

pub const ORBIT_RULE: &str = "all V_{-l} B V_l translates of each representative, l in Z";

pub fn enumerate_spectrum(a: &BandOperator) -> Result<OperatorSpectrumEnum, LimitOpError> {
    enumerate_spectrum_with(a, None)
}

/// As `enumerate_spectrum`, listing scheme orbits only up to block index `max_k`.
pub fn enumerate_spectrum_with(
    a: &BandOperator,
    max_k: Option<usize>,
) -> Result<OperatorSpectrumEnum, LimitOpError> {
    if a.has_scheme() {
        return enumerate_scheme(a, max_k);
    }
    // Finitely many distinct entries along each tail, so every shift sequence has a
    // subsequence of identical translates.
    let tags = (true, RichTag::FiniteDimEntries);
    let ts = a.tail_structure();
    let mut reps: Vec<Representative> = Vec::new();
    if ts.zone.is_none() {
        push_translates(&mut reps, a, "A", ts.joint_period());
    } else {
        let left = tail_operator(a, Side::Left)?;
        let right = tail_operator(a, Side::Right)?;
        push_translates(&mut reps, &left, "left tail", ts.left_period);
        push_translates(&mut reps, &right, "right tail", ts.right_period);
    }
    Ok(OperatorSpectrumEnum {
        representatives: reps,
        orbit_rule: ORBIT_RULE.into(),
        rich: tags.0,
        rich_tag: tags.1,
        exhaustive: true,
        truncated_at: None,
    })
}

#[derive(Clone, Copy)]
pub(crate) enum Side {
    Left,
    Right,
}

/// The periodic operator that A agrees with far out on one side.
pub(crate) fn tail_operator(a: &BandOperator, side: Side) -> Result<BandOperator, LimitOpError> {
    let diagonals = a.diagonals().iter().map(|(&alpha, seq)| {
        let tail = match seq {
            CoeffSeq::EventuallyPeriodic { left, right, .. } => CoeffSeq::Periodic(match side {
                Side::Left => left.clone(),
                Side::Right => right.clone(),
            }),
            other => other.clone(),
        };
        (alpha, tail)
    });
    Ok(BandOperator::new(a.entry_dim(), diagonals)?)
}

fn probe(half_width: usize) -> Interval {
    let h = half_width.max(1) as i64;
    Interval { lo: -h, hi: h }
}

fn push_translates(reps: &mut Vec<Representative>, b: &BandOperator, name: &str, q: u64) {
    let w = b.band_width();
    let window = probe((3 * q as usize).max(3 * w));
    for l in 0..q as i64 {
        let t = b.shift_conjugate(l);
        if reps.iter().any(|r| r.operator.approx_eq_on(&t, window, 0.0)) {
            continue;
        }
        let label = if q == 1 {
            name.to_string()
        } else {
            format!("V_{{-{l}}} ({name}) V_{{{l}}}")
        };
        reps.push(Representative {
            label,
            operator: t,
            index: None,
        });
    }
}

fn enumerate_scheme(a: &BandOperator, max_k: Option<usize>) -> Result<OperatorSpectrumEnum, LimitOpError> {
    let layout = a
        .block_layout()
        .ok_or_else(|| LimitOpError::UnsupportedClass("mixed scheme and non-scheme diagonals".into()))?;
    let n_max = layout.scheme.n_max();
    let k_max = max_k.unwrap_or(n_max).clamp(1, n_max);
    let (representatives, rich, rich_tag) = match layout.scheme.kind() {
        SchemeKind::Example14 => (example14_reps(k_max), true, RichTag::PaperAsserted),
        SchemeKind::Example13 => (example13_reps(k_max), false, RichTag::NotRich),
    };
    Ok(OperatorSpectrumEnum {
        representatives,
        orbit_rule: ORBIT_RULE.into(),
        rich,
        rich_tag,
        exhaustive: true,
        truncated_at: Some(k_max),
    })
}

/// Diagonal β of diag(…, C_k, C_k, …) with blocks starting at multiples of k.
fn c_diagonal(k: usize, beta: i64) -> Periodic {
    let off = -1.0 / (k as f64 + 1.0);
    let table = (0..k as i64)
        .map(|t| {
            if (0..k as i64).contains(&(t - beta)) {
                Entry::real(if beta == 0 { 1.0 + off } else { off })
            } else {
                Entry::real(0.0)
            }
        })
        .collect();
    Periodic::new(table).expect("k ≥ 1")
}

fn scalar_op(diagonals: Vec<(i64, CoeffSeq)>) -> BandOperator {
    BandOperator::new(EntryDim::Finite(1), diagonals).expect("gallery representatives are valid")
}

/// `left` on rows < 0 and `right` on rows ≥ 0, per diagonal.
fn junction(left: impl Fn(i64) -> Periodic, right: impl Fn(i64) -> Periodic, w: i64) -> BandOperator {
    scalar_op(
        (-w..=w)
            .map(|beta| {
                (
                    beta,
                    CoeffSeq::EventuallyPeriodic {
                        left: left(beta),
                        core_start: 0,
                        core: vec![],
                        right: right(beta),
                    },
                )
            })
            .collect(),
    )
}

fn c_or_zero(k: usize, beta: i64) -> Periodic {
    if beta.unsigned_abs() as usize >= k {
        Periodic::constant(Entry::real(0.0))
    } else {
        c_diagonal(k, beta)
    }
}

fn example14_reps(k_max: usize) -> Vec<Representative> {
    let mut reps = vec![
        Representative {
            label: "I".into(),
            operator: BandOperator::identity(EntryDim::Finite(1)),
            index: None,
        },
        Representative {
            label: "diag(..., I, I, C_1, C_1, ...)".into(),
            operator: junction(
                |_| Periodic::constant(Entry::real(1.0)),
                |b| c_diagonal(1, b),
                0,
            ),
            index: Some(1),
        },
    ];
    for k in 1..=k_max {
        if k > 1 {
            reps.push(Representative {
                label: format!("diag(..., C_{}, C_{}, C_{k}, C_{k}, ...)", k - 1, k - 1),
                operator: junction(|b| c_or_zero(k - 1, b), |b| c_diagonal(k, b), k as i64 - 1),
                index: Some(k),
            });
        }
        let w = k as i64 - 1;
        reps.push(Representative {
            label: format!("diag(..., C_{k}, C_{k}, ...)"),
            operator: scalar_op((-w..=w).map(|b| (b, CoeffSeq::Periodic(c_diagonal(k, b)))).collect()),
            index: Some(k),
        });
    }
    reps
}

fn example13_reps(k_max: usize) -> Vec<Representative> {
    let abs = |seq| BandOperator::diagonal(EntryDim::Abstract, seq).expect("abstract diagonal is valid");
    let mut reps = vec![Representative {
        label: "I".into(),
        operator: BandOperator::identity(EntryDim::Abstract),
        index: None,
    }];
    for k in 1..=k_max {
        if k > 1 {
            reps.push(Representative {
                label: format!("diag(..., B_{}, B_{}, B_{k}, B_{k}, ...)", k - 1, k - 1),
                operator: abs(CoeffSeq::EventuallyPeriodic {
                    left: Periodic::constant(example13_entry(k - 1)),
                    core_start: 0,
                    core: vec![],
                    right: Periodic::constant(example13_entry(k)),
                }),
                index: Some(k),
            });
        }
        reps.push(Representative {
            label: format!("diag(..., B_{k}, B_{k}, ...)"),
            operator: abs(CoeffSeq::Constant(example13_entry(k))),
            index: Some(k),
        });
    }
    reps
}
