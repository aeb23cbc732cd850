//! JSON operator specs.
//!
//! ```json
//! { "entryDim": 1,
//!   "diagonals": [
//!     { "offset": 1, "kind": "constant", "value": [1, 0] },
//!     { "offset": 0, "kind": "eventuallyPeriodic",
//!       "left": [[2, 0]], "coreStart": 0, "core": [[1, 0]], "right": [[0, 0]] } ] }
//! ```
//!
//! Scalars are `[re, im]`, matrix entries are row lists of scalars and abstract entries are
//! `{ "label", "norm", "lowerNorm" }`. `entryDim` is a positive integer or `"abstract"`.
//! Scheme diagonals name a registered layout (`example13`, `example14`) with `params.nMax`,
//! plus optional `shift` and `adjoint`; the name `flip` describes `a·I + b·V_{−j} J V_j`
//! and must be the only diagonal.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::band::{BandOperator, CoeffSeq, Periodic, SchemeSeq};
use crate::entry::{Entry, EntryDim, C64};
use crate::limit_ops::FlipOperator;
use crate::scheme::{BlockScheme, SchemeKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntrySpec {
    Scalar([f64; 2]),
    Matrix(Vec<Vec<[f64; 2]>>),
    Abstract(AbstractSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct AbstractSpec {
    pub label: String,
    pub norm: f64,
    pub lower_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DimSpec {
    Finite(usize),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SchemeParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase", rename_all_fields = "camelCase", deny_unknown_fields)]
pub enum DiagonalKind {
    Constant {
        value: EntrySpec,
    },
    Periodic {
        table: Vec<EntrySpec>,
    },
    EventuallyPeriodic {
        left: Vec<EntrySpec>,
        core_start: i64,
        core: Vec<EntrySpec>,
        right: Vec<EntrySpec>,
    },
    Scheme {
        name: String,
        #[serde(default)]
        params: SchemeParams,
        #[serde(default, skip_serializing_if = "is_zero")]
        shift: i64,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        adjoint: bool,
    },
}

fn is_zero(x: &i64) -> bool {
    *x == 0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagonalSpec {
    pub offset: i64,
    #[serde(flatten)]
    pub kind: DiagonalKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct OperatorSpec {
    pub entry_dim: DimSpec,
    pub diagonals: Vec<DiagonalSpec>,
}

/// What a spec describes: a band operator, or the flip family of the non-band example.
#[derive(Clone, Debug, PartialEq)]
pub enum SpecOperator {
    Band(BandOperator),
    Flip(FlipOperator),
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

pub fn parse_spec(text: &str) -> Result<SpecOperator, SpecError> {
    let spec: OperatorSpec = serde_json::from_str(text).map_err(|e| SpecError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    build(&spec)
}

pub fn parse_band(text: &str) -> Result<BandOperator, SpecError> {
    match parse_spec(text)? {
        SpecOperator::Band(b) => Ok(b),
        SpecOperator::Flip(_) => Err(field("diagonals", "the flip is not a band operator")),
    }
}

fn entry(e: &EntrySpec, dim: EntryDim, path: &str) -> Result<Entry, SpecError> {
    let c = |z: &[f64; 2]| C64::new(z[0], z[1]);
    let out = match (e, dim) {
        (EntrySpec::Scalar(z), EntryDim::Finite(1)) => Entry::Scalar(c(z)),
        (EntrySpec::Matrix(rows), EntryDim::Finite(d)) => {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(field(path, format!("expected a {d}×{d} matrix")));
            }
            Entry::Matrix(DMatrix::from_fn(d, d, |i, j| c(&rows[i][j])))
        }
        (EntrySpec::Abstract(a), EntryDim::Abstract) => Entry::abstract_entry(a.label.clone(), a.norm, a.lower_norm),
        (_, EntryDim::Finite(1)) => return Err(field(path, "expected a scalar [re, im]")),
        (_, EntryDim::Finite(d)) => return Err(field(path, format!("expected a {d}×{d} matrix"))),
        (_, EntryDim::Abstract) => return Err(field(path, "expected {label, norm, lowerNorm}")),
    };
    out.validate().map_err(|e| field(path, e.to_string()))?;
    Ok(out)
}

fn table(v: &[EntrySpec], dim: EntryDim, path: &str) -> Result<Vec<Entry>, SpecError> {
    v.iter()
        .enumerate()
        .map(|(t, e)| entry(e, dim, &format!("{path}[{t}]")))
        .collect()
}

fn periodic(v: &[EntrySpec], dim: EntryDim, path: &str) -> Result<Periodic, SpecError> {
    Periodic::new(table(v, dim, path)?).map_err(|e| field(path, e.to_string()))
}

pub fn build(spec: &OperatorSpec) -> Result<SpecOperator, SpecError> {
    let dim = match &spec.entry_dim {
        DimSpec::Finite(0) => return Err(field("entryDim", "must be positive")),
        DimSpec::Finite(d) => EntryDim::Finite(*d),
        DimSpec::Named(s) if s == "abstract" => EntryDim::Abstract,
        DimSpec::Named(s) => return Err(field("entryDim", format!("expected an integer or \"abstract\", got \"{s}\""))),
    };
    let mut schemes: BTreeMap<(String, usize), Arc<BlockScheme>> = BTreeMap::new();
    let mut diagonals = Vec::with_capacity(spec.diagonals.len());
    for (t, dg) in spec.diagonals.iter().enumerate() {
        let path = format!("diagonals[{t}]");
        let seq = match &dg.kind {
            DiagonalKind::Constant { value } => CoeffSeq::Constant(entry(value, dim, &format!("{path}.value"))?),
            DiagonalKind::Periodic { table } => CoeffSeq::Periodic(periodic(table, dim, &format!("{path}.table"))?),
            DiagonalKind::EventuallyPeriodic {
                left,
                core_start,
                core,
                right,
            } => CoeffSeq::EventuallyPeriodic {
                left: periodic(left, dim, &format!("{path}.left"))?,
                core_start: *core_start,
                core: table(core, dim, &format!("{path}.core"))?,
                right: periodic(right, dim, &format!("{path}.right"))?,
            },
            DiagonalKind::Scheme {
                name,
                params,
                shift,
                adjoint,
            } => {
                if name == "flip" {
                    return flip(spec, params, dim, &path).map(SpecOperator::Flip);
                }
                let kind = SchemeKind::from_name(name)
                    .ok_or_else(|| field(format!("{path}.name"), format!("unknown scheme \"{name}\"")))?;
                let n_max = params
                    .n_max
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| field(format!("{path}.params.nMax"), "a positive block count is required"))?;
                if params.a.is_some() || params.b.is_some() || params.j.is_some() {
                    return Err(field(format!("{path}.params"), "only nMax applies to this scheme"));
                }
                let scheme = schemes
                    .entry((name.clone(), n_max))
                    .or_insert_with(|| Arc::new(BlockScheme::new(kind, n_max)))
                    .clone();
                if scheme.entry_dim() != dim {
                    return Err(field("entryDim", format!("scheme \"{name}\" needs a different entry dimension")));
                }
                CoeffSeq::Scheme(SchemeSeq {
                    scheme,
                    beta: dg.offset,
                    shift: *shift,
                    adjoint: *adjoint,
                })
            }
        };
        diagonals.push((dg.offset, seq));
    }
    BandOperator::new(dim, diagonals)
        .map(SpecOperator::Band)
        .map_err(|e| field("diagonals", e.to_string()))
}

fn flip(spec: &OperatorSpec, params: &SchemeParams, dim: EntryDim, path: &str) -> Result<FlipOperator, SpecError> {
    if spec.diagonals.len() != 1 {
        return Err(field("diagonals", "a flip spec must consist of the single flip diagonal"));
    }
    if dim != EntryDim::Finite(1) {
        return Err(field("entryDim", "the flip acts on scalar sequences"));
    }
    if params.n_max.is_some() {
        return Err(field(format!("{path}.params.nMax"), "not a flip parameter"));
    }
    let c = |z: Option<[f64; 2]>, default: f64| z.map_or(C64::new(default, 0.0), |z| C64::new(z[0], z[1]));
    Ok(FlipOperator {
        a: c(params.a, 0.0),
        b: c(params.b, 1.0),
        j: params.j.unwrap_or(0),
    })
}

fn entry_spec(e: &Entry) -> EntrySpec {
    let c = |z: C64| [round12(z.re), round12(z.im)];
    match e {
        Entry::Scalar(z) => EntrySpec::Scalar(c(*z)),
        Entry::Matrix(m) => EntrySpec::Matrix((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| c(m[(i, j)])).collect()).collect()),
        Entry::Abstract(a) => EntrySpec::Abstract(AbstractSpec {
            label: a.label.clone(),
            norm: round12(a.norm),
            lower_norm: round12(a.lower_norm),
        }),
    }
}

fn table_spec(p: &Periodic) -> Vec<EntrySpec> {
    p.table().iter().map(entry_spec).collect()
}

/// The spec describing `op`, with floats rounded to 12 significant digits.
pub fn to_spec(op: &BandOperator) -> OperatorSpec {
    let entry_dim = match op.entry_dim() {
        EntryDim::Finite(d) => DimSpec::Finite(d),
        EntryDim::Abstract => DimSpec::Named("abstract".into()),
    };
    let diagonals = op
        .diagonals()
        .iter()
        .map(|(&offset, seq)| DiagonalSpec {
            offset,
            kind: match seq {
                CoeffSeq::Constant(e) => DiagonalKind::Constant { value: entry_spec(e) },
                CoeffSeq::Periodic(p) => DiagonalKind::Periodic { table: table_spec(p) },
                CoeffSeq::EventuallyPeriodic {
                    left,
                    core_start,
                    core,
                    right,
                } => DiagonalKind::EventuallyPeriodic {
                    left: table_spec(left),
                    core_start: *core_start,
                    core: core.iter().map(entry_spec).collect(),
                    right: table_spec(right),
                },
                CoeffSeq::Scheme(s) => DiagonalKind::Scheme {
                    name: s.scheme.kind().name().into(),
                    params: SchemeParams {
                        n_max: Some(s.scheme.n_max()),
                        ..Default::default()
                    },
                    shift: s.shift,
                    adjoint: s.adjoint,
                },
            },
        })
        .collect();
    OperatorSpec { entry_dim, diagonals }
}

pub fn flip_spec(f: &FlipOperator) -> OperatorSpec {
    let c = |z: C64| Some([round12(z.re), round12(z.im)]);
    OperatorSpec {
        entry_dim: DimSpec::Finite(1),
        diagonals: vec![DiagonalSpec {
            offset: 0,
            kind: DiagonalKind::Scheme {
                name: "flip".into(),
                params: SchemeParams {
                    n_max: None,
                    a: c(f.a),
                    b: c(f.b),
                    j: Some(f.j),
                },
                shift: 0,
                adjoint: false,
            },
        }],
    }
}

pub fn spec_json(spec: &OperatorSpec) -> String {
    serde_json::to_string_pretty(spec).expect("specs always serialize")
}
