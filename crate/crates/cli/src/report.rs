use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use limitop::spec_io::round12;
use limitop::{LowerNormEstimate, VectorSegment, WindowCertificate};

use crate::error::CliError;

/// Rounds every non-integer number to 12 significant digits.
pub fn rounded(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n
            .as_f64()
            .and_then(|x| serde_json::Number::from_f64(round12(x)))
            .map_or(Value::Null, Value::Number),
        Value::Array(a) => Value::Array(a.into_iter().map(rounded).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, rounded(v))).collect()),
        other => other,
    }
}

pub fn to_json(x: &impl Serialize) -> Value {
    rounded(serde_json::to_value(x).expect("reports serialize"))
}

pub fn render(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json renders") + "\n"
}

pub fn emit(v: &Value) {
    emit_text(&render(v));
}

/// Writes to stdout; a closed pipe downstream is not an error.
pub fn emit_text(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(s.as_bytes());
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Precondition(format!("cannot write {}: {e}", path.display())))
}

/// `%.12g`-style formatting for CSV cells.
pub fn fmt12(x: f64) -> String {
    if x.is_finite() {
        format!("{}", round12(x))
    } else {
        format!("{x}")
    }
}

pub fn certificate(c: &WindowCertificate) -> Value {
    let mut m = Map::new();
    m.insert("method".into(), to_json(&c.method));
    m.insert("D".into(), c.d.into());
    m.insert("internals".into(), to_json(&c.internals));
    m.insert("delta".into(), to_json(&c.delta));
    m.insert("r".into(), to_json(&c.r));
    m.insert("w".into(), c.w.into());
    m.insert("p".into(), c.p.label().into());
    m.insert("N".into(), c.n.into());
    m.insert("alternatives".into(), to_json(&c.alternatives));
    Value::Object(m)
}

fn witness(x: &VectorSegment) -> Value {
    let vals: Vec<[f64; 2]> = x.data.iter().map(|z| [z.re, z.im]).collect();
    rounded(serde_json::json!({ "offset": x.offset, "dim": x.dim, "values": vals }))
}

pub fn estimate(e: &LowerNormEstimate, with_witness: bool) -> Value {
    let (kind, delta) = match e.kind {
        limitop::lower_norm::EstimateKind::Exact => ("Exact", Value::Null),
        limitop::lower_norm::EstimateKind::UpperWithinDelta(d) => ("UpperWithinDelta", to_json(&d)),
    };
    let mut m = Map::new();
    m.insert("value".into(), to_json(&e.value));
    m.insert("kind".into(), kind.into());
    m.insert("delta".into(), delta);
    m.insert("p".into(), e.p_norm.label().into());
    m.insert("witnessOffset".into(), e.witness_offset.map_or(Value::Null, Value::from));
    m.insert("certificate".into(), e.certificate.as_ref().map_or(Value::Null, certificate));
    if with_witness {
        m.insert("witness".into(), e.witness.as_ref().map_or(Value::Null, witness));
    }
    Value::Object(m)
}
