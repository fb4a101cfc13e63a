//! JSON encoding. Every file starts with the same header: `format`,
//! `kind`, `scalar` and `version`. Exact scalars are `"p/q"` strings,
//! floats are JSON numbers in shortest round-trip form. Objects are
//! serialized with sorted keys.

use gptlab_core::geometry::linalg::{Matrix, Vector};
use gptlab_core::{Scalar, ScalarMode, StateSpace};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

pub const FORMAT: &str = "gpt-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn bad(what: impl Into<String>) -> CliError {
    CliError::Usage(format!("malformed JSON: {}", what.into()))
}

pub fn scalar<S: Scalar>(x: &S) -> Value {
    match x.to_json() {
        // -0.0 and 0.0 print differently
        Value::Number(n) if n.as_f64() == Some(0.0) => json!(0.0),
        v => v,
    }
}

pub fn vector<S: Scalar>(v: &[S]) -> Value {
    Value::Array(v.iter().map(scalar).collect())
}

pub fn vectors<S: Scalar>(vs: &[Vector<S>]) -> Value {
    Value::Array(vs.iter().map(|v| vector(v)).collect())
}

pub fn matrix<S: Scalar>(m: &Matrix<S>) -> Value {
    Value::Array((0..m.rows()).map(|r| vector(&m.row(r))).collect())
}

pub fn matrices<S: Scalar>(ms: &[Matrix<S>]) -> Value {
    Value::Array(ms.iter().map(matrix).collect())
}

pub fn parse_scalar<S: Scalar>(v: &Value) -> CliResult<S> {
    Ok(S::from_json(v)?)
}

pub fn parse_vector<S: Scalar>(v: &Value) -> CliResult<Vector<S>> {
    v.as_array()
        .ok_or_else(|| bad("expected an array of scalars"))?
        .iter()
        .map(parse_scalar)
        .collect()
}

pub fn parse_vectors<S: Scalar>(v: &Value) -> CliResult<Vec<Vector<S>>> {
    v.as_array()
        .ok_or_else(|| bad("expected an array of vectors"))?
        .iter()
        .map(parse_vector)
        .collect()
}

pub fn parse_matrix<S: Scalar>(v: &Value) -> CliResult<Matrix<S>> {
    let rows = parse_vectors::<S>(v)?;
    if rows.is_empty() {
        return Err(bad("empty matrix"));
    }
    Ok(Matrix::from_rows(&rows)?)
}

pub fn parse_matrices<S: Scalar>(v: &Value) -> CliResult<Vec<Matrix<S>>> {
    v.as_array()
        .ok_or_else(|| bad("expected an array of matrices"))?
        .iter()
        .map(parse_matrix)
        .collect()
}

pub fn space<S: Scalar>(a: &StateSpace<S>) -> Value {
    json!({
        "dim": a.dim(),
        "label": a.label(),
        "rays": vectors(a.cone().rays()),
        "unit": vector(a.unit()),
    })
}

pub fn parse_space<S: Scalar>(v: &Value) -> CliResult<StateSpace<S>> {
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad("space needs an integer `dim`"))? as usize;
    let label = v.get("label").and_then(Value::as_str).unwrap_or("custom");
    let rays = parse_vectors::<S>(field(v, "rays")?)?;
    let unit = parse_vector::<S>(field(v, "unit")?)?;
    if let Some(r) = rays.iter().chain(std::iter::once(&unit)).find(|r| r.len() != dim) {
        return Err(gptlab_core::GptError::DimensionMismatch {
            expected: dim,
            got: r.len(),
        }
        .into());
    }
    Ok(StateSpace::from_rays(label, &rays, unit)?)
}

pub fn field<'a>(v: &'a Value, key: &str) -> CliResult<&'a Value> {
    v.get(key).ok_or_else(|| bad(format!("missing `{key}`")))
}

pub fn str_field<'a>(v: &'a Value, key: &str) -> CliResult<&'a str> {
    field(v, key)?
        .as_str()
        .ok_or_else(|| bad(format!("`{key}` must be a string")))
}

pub fn usize_field(v: &Value, key: &str) -> CliResult<usize> {
    field(v, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("`{key}` must be an integer")))
}

pub fn bool_field(v: &Value, key: &str) -> CliResult<bool> {
    field(v, key)?
        .as_bool()
        .ok_or_else(|| bad(format!("`{key}` must be a boolean")))
}

/// A document with the common header.
pub fn document(kind: &str, mode: ScalarMode, body: Map<String, Value>) -> Value {
    let mut m = body;
    m.insert("format".into(), json!(FORMAT));
    m.insert("kind".into(), json!(kind));
    m.insert("scalar".into(), json!(mode.as_str()));
    m.insert("version".into(), json!(VERSION));
    Value::Object(m)
}

/// Checks the header of a loaded document against the scalar mode in use.
pub fn check_header(doc: &Value, mode: ScalarMode) -> CliResult<&str> {
    if doc.get("format").and_then(Value::as_str) != Some(FORMAT) {
        return Err(bad("not a gpt-lab document"));
    }
    let found = str_field(doc, "scalar")?;
    if found != mode.as_str() {
        return Err(CliError::Usage(format!(
            "document is in {found} mode but {mode} mode is in use (pass --scalar {found})"
        )));
    }
    str_field(doc, "kind")
}

pub fn parse_document(text: &str) -> CliResult<Value> {
    serde_json::from_str(text).map_err(|e| bad(e.to_string()))
}

/// Pretty-printed, keys sorted, LF line endings, trailing newline.
pub fn render(doc: &Value) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("values always serialize");
    s.push('\n');
    s
}

/// Compact canonical form used for digests.
pub fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("values always serialize")
}

/// The scalar mode a document was written in, read from its header.
pub fn document_mode(doc: &Value) -> CliResult<ScalarMode> {
    str_field(doc, "scalar")?
        .parse()
        .map_err(|_| bad("unknown scalar mode"))
}
