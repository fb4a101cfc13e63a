//! Parsing of command-line operands: space specifiers, states, inline
//! matrices, ranges and group names.

use std::path::Path;

use gptlab_core::geometry::linalg::{Matrix, Vector};
use gptlab_core::statespace::{make_classical, make_polygon, polygon_from_vertices};
use gptlab_core::teleport::{close_group, cyclic_group, dihedral_group};
use gptlab_core::{Scalar, ScalarMode, StateSpace};
use serde_json::Value;

use crate::codec;
use crate::error::{CliError, CliResult};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Vertices of the irregular hexagon used as a space that is not weakly
/// self-dual.
pub const FOIL_VERTICES: [(i64, i64); 6] = [(0, 0), (3, 0), (4, 1), (4, 3), (1, 4), (0, 2)];

pub fn foil<S: Scalar>() -> CliResult<StateSpace<S>> {
    let v: Vec<[S; 2]> = FOIL_VERTICES
        .iter()
        .map(|&(x, y)| [S::from_i64(x), S::from_i64(y)])
        .collect();
    Ok(polygon_from_vertices("foil", &v)?)
}

fn parse_count(s: &str, what: &str) -> CliResult<usize> {
    s.parse()
        .map_err(|_| usage(format!("{what} expects a positive integer, got `{s}`")))
}

/// `classical N`, `polygon N`, `foil`, `custom FILE`.
pub fn builtin<S: Scalar>(kind: &str, param: Option<&str>) -> CliResult<StateSpace<S>> {
    let need = |what: &str| param.ok_or_else(|| usage(format!("`{kind}` needs {what}")));
    match kind {
        "classical" => Ok(make_classical(parse_count(need("a size")?, kind)?)?),
        "polygon" => Ok(make_polygon(parse_count(need("a vertex count")?, kind)?)?),
        "square" => Ok(make_polygon(4)?),
        "foil" => foil(),
        "custom" => load_space_file(Path::new(need("a JSON file")?)),
        other => Err(usage(format!(
            "unknown space kind `{other}` (classical, polygon, square, foil, custom)"
        ))),
    }
}

/// A space operand: `square`, `foil`, `classicalN`, `polygonN` (also with a
/// colon, `polygon:5`), a path to a space file or tensor report, or
/// several of these joined by `+` for a direct sum.
pub fn space<S: Scalar>(spec: &str) -> CliResult<StateSpace<S>> {
    if Path::new(spec).is_file() {
        return load_space_file(Path::new(spec));
    }
    if spec.contains('+') {
        let mut parts = spec.split('+').map(space::<S>);
        let first = parts.next().ok_or_else(|| usage("empty direct sum"))??;
        return parts.try_fold(first, |acc, p| Ok(acc.direct_sum(&p?)?));
    }
    let split = spec
        .find(|c: char| c.is_ascii_digit() || c == ':')
        .unwrap_or(spec.len());
    let (kind, rest) = spec.split_at(split);
    let param = rest.strip_prefix(':').unwrap_or(rest);
    match kind {
        "square" | "foil" if param.is_empty() => builtin(kind, None),
        "classical" | "polygon" if !param.is_empty() => builtin(kind, Some(param)),
        _ => Err(usage(format!("`{spec}` is neither a known space nor a file"))),
    }
}

/// Reads a space file, or the composite space of a tensor report.
pub fn load_space_file<S: Scalar>(path: &Path) -> CliResult<StateSpace<S>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let doc = codec::parse_document(&text)?;
    space_from_document(&doc)
}

pub fn space_from_document<S: Scalar>(doc: &Value) -> CliResult<StateSpace<S>> {
    match codec::check_header(doc, S::MODE)? {
        "space" => codec::parse_space(codec::field(doc, "space")?),
        "report" if doc.get("task").and_then(Value::as_str) == Some("tensor") => {
            codec::parse_space(codec::field(codec::field(doc, "certificates")?, "composite")?)
        }
        other => Err(usage(format!("a `{other}` document does not describe a state space"))),
    }
}

/// A scalar from the command line: an integer, `p/q`, or (floating mode)
/// a decimal.
pub fn scalar<S: Scalar>(s: &str) -> CliResult<S> {
    let s = s.trim();
    match S::MODE {
        ScalarMode::Exact => codec::parse_scalar(&Value::String(s.to_string())),
        ScalarMode::Float => {
            let v = match s.split_once('/') {
                Some((p, q)) => p
                    .trim()
                    .parse::<f64>()
                    .ok()
                    .zip(q.trim().parse::<f64>().ok())
                    .map(|(p, q)| p / q),
                None => s.parse::<f64>().ok(),
            };
            v.and_then(S::from_f64)
                .ok_or_else(|| usage(format!("bad scalar `{s}`")))
        }
    }
}

/// `vK` (vertex K of the state polytope), `center` (barycenter) or
/// comma-separated coordinates.
pub fn state<S: Scalar>(space: &StateSpace<S>, s: &str) -> CliResult<Vector<S>> {
    if s == "center" {
        return Ok(space.barycenter());
    }
    if let Some(k) = s
        .strip_prefix('v')
        .filter(|k| !k.is_empty() && k.bytes().all(|b| b.is_ascii_digit()))
    {
        let k: usize = parse_count(k, "vertex")?;
        return space.omega_vertices().get(k).cloned().ok_or_else(|| {
            usage(format!(
                "{} has {} vertices, no v{k}",
                space.label(),
                space.omega_vertices().len()
            ))
        });
    }
    let v: Vector<S> = s.split(',').map(scalar).collect::<CliResult<_>>()?;
    if v.len() != space.dim() {
        return Err(gptlab_core::GptError::DimensionMismatch {
            expected: space.dim(),
            got: v.len(),
        }
        .into());
    }
    Ok(v)
}

/// Rows separated by `;`, entries by `,`; or a path to a JSON array of rows.
pub fn matrix<S: Scalar>(s: &str) -> CliResult<Matrix<S>> {
    if Path::new(s).is_file() {
        let text = std::fs::read_to_string(s).map_err(|e| CliError::io(s, e))?;
        return codec::parse_matrix(&codec::parse_document(&text)?);
    }
    let rows: Vec<Vector<S>> = s
        .split(';')
        .map(|r| r.split(',').map(scalar).collect::<CliResult<_>>())
        .collect::<CliResult<_>>()?;
    Ok(Matrix::from_rows(&rows)?)
}

/// `a..b` (inclusive) or a single integer.
pub fn range(s: &str) -> CliResult<std::ops::RangeInclusive<usize>> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (
            parse_count(lo, "range")?,
            parse_count(hi.trim_start_matches('='), "range")?,
        ),
        None => {
            let n = parse_count(s, "range")?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(usage(format!("bad range `{s}` (need 1 <= a <= b)")));
    }
    Ok(lo..=hi)
}

/// `Zn` rotations, `Dn` rotations and reflections, `S3` (the dihedral
/// group of the triangle), `trivial`. The order must match the polygon.
pub fn group<S: Scalar>(space: &StateSpace<S>, name: &str) -> CliResult<Vec<Matrix<S>>> {
    let n = space.omega_vertices().len();
    let check = |k: &str| -> CliResult<()> {
        if parse_count(k, "group")? != n {
            return Err(usage(format!(
                "group {name} does not match the {n} vertices of {}",
                space.label()
            )));
        }
        Ok(())
    };
    match name {
        "trivial" => Ok(close_group(&[Matrix::identity(space.dim())], 1)?),
        "S3" if n == 3 => Ok(dihedral_group(space)?),
        _ if name.starts_with('Z') => {
            check(&name[1..])?;
            Ok(cyclic_group(space)?)
        }
        _ if name.starts_with('D') => {
            check(&name[1..])?;
            Ok(dihedral_group(space)?)
        }
        _ => Err(usage(format!("unknown group `{name}` (Zn, Dn, S3, trivial)"))),
    }
}
