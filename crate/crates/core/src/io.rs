//! Serialization of spaces, embeddings, and run ledgers.
//!
//! All functions work on strings; file handling belongs to callers. Numbers
//! in CSV output are printed with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 exactly. CSV fields containing commas or
//! quotes are quoted; labels with embedded newlines are not supported.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extension::{ExtensionError, PointMap};
use crate::metric::{validate_metric, FiniteMetricSpace, MetricError, SubsetRef};
use crate::pipeline::{Embedding, LevelConstants};

#[derive(Error, Debug)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Extension(#[from] ExtensionError),
    #[error("input has no rows")]
    Empty,
    #[error("line {line}: expected {expected} fields, got {got}")]
    FieldCount { line: usize, expected: usize, got: usize },
    #[error("line {line}, field {field}: cannot parse a number from {text:?}")]
    BadNumber { line: usize, field: usize, text: String },
    #[error("line {line}: unterminated quoted field")]
    UnterminatedQuote { line: usize },
    #[error("embedding rows do not match the space: {0}")]
    LabelMismatch(String),
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    matrix: Vec<Vec<f64>>,
}

/// Parses `{"labels": [...]?, "matrix": [[...]]}` and validates the matrix.
pub fn read_space_json(text: &str) -> Result<FiniteMetricSpace, IoError> {
    let doc: SpaceDoc = serde_json::from_str(text)?;
    Ok(validate_metric(&doc.matrix, doc.labels)?)
}

/// The inverse of [`read_space_json`]; always includes labels. serde_json
/// prints each f64 with the shortest exact representation, so the round
/// trip is bitwise.
pub fn write_space_json(space: &FiniteMetricSpace) -> String {
    let matrix: Vec<Vec<f64>> = space
        .points()
        .map(|a| space.points().map(|b| space.d(a, b)).collect())
        .collect();
    let doc = SpaceDoc { labels: Some(space.labels().to_vec()), matrix };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}

fn csv_escape(field: &str) -> String {
    debug_assert!(
        !field.contains('\n') && !field.contains('\r'),
        "labels with newlines are unsupported in CSV output"
    );
    if field.contains(',') || field.contains('"') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Splits one CSV line, honoring quoted fields (`""` for a literal quote).
fn csv_split(line: &str, line_no: usize) -> Result<Vec<String>, IoError> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    loop {
        match chars.next() {
            None => {
                if quoted {
                    return Err(IoError::UnterminatedQuote { line: line_no });
                }
                fields.push(cur);
                return Ok(fields);
            }
            Some('"') if quoted => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    cur.push('"');
                } else {
                    quoted = false;
                }
            }
            Some('"') if cur.is_empty() => quoted = true,
            Some(',') if !quoted => fields.push(std::mem::take(&mut cur)),
            Some(c) => cur.push(c),
        }
    }
}

fn parse_f64(text: &str, line: usize, field: usize) -> Result<f64, IoError> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| IoError::BadNumber { line, field, text: text.to_string() })
}

fn nonempty_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty())
        .collect()
}

/// Space CSV: a header of labels, then the full square matrix, one row per
/// line, numbers printed with 17 significant digits.
pub fn write_space_csv(space: &FiniteMetricSpace) -> String {
    let mut out = String::new();
    let header: Vec<String> = space.labels().iter().map(|l| csv_escape(l)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for a in space.points() {
        let row: Vec<String> = space.points().map(|b| format!("{:.16e}", space.d(a, b))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Parses the [`write_space_csv`] format and validates the matrix.
pub fn read_space_csv(text: &str) -> Result<FiniteMetricSpace, IoError> {
    let lines = nonempty_lines(text);
    let (&(header_no, header), body) = lines.split_first().ok_or(IoError::Empty)?;
    let labels = csv_split(header, header_no)?;
    let n = labels.len();
    if body.len() != n {
        return Err(IoError::FieldCount {
            line: body.last().map_or(header_no, |&(no, _)| no),
            expected: n,
            got: body.len(),
        });
    }
    let mut matrix = Vec::with_capacity(n);
    for &(no, line) in body {
        let fields = csv_split(line, no)?;
        if fields.len() != n {
            return Err(IoError::FieldCount { line: no, expected: n, got: fields.len() });
        }
        let mut row = Vec::with_capacity(n);
        for (fi, f) in fields.iter().enumerate() {
            row.push(parse_f64(f, no, fi + 1)?);
        }
        matrix.push(row);
    }
    Ok(validate_metric(&matrix, Some(labels))?)
}

/// Embedding CSV: header `label,c0,...,c{m-1}`, one row per domain point in
/// id order, coordinates with 17 significant digits.
pub fn write_embedding_csv(space: &FiniteMetricSpace, map: &PointMap) -> String {
    let mut out = String::from("label");
    for c in 0..map.dim() {
        out.push_str(&format!(",c{c}"));
    }
    out.push('\n');
    for (p, v) in map.iter() {
        out.push_str(&csv_escape(space.label(p)));
        for x in v {
            out.push_str(&format!(",{x:.16e}"));
        }
        out.push('\n');
    }
    out
}

/// Parses the [`write_embedding_csv`] format against a space: every row's
/// label must name a distinct point of the space (rows may cover any
/// nonempty subset, in any order). The result carries placeholder constants
/// (scale 1, distortion 1) for measurement-only use.
pub fn read_embedding_csv(text: &str, space: &FiniteMetricSpace) -> Result<PointMap, IoError> {
    let lines = nonempty_lines(text);
    let (&(header_no, header), body) = lines.split_first().ok_or(IoError::Empty)?;
    let header_fields = csv_split(header, header_no)?;
    if header_fields.len() < 2 || header_fields[0] != "label" {
        return Err(IoError::LabelMismatch(
            "header must be `label,c0,...` with at least one coordinate".into(),
        ));
    }
    let dim = header_fields.len() - 1;
    let mut by_label: HashMap<&str, usize> = HashMap::new();
    for (i, l) in space.labels().iter().enumerate() {
        if by_label.insert(l.as_str(), i).is_some() {
            return Err(IoError::LabelMismatch(format!(
                "space has duplicate label {l:?}; rows cannot be matched"
            )));
        }
    }
    if body.is_empty() {
        return Err(IoError::Empty);
    }
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::with_capacity(body.len());
    let mut seen = vec![false; space.len()];
    for &(no, line) in body {
        let fields = csv_split(line, no)?;
        if fields.len() != dim + 1 {
            return Err(IoError::FieldCount { line: no, expected: dim + 1, got: fields.len() });
        }
        let id = *by_label.get(fields[0].as_str()).ok_or_else(|| {
            IoError::LabelMismatch(format!("row label {:?} is not in the space", fields[0]))
        })?;
        if seen[id] {
            return Err(IoError::LabelMismatch(format!(
                "label {:?} appears in more than one row",
                fields[0]
            )));
        }
        seen[id] = true;
        let mut v = Vec::with_capacity(dim);
        for (fi, f) in fields[1..].iter().enumerate() {
            v.push(parse_f64(f, no, fi + 2)?);
        }
        rows.push((id, v));
    }
    rows.sort_by_key(|&(id, _)| id);
    let domain = SubsetRef::from_indices(rows.iter().map(|&(id, _)| id));
    let values = rows.into_iter().map(|(_, v)| v).collect();
    Ok(PointMap::new(domain, dim, values, 1.0, 1.0)?)
}

#[derive(Serialize)]
struct LedgerDoc<'a> {
    dim: usize,
    scale: f64,
    claimed_distortion: f64,
    all_checks_pass: bool,
    levels: &'a [LevelConstants],
}

/// The run ledger of an embedding as pretty JSON: final constants first,
/// then the per-level records, base level first. Field order is fixed by
/// the struct, so equal embeddings produce byte-identical ledgers.
pub fn embedding_ledger_json(emb: &Embedding) -> String {
    let doc = LedgerDoc {
        dim: emb.dim(),
        scale: emb.scale(),
        claimed_distortion: emb.claimed_distortion(),
        all_checks_pass: emb.all_checks_pass(),
        levels: &emb.levels,
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    out.push('\n');
    out
}
