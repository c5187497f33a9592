//! Series CSV, command-line value lists and versioned JSON documents.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{TimeSeries, ValueKind};

pub const SCHEMA: &str = "genspec/1";

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_finite(s: &str, line: usize) -> Result<f64> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(parse_error(line, format!("value {v} is not finite"))),
        Err(_) => Err(parse_error(line, format!("'{}' is not a number", s.trim()))),
    }
}

/// One value per line. A single leading non-numeric line is taken as a
/// header; blank lines are ignored. Count series must hold nonnegative
/// integers.
pub fn parse_series(text: &str, kind: ValueKind) -> Result<TimeSeries> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut values = Vec::new();
    let mut seen_content = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let field = raw.trim();
        if field.is_empty() {
            continue;
        }
        let first = !seen_content;
        seen_content = true;
        if field.contains(',') || field.contains(';') || field.contains('\t') {
            return Err(parse_error(line, "expected a single column"));
        }
        let v = match parse_finite(field, line) {
            Ok(v) => v,
            Err(_) if first && field.parse::<f64>().is_err() => continue,
            Err(e) => return Err(e),
        };
        if kind == ValueKind::Count && !(v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
            return Err(parse_error(line, format!("{field} is not a nonnegative integer")));
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::InsufficientData("no observations".into()));
    }
    match kind {
        ValueKind::Real => TimeSeries::real(values),
        ValueKind::Count => TimeSeries::counts_from_f64(values),
    }
}

/// Writes one value per line, counts without a decimal point.
pub fn format_series(series: &TimeSeries) -> String {
    let mut out = String::with_capacity(series.len() * 8);
    for v in series.values() {
        match series.kind() {
            ValueKind::Count => writeln!(out, "{}", *v as u64),
            ValueKind::Real => writeln!(out, "{v}"),
        }
        .expect("writing to a String");
    }
    out
}

/// Comma-separated finite numbers, e.g. `2,0.7,0.3`.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    if s.trim().is_empty() {
        return Err(parse_error(1, "empty list"));
    }
    s.split(',').map(|x| parse_finite(x, 1)).collect()
}

/// Per-coordinate bounds `lo:hi,lo:hi,...`.
pub fn parse_bounds(s: &str) -> Result<(Vec<f64>, Vec<f64>)> {
    if s.trim().is_empty() {
        return Err(parse_error(1, "empty bounds"));
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for (i, part) in s.split(',').enumerate() {
        let (lo, hi) = part
            .split_once(':')
            .ok_or_else(|| parse_error(1, format!("bound {i} '{}' is not lo:hi", part.trim())))?;
        let (lo, hi) = (parse_finite(lo, 1)?, parse_finite(hi, 1)?);
        if lo > hi {
            return Err(parse_error(1, format!("bound {i} has lo {lo} above hi {hi}")));
        }
        lower.push(lo);
        upper.push(hi);
    }
    Ok((lower, upper))
}

#[derive(Serialize, Deserialize)]
struct Versioned<T> {
    schema: String,
    #[serde(flatten)]
    body: T,
}

/// Pretty JSON with a leading `"schema"` key.
pub fn to_json<T: Serialize>(body: &T) -> Result<String> {
    let doc = Versioned {
        schema: SCHEMA.to_string(),
        body,
    };
    let mut s = serde_json::to_string_pretty(&doc).map_err(|e| parse_error(0, e.to_string()))?;
    s.push('\n');
    Ok(s)
}

/// Parses a document written by [`to_json`], rejecting other schemas.
pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let doc: Versioned<T> = serde_json::from_str(text).map_err(|e| parse_error(e.line(), e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(parse_error(1, format!("unsupported schema '{}'", doc.schema)));
    }
    Ok(doc.body)
}
