//! Plain-text inputs: numeric fixtures and `key=value` configuration files.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Content before a `#`, trimmed; `None` for blank or comment-only lines.
fn strip_comment(line: &str) -> Option<&str> {
    let body = line.split('#').next().unwrap_or("").trim();
    (!body.is_empty()).then_some(body)
}

/// Rows of whitespace-separated reals; `#` starts a comment, blank lines
/// are skipped, and every row must have the same length.
pub fn parse_numeric(text: &str, origin: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(body) = strip_comment(line) else {
            continue;
        };
        let parse_err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            message,
        };
        let row = body
            .split_whitespace()
            .map(|tok| match tok.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(format!("not a finite number: {tok:?}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(parse_err(format!(
                    "row has {} entries, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            path: origin.to_string(),
            line: 0,
            message: "no numeric rows".into(),
        });
    }
    Ok(rows)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let rows = parse_numeric(&read(path)?, &path.display().to_string())?;
    let (m, n) = (rows.len(), rows[0].len());
    Ok(DMatrix::from_row_iterator(m, n, rows.into_iter().flatten()))
}

/// A vector file: either one row or one column.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let rows = parse_numeric(&read(path)?, &path.display().to_string())?;
    if rows.len() == 1 || rows[0].len() == 1 {
        Ok(rows.into_iter().flatten().collect())
    } else {
        Err(Error::Parse {
            path: path.display().to_string(),
            line: 1,
            message: "expected a single row or a single column".into(),
        })
    }
}

/// `key=value` pairs, one per line, `#` comments. Keys are normalized to
/// use underscores.
pub fn parse_config(text: &str, origin: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let Some(body) = strip_comment(line) else {
            continue;
        };
        let (k, v) = body.split_once('=').ok_or_else(|| Error::Parse {
            path: origin.to_string(),
            line: i + 1,
            message: format!("expected key=value, got {body:?}"),
        })?;
        out.push((k.trim().replace('-', "_"), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> Result<Vec<(String, String)>> {
    parse_config(&read(path)?, &path.display().to_string())
}
