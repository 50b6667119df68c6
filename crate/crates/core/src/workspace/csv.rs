//! Headerless comma-separated numeric matrices, one series per line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::series::SeriesMatrix;

fn format_err(line: usize, column: Option<usize>, message: impl Into<String>) -> Error {
    Error::Format {
        path: None,
        line,
        column,
        message: message.into(),
    }
}

/// Parses a numeric matrix. Lines and columns in errors are 1-based.
pub fn parse_matrix(text: &str) -> Result<SeriesMatrix> {
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    let mut data = Vec::new();

    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(Error::InvalidInput("file contains no rows".into()));
    }
    for (idx, raw) in body.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.is_empty() {
            return Err(format_err(line_no, None, "empty row"));
        }
        let start = data.len();
        for (col, token) in line.split(',').enumerate() {
            let token = token.trim();
            let value: f64 = token.parse().map_err(|_| {
                format_err(line_no, Some(col + 1), format!("'{token}' is not a number"))
            })?;
            if !value.is_finite() {
                return Err(format_err(
                    line_no,
                    Some(col + 1),
                    format!("'{token}' is not a finite number"),
                ));
            }
            data.push(value);
        }
        let n = data.len() - start;
        match width {
            None => width = Some(n),
            Some(w) if w != n => {
                return Err(format_err(
                    line_no,
                    None,
                    format!("row has {n} values, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }

    let Some(width) = width else {
        return Err(Error::InvalidInput("file contains no rows".into()));
    };
    SeriesMatrix::new(rows, width, data)
}

/// Round-trip-safe rendering: 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn format_matrix(m: &SeriesMatrix) -> String {
    let mut out = String::with_capacity(m.as_slice().len() * 24);
    for row in m.iter_rows() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "{v:.16e}");
        }
        out.push('\n');
    }
    out
}
