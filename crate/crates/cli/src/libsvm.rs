//! LIBSVM text format: `label idx:value idx:value ...` with 1-based,
//! strictly increasing indices. Text after `#` is ignored.

use std::io::{BufRead, Write};

use svogs_core::data::RegressionData;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LibsvmError {
    #[error("input contains no data rows")]
    Empty,
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: index {index} does not increase (previous {previous})")]
    NonIncreasing { line: usize, index: usize, previous: usize },
    #[error("line {line}: index {index} exceeds dimension {dim}")]
    OutOfRange { line: usize, index: usize, dim: usize },
    #[error("reading input: {0}")]
    Io(#[from] std::io::Error),
    #[error("building dataset: {0}")]
    Data(#[from] svogs_core::Error),
}

/// One parsed line; `entries` keep the external 1-based indices.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseRow {
    pub label: f64,
    pub entries: Vec<(usize, f64)>,
}

fn malformed(line: usize, message: impl Into<String>) -> LibsvmError {
    LibsvmError::Malformed { line, message: message.into() }
}

/// Parses one line (comment already stripped); `None` for blank lines.
pub fn parse_line(text: &str, line: usize) -> Result<Option<SparseRow>, LibsvmError> {
    let mut tokens = text.split_whitespace();
    let Some(first) = tokens.next() else {
        return Ok(None);
    };
    let label: f64 = first.parse().map_err(|_| malformed(line, format!("label `{first}` is not a number")))?;
    let mut entries = Vec::new();
    let mut previous = 0usize;
    for tok in tokens {
        let (idx, val) = tok.split_once(':').ok_or_else(|| malformed(line, format!("token `{tok}` is not index:value")))?;
        let index: usize = idx.parse().map_err(|_| malformed(line, format!("index `{idx}` is not a positive integer")))?;
        if index == 0 {
            return Err(malformed(line, "indices are 1-based"));
        }
        let value: f64 = val.parse().map_err(|_| malformed(line, format!("value `{val}` is not a number")))?;
        if index <= previous {
            return Err(LibsvmError::NonIncreasing { line, index, previous });
        }
        previous = index;
        entries.push((index, value));
    }
    Ok(Some(SparseRow { label, entries }))
}

/// Reads a LIBSVM stream into dense rows. The dimension is the largest
/// observed index unless `dim` is given.
pub fn parse_libsvm<R: BufRead>(reader: R, dim: Option<usize>) -> Result<RegressionData, LibsvmError> {
    let mut rows = Vec::new();
    for (k, text) in reader.lines().enumerate() {
        let text = text?;
        let body = text.split('#').next().unwrap_or("");
        if let Some(row) = parse_line(body, k + 1)? {
            rows.push((k + 1, row));
        }
    }
    if rows.is_empty() {
        return Err(LibsvmError::Empty);
    }
    let observed = rows.iter().filter_map(|(_, r)| r.entries.last().map(|e| e.0)).max().unwrap_or(0);
    let d = match dim {
        Some(d) => {
            if let Some((line, r)) = rows.iter().find(|(_, r)| r.entries.last().is_some_and(|e| e.0 > d)) {
                return Err(LibsvmError::OutOfRange { line: *line, index: r.entries.last().unwrap().0, dim: d });
            }
            d
        }
        None => observed,
    };
    if d == 0 {
        return Err(malformed(rows[0].0, "no feature indices in input"));
    }
    let mut features = vec![0.0; rows.len() * d];
    let mut labels = Vec::with_capacity(rows.len());
    for (j, (_, r)) in rows.iter().enumerate() {
        for &(idx, v) in &r.entries {
            features[j * d + idx - 1] = v;
        }
        labels.push(r.label);
    }
    Ok(RegressionData::new(features, labels, d)?)
}

/// Writes nonzero entries with shortest round-trip formatting.
pub fn write_libsvm<W: Write>(data: &RegressionData, mut out: W) -> std::io::Result<()> {
    for j in 0..data.n_rows() {
        write!(out, "{}", data.label(j))?;
        for (c, v) in data.row(j).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{}", c + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n\n1 1:2 # trailing\n-1 2:3\n";
        let d = parse_libsvm(text.as_bytes(), None).unwrap();
        assert_eq!(d.n_rows(), 2);
        assert_eq!(d.row(0), &[2.0, 0.0]);
        assert_eq!(d.labels(), &[1.0, -1.0]);
    }

    #[test]
    fn zero_index_rejected() {
        let err = parse_libsvm("1 0:1\n".as_bytes(), None).unwrap_err();
        assert!(err.to_string().contains("line 1"));
    }
}
