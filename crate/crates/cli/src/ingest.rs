//! CSV readers. Errors name the file and the 1-based line.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// A header row plus numeric rows.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn data_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: line {line}: {msg}", path.display()))
}

fn read_text(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    String::from_utf8(bytes).map_err(|e| CliError::Data(format!("{}: not valid UTF-8: {e}", path.display())))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn records(path: &Path, text: &str) -> CliResult<Vec<(u64, csv::StringRecord)>> {
    let mut out = Vec::new();
    for rec in reader(text).records() {
        let rec = rec.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { pos, expected_len, len } => data_err(
                path,
                pos.as_ref().map_or(0, |p| p.line()),
                format!("expected {expected_len} fields, found {len}"),
            ),
            _ => CliError::Data(format!("{}: {e}", path.display())),
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(0, |p| p.line());
        out.push((line, rec));
    }
    Ok(out)
}

fn parse_number(path: &Path, line: u64, column: &str, cell: &str) -> CliResult<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(data_err(path, line, format!("column '{column}': '{cell}' is not a finite number"))),
    }
}

/// Header of column names followed by at least one row of finite numbers.
pub fn numeric_table(path: &Path) -> CliResult<NumericTable> {
    let text = read_text(path)?;
    let recs = records(path, &text)?;
    let Some(((_, header), body)) = recs.split_first() else {
        return Err(CliError::Data(format!("{}: empty file", path.display())));
    };
    let columns: Vec<String> = header.iter().map(str::to_string).collect();
    for (k, c) in columns.iter().enumerate() {
        if c.is_empty() {
            return Err(data_err(path, 1, format!("column {} has an empty name", k + 1)));
        }
        if columns[..k].contains(c) {
            return Err(data_err(path, 1, format!("duplicate column '{c}'")));
        }
    }
    if body.is_empty() {
        return Err(CliError::Data(format!("{}: header but no data rows", path.display())));
    }
    let rows = body
        .iter()
        .map(|(line, rec)| {
            rec.iter()
                .zip(&columns)
                .map(|(cell, col)| parse_number(path, *line, col, cell))
                .collect()
        })
        .collect::<CliResult<_>>()?;
    Ok(NumericTable { columns, rows })
}

/// `(from, to, rate)` rows. A leading `from,to,rate` header is optional.
pub fn rate_table(path: &Path) -> CliResult<Vec<(String, String, f64)>> {
    let text = read_text(path)?;
    let recs = records(path, &text)?;
    let mut body = recs.as_slice();
    if let Some((_, first)) = body.first() {
        let lower: Vec<String> = first.iter().map(|f| f.to_ascii_lowercase()).collect();
        if lower == ["from", "to", "rate"] {
            body = &body[1..];
        }
    }
    if body.is_empty() {
        return Err(CliError::Data(format!("{}: no rate rows", path.display())));
    }
    let mut out = Vec::with_capacity(body.len());
    for (line, rec) in body {
        if rec.len() != 3 {
            return Err(data_err(path, *line, format!("expected from,to,rate, found {} fields", rec.len())));
        }
        let (from, to) = (&rec[0], &rec[1]);
        if from.is_empty() || to.is_empty() {
            return Err(data_err(path, *line, "empty asset name"));
        }
        let rate = parse_number(path, *line, "rate", &rec[2])?;
        if rate <= 0.0 {
            return Err(data_err(path, *line, format!("rate {from}->{to} must be positive, got {}", &rec[2])));
        }
        out.push((from.to_string(), to.to_string(), rate));
    }
    Ok(out)
}
