//! CSV ingestion and export of series sets.
//!
//! Layout: a header row with one name per series, then one row per time
//! index, one column per series, `.` as decimal separator.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::SeriesSet;

fn parse_error(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => parse_error(line, format!("expected {expected_len} fields, found {len}")),
        csv::ErrorKind::Utf8 { err, .. } => parse_error(line, format!("invalid UTF-8: {err}")),
        other => parse_error(line, format!("{other:?}")),
    }
}

/// Reads a series set from CSV text.
pub fn read_series_csv<R: Read>(reader: R) -> Result<SeriesSet> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(|n| n.is_empty()) {
        return Err(parse_error(1, "missing header row"));
    }
    if let Some(pos) = names.iter().position(|n| n.is_empty()) {
        return Err(parse_error(1, format!("column {} has an empty name", pos + 1)));
    }
    let mut series = vec![Vec::new(); names.len()];
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        for (i, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_error(line, format!("'{field}' in column '{}' is not a number", names[i])))?;
            if !v.is_finite() {
                return Err(parse_error(line, format!("non-finite value in column '{}'", names[i])));
            }
            series[i].push(v);
        }
    }
    if series[0].is_empty() {
        return Err(parse_error(2, "no data rows"));
    }
    SeriesSet::new(names, series)
}

/// Writes a series set as CSV; values use the shortest representation that
/// reads back exactly.
pub fn write_series_csv<W: Write>(s: &SeriesSet, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(s.names()).map_err(csv_error)?;
    let mut row = Vec::with_capacity(s.count());
    for t in 0..s.len() {
        row.clear();
        row.extend((0..s.count()).map(|i| s.series(i)[t].to_string()));
        wtr.write_record(&row).map_err(csv_error)?;
    }
    wtr.flush()?;
    Ok(())
}
