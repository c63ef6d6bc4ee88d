//! CSV ingestion of prices or returns.

use std::path::Path;

use msstgarch::ReturnSeries;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Prices,
    #[default]
    Returns,
}

const VALUE_NAMES: [&str; 6] = ["return", "returns", "price", "prices", "close", "value"];
const DATE_NAMES: [&str; 4] = ["date", "time", "timestamp", "t"];

fn find(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers
        .iter()
        .position(|h| names.iter().any(|n| h.trim().eq_ignore_ascii_case(n)))
}

/// Reads one value column (and an optional date column) from a CSV file
/// with a header row. In price mode the result is `100 ln(P_t / P_{t-1})`.
pub fn ingest(path: &Path, mode: Mode, column: Option<&str>) -> CliResult<ReturnSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::input(path, e))?;
    let headers = reader.headers().map_err(|e| CliError::input(path, e))?.clone();
    let value_col = match column {
        Some(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(format!("{}: no column named `{name}`", path.display())))?,
        None => match find(&headers, &VALUE_NAMES) {
            Some(i) => i,
            None => {
                let non_date: Vec<usize> = (0..headers.len())
                    .filter(|&i| !DATE_NAMES.iter().any(|n| headers[i].eq_ignore_ascii_case(n)))
                    .collect();
                match non_date.as_slice() {
                    [only] => *only,
                    _ => {
                        return Err(CliError::data(format!(
                            "{}: cannot pick a value column from {:?}; pass --column",
                            path.display(),
                            headers.iter().collect::<Vec<_>>()
                        )))
                    }
                }
            }
        },
    };
    let date_col = find(&headers, &DATE_NAMES).filter(|&i| i != value_col);

    let mut values = Vec::new();
    let mut dates = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(value_col).unwrap_or("");
        let v: f64 = raw.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| {
            CliError::data(format!(
                "{}: line {line}: cannot parse `{raw}` as a number",
                path.display()
            ))
        })?;
        if mode == Mode::Prices && v <= 0.0 {
            return Err(CliError::data(format!(
                "{}: line {line}: price {v} must be positive",
                path.display()
            )));
        }
        values.push(v);
        if let Some(c) = date_col {
            dates.push(record.get(c).unwrap_or("").to_string());
        }
    }
    if values.is_empty() {
        return Err(CliError::data(format!("{}: no data rows", path.display())));
    }

    let (values, dates) = match mode {
        Mode::Returns => (values, dates),
        Mode::Prices => {
            let r = values.windows(2).map(|w| 100.0 * (w[1] / w[0]).ln()).collect();
            (r, dates.into_iter().skip(1).collect())
        }
    };
    let series = if date_col.is_some() {
        ReturnSeries::with_timestamps(values, dates)
    } else {
        ReturnSeries::new(values)
    };
    series.map_err(CliError::from)
}
