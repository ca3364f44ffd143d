use std::path::Path;

use autocopula_core::MonthKey;
use chrono::{Datelike, NaiveDate};
use sha2::{Digest, Sha256};

use crate::config::hex;
use crate::error::{CliError, CliResult};

/// Dated observations with strictly increasing dates and finite values.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSeries {
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
    /// SHA-256 of the source bytes.
    pub digest: String,
}

impl ObservationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.dates[0]
    }

    pub fn last_date(&self) -> NaiveDate {
        *self.dates.last().unwrap()
    }

    pub fn months(&self) -> Vec<MonthKey> {
        self.dates.iter().map(|&d| month_of(d)).collect()
    }

    pub fn by_month(&self) -> Vec<(MonthKey, f64)> {
        self.months()
            .into_iter()
            .zip(self.values.iter().copied())
            .collect()
    }
}

pub fn month_of(d: NaiveDate) -> MonthKey {
    MonthKey {
        year: d.year(),
        month: d.month(),
    }
}

/// Reads a CSV with a header row naming `date_column` (ISO-8601 dates) and
/// `value_column`. Lines starting with `#` are skipped. Errors name the
/// offending line.
pub fn ingest_csv(
    path: &Path,
    date_column: &str,
    value_column: &str,
) -> CliResult<ObservationSeries> {
    let bytes =
        std::fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    parse_csv(&bytes, date_column, value_column).map_err(|e| match e {
        CliError::Data(m) => CliError::Data(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_csv(
    bytes: &[u8],
    date_column: &str,
    value_column: &str,
) -> CliResult<ObservationSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("unreadable header: {e}")))?
        .clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::Data(format!(
                "missing column `{name}` (found: {})",
                headers.iter().collect::<Vec<_>>().join(", ")
            ))
        })
    };
    let (di, vi) = (col(date_column)?, col(value_column)?);

    let mut dates: Vec<NaiveDate> = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Data(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| {
            rec.get(i)
                .ok_or_else(|| CliError::Data(format!("line {line}: missing field")))
        };
        let ds = field(di)?;
        let d = NaiveDate::parse_from_str(ds, "%Y-%m-%d")
            .map_err(|e| CliError::Data(format!("line {line}: unparseable date `{ds}`: {e}")))?;
        let vs = field(vi)?;
        let v: f64 = vs
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| CliError::Data(format!("line {line}: unparseable value `{vs}`")))?;
        if let Some(&prev) = dates.last() {
            if d == prev {
                return Err(CliError::Data(format!("line {line}: duplicate date {d}")));
            }
            if d < prev {
                return Err(CliError::Data(format!(
                    "line {line}: date {d} is earlier than the previous row ({prev})"
                )));
            }
        }
        dates.push(d);
        values.push(v);
    }
    if values.is_empty() {
        return Err(CliError::Data("no observations".into()));
    }
    Ok(ObservationSeries {
        dates,
        values,
        digest: hex(&Sha256::digest(bytes)),
    })
}
