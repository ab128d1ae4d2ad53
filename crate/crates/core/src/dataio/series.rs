//! Dated observations in FRED export layout: a `DATE,VALUE` header (FRED
//! also writes `observation_date,<SERIES_ID>`), ISO dates, and `.` for
//! missing values.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    CurrencyBillions,
    /// Flows: currency billions per year.
    CurrencyBillionsPerYear,
    Months,
    Days,
    Percent,
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("io failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header {0:?}: expected DATE,VALUE")]
    MalformedHeader(String),
    #[error("line {0}: unparsable row")]
    UnparsableRow(usize),
    #[error("series has no observations")]
    EmptySeries,
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub unit: Unit,
    points: Vec<(NaiveDate, Decimal)>,
}

impl Series {
    /// Builds a series; dates must be strictly increasing.
    pub fn new(unit: Unit, points: Vec<(NaiveDate, Decimal)>) -> Result<Series, SeriesError> {
        if let Some(w) = points.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(SeriesError::DuplicateDate(w[1].0));
        }
        Ok(Series { unit, points })
    }

    pub fn points(&self) -> &[(NaiveDate, Decimal)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> impl Iterator<Item = Decimal> + '_ {
        self.points.iter().map(|(_, v)| *v)
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.points.first().map(|p| p.0)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.points.last().map(|p| p.0)
    }

    /// Median value; mean of the middle pair for even lengths.
    pub fn median(&self) -> Option<Decimal> {
        let mut v: Vec<Decimal> = self.values().collect();
        if v.is_empty() {
            return None;
        }
        v.sort();
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / Decimal::TWO
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesRead {
    pub series: Series,
    /// Rows skipped for a missing value.
    pub skipped: usize,
}

fn header_ok(line: &str) -> bool {
    let cols: Vec<&str> = line.split(',').map(str::trim).collect();
    cols.len() == 2
        && (cols[0].eq_ignore_ascii_case("date")
            || cols[0].eq_ignore_ascii_case("observation_date"))
        && !cols[1].is_empty()
}

/// Parses series text; rows are stable-sorted by date.
pub fn parse_series(text: &str, unit: Unit) -> Result<SeriesRead, SeriesError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .map(|(_, l)| l)
        .ok_or(SeriesError::EmptySeries)?;
    if !header_ok(header) {
        return Err(SeriesError::MalformedHeader(header.to_string()));
    }
    let mut points = Vec::new();
    let mut skipped = 0;
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (d, v) = line
            .split_once(',')
            .ok_or(SeriesError::UnparsableRow(line_no))?;
        let date = NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
            .map_err(|_| SeriesError::UnparsableRow(line_no))?;
        let v = v.trim();
        if v.is_empty() || v == "." {
            skipped += 1;
            continue;
        }
        let value = Decimal::from_str(v)
            .or_else(|_| Decimal::from_scientific(v))
            .map_err(|_| SeriesError::UnparsableRow(line_no))?;
        points.push((date, value));
    }
    if skipped > 0 {
        log::warn!("skipped {skipped} rows with missing values");
    }
    if points.is_empty() {
        return Err(SeriesError::EmptySeries);
    }
    points.sort_by_key(|p| p.0);
    Ok(SeriesRead {
        series: Series::new(unit, points)?,
        skipped,
    })
}

pub fn read_series(path: &Path, unit: Unit) -> Result<SeriesRead, SeriesError> {
    let text = fs::read_to_string(path).map_err(|source| SeriesError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_series(&text, unit)
}

/// `DATE,VALUE` rows with LF endings.
pub fn series_to_csv(series: &Series) -> String {
    let mut out = String::from("DATE,VALUE\n");
    for (d, v) in series.points() {
        out.push_str(&format!("{},{}\n", d.format("%Y-%m-%d"), v));
    }
    out
}

pub fn write_series(series: &Series, path: &Path) -> Result<(), SeriesError> {
    fs::write(path, series_to_csv(series)).map_err(|source| SeriesError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_rows_in_order() {
        let r = parse_series("DATE,VALUE\n2000-01-01,1.5\n2000-04-01,2\n", Unit::Months).unwrap();
        assert_eq!(r.series.len(), 2);
        assert_eq!(r.skipped, 0);
        assert_eq!(r.series.points()[1].1, Decimal::from(2));
    }

    #[test]
    fn missing_values_are_counted() {
        let r = parse_series(
            "observation_date,BUSLOANS\n2000-01-01,.\n2000-02-01,\n2000-03-01,10\n",
            Unit::CurrencyBillions,
        )
        .unwrap();
        assert_eq!(r.skipped, 2);
        assert_eq!(r.series.len(), 1);
    }

    #[test]
    fn out_of_order_is_sorted() {
        let r = parse_series("DATE,VALUE\n2001-01-01,3\n2000-01-01,1\n", Unit::Percent).unwrap();
        let dates: Vec<_> = r.series.points().iter().map(|p| p.0.to_string()).collect();
        assert_eq!(dates, ["2000-01-01", "2001-01-01"]);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_series("WHEN,VALUE\n", Unit::Percent),
            Err(SeriesError::MalformedHeader(_))
        ));
        assert!(matches!(
            parse_series("DATE,VALUE\n2000-01-01,1\nnot-a-date,2\n", Unit::Percent),
            Err(SeriesError::UnparsableRow(3))
        ));
        assert!(matches!(
            parse_series("DATE,VALUE\n2000-01-01,.\n", Unit::Percent),
            Err(SeriesError::EmptySeries)
        ));
        assert!(matches!(
            parse_series("DATE,VALUE\n2000-01-01,1\n2000-01-01,2\n", Unit::Percent),
            Err(SeriesError::DuplicateDate(_))
        ));
    }

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = Series::new(
            Unit::Months,
            vec![
                (
                    NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(),
                    Decimal::new(1758, 2),
                ),
                (
                    NaiveDate::from_ymd_opt(2000, 4, 1).unwrap(),
                    Decimal::new(-3, 1),
                ),
            ],
        )
        .unwrap();
        write_series(&s, &p).unwrap();
        assert_eq!(read_series(&p, Unit::Months).unwrap().series, s);
    }

    #[test]
    fn median_even_and_odd() {
        let d = |y| NaiveDate::from_ymd_opt(y, 1, 1).unwrap();
        let s = Series::new(
            Unit::Percent,
            vec![
                (d(2000), 3.into()),
                (d(2001), 1.into()),
                (d(2002), 2.into()),
            ],
        )
        .unwrap();
        assert_eq!(s.median(), Some(2.into()));
        let s = Series::new(
            Unit::Percent,
            vec![(d(2000), 3.into()), (d(2001), 1.into())],
        )
        .unwrap();
        assert_eq!(s.median(), Some(2.into()));
    }
}
