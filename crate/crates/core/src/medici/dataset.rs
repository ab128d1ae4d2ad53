//! Loan records and the summary statistics computed over them.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::MediciError;

/// Shortest and longest loan the dataset admits, in days.
pub const DURATION_RANGE: (i64, i64) = (30, 200);

/// Upper bounds (inclusive) of the ~60 and ~95 day buckets; longer loans
/// land in the ~120 day bucket.
pub const BUCKET_BOUNDS: [i64; 2] = [77, 107];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoanRecord {
    pub id: String,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    /// Annual rate as a fraction (0.15 = 15%).
    pub nominal_annual_rate: f64,
}

impl LoanRecord {
    pub fn new(
        id: impl Into<String>,
        start_date: NaiveDate,
        end_date: NaiveDate,
        nominal_annual_rate: f64,
    ) -> Result<Self, MediciError> {
        let r = LoanRecord {
            id: id.into(),
            start_date,
            end_date,
            nominal_annual_rate,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), MediciError> {
        let bad = |reason: String| MediciError::InvalidRecord {
            id: self.id.clone(),
            reason,
        };
        let d = self.duration_days();
        if d < DURATION_RANGE.0 || d > DURATION_RANGE.1 {
            return Err(bad(format!(
                "duration {d} days outside {}..={}",
                DURATION_RANGE.0, DURATION_RANGE.1
            )));
        }
        if !self.nominal_annual_rate.is_finite() || self.nominal_annual_rate < 0.0 {
            return Err(bad(format!("rate {}", self.nominal_annual_rate)));
        }
        Ok(())
    }

    pub fn duration_days(&self) -> i64 {
        (self.end_date - self.start_date).num_days()
    }

    /// 0, 1 or 2 for the ~60, ~95 and ~120 day classes.
    pub fn bucket(&self) -> usize {
        bucket_of(self.duration_days())
    }

    /// Calendar months (0 = January) during which the loan is outstanding.
    pub fn month_mask(&self) -> u16 {
        month_mask(self.start_date, self.end_date)
    }
}

pub(crate) fn bucket_of(days: i64) -> usize {
    BUCKET_BOUNDS.iter().take_while(|&&b| days > b).count()
}

pub(crate) fn month_mask(start: NaiveDate, end: NaiveDate) -> u16 {
    let mut mask = 0u16;
    let (mut y, mut m) = (start.year(), start.month0());
    let (ey, em) = (end.year(), end.month0());
    while (y, m) <= (ey, em) {
        mask |= 1 << m;
        if m == 11 {
            y += 1;
            m = 0;
        } else {
            m += 1;
        }
        if mask == 0x0fff {
            break;
        }
    }
    mask
}

/// Simple interest earned over the loan's life, day count 360.
pub fn transaction_yield(rec: &LoanRecord) -> f64 {
    rec.nominal_annual_rate * rec.duration_days() as f64 / 360.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Season {
    Winter,
    Spring,
    Summer,
    Fall,
}

impl Season {
    pub const ALL: [Season; 4] = [Season::Winter, Season::Spring, Season::Summer, Season::Fall];

    pub fn of(d: NaiveDate) -> Season {
        Self::ALL[season_index(d.month0())]
    }
}

/// Dec-Feb winter, then three-month seasons.
pub(crate) fn season_index(month0: u32) -> usize {
    (((month0 + 1) % 12) / 3) as usize
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seasonality {
    /// Indexed winter, spring, summer, fall.
    pub starts: [usize; 4],
    pub ends: [usize; 4],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoanDataset {
    pub records: Vec<LoanRecord>,
}

impl LoanDataset {
    pub fn new(records: Vec<LoanRecord>) -> Result<Self, MediciError> {
        for r in &records {
            r.validate()?;
        }
        Ok(LoanDataset { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    fn non_empty(&self) -> Result<&[LoanRecord], MediciError> {
        if self.records.is_empty() {
            Err(MediciError::EmptyDataset)
        } else {
            Ok(&self.records)
        }
    }
}

pub fn duration_buckets(ds: &LoanDataset) -> Result<[usize; 3], MediciError> {
    let mut out = [0; 3];
    for r in ds.non_empty()? {
        out[r.bucket()] += 1;
    }
    Ok(out)
}

pub fn seasonality(ds: &LoanDataset) -> Result<Seasonality, MediciError> {
    let mut s = Seasonality::default();
    for r in ds.non_empty()? {
        s.starts[season_index(r.start_date.month0())] += 1;
        s.ends[season_index(r.end_date.month0())] += 1;
    }
    Ok(s)
}

/// Loans outstanding in each calendar month, all years folded onto one.
pub fn monthly_coincidence(ds: &LoanDataset) -> Result<[u32; 12], MediciError> {
    let mut out = [0; 12];
    for r in ds.non_empty()? {
        let mask = r.month_mask();
        for (m, c) in out.iter_mut().enumerate() {
            *c += u32::from(mask >> m & 1);
        }
    }
    Ok(out)
}

/// Mean of each month's count over the busiest month's count.
pub fn utilization(counts: &[u32; 12]) -> Result<f64, MediciError> {
    let max = *counts.iter().max().unwrap();
    if max == 0 {
        return Err(MediciError::AllZero);
    }
    let total: u32 = counts.iter().sum();
    Ok(f64::from(total) / (12.0 * f64::from(max)))
}

pub fn effective_yield(utilization: f64, mean_rate: f64) -> f64 {
    utilization * mean_rate
}

pub fn mean_rate(ds: &LoanDataset) -> Result<f64, MediciError> {
    let rs = ds.non_empty()?;
    Ok(rs.iter().map(|r| r.nominal_annual_rate).sum::<f64>() / rs.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub loans: usize,
    pub bucket_counts: [usize; 3],
    pub seasonality: Seasonality,
    pub monthly_coincidence: [u32; 12],
    pub mean_nominal_rate: f64,
    pub utilization: f64,
    pub effective_yield: f64,
}

pub fn summarize(ds: &LoanDataset) -> Result<DatasetSummary, MediciError> {
    let counts = monthly_coincidence(ds)?;
    let u = utilization(&counts)?;
    let mean = mean_rate(ds)?;
    Ok(DatasetSummary {
        loans: ds.len(),
        bucket_counts: duration_buckets(ds)?,
        seasonality: seasonality(ds)?,
        monthly_coincidence: counts,
        mean_nominal_rate: mean,
        utilization: u,
        effective_yield: effective_yield(u, mean),
    })
}

pub const DATASET_HEADER: [&str; 4] = ["id", "start_date", "end_date", "nominal_annual_rate_pct"];

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    start_date: NaiveDate,
    end_date: NaiveDate,
    nominal_annual_rate_pct: f64,
}

pub fn parse_dataset<R: Read>(input: R) -> Result<LoanDataset, MediciError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != DATASET_HEADER {
        return Err(MediciError::Parse {
            line: 1,
            reason: format!("expected header {}", DATASET_HEADER.join(",")),
        });
    }
    let mut records = Vec::new();
    for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
        let raw = row.map_err(|e| MediciError::Parse {
            line: i + 2,
            reason: e.to_string(),
        })?;
        records.push(LoanRecord::new(
            raw.id,
            raw.start_date,
            raw.end_date,
            raw.nominal_annual_rate_pct / 100.0,
        )?);
    }
    Ok(LoanDataset { records })
}

pub fn read_dataset(path: &Path) -> Result<LoanDataset, MediciError> {
    parse_dataset(std::fs::File::open(path)?)
}

/// Rates are written in percent with two decimals.
pub fn dataset_to_csv(ds: &LoanDataset) -> Result<String, MediciError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(DATASET_HEADER)?;
    for r in &ds.records {
        w.write_record([
            r.id.clone(),
            r.start_date.to_string(),
            r.end_date.to_string(),
            format!("{:.2}", r.nominal_annual_rate * 100.0),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_dataset(path: &Path, ds: &LoanDataset) -> Result<(), MediciError> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(dataset_to_csv(ds)?.as_bytes())?;
    Ok(())
}
