//! Calibration grids: solve the required rate for every (period, parameter
//! cell) pair and compare with the published rates.
//!
//! Cells are independent and run in parallel; periods inside a cell are
//! chained because each period starts from the previous period's capital.

use serde::{Deserialize, Serialize};

pub use super::models::CalibrationTarget;
use super::models::{
    model1_growth, model1_multiple, model2_required_rate, model2_run, model3_required_rate,
    model3_run,
};
use super::MediciError;
use crate::dataio::{Cell, Column, ColumnKind, TableDocument};
use crate::par::{self, Exec};

/// Cells whose solved rate is further than this from the published rate,
/// in percent of the published rate, are flagged.
pub const FLAG_THRESHOLD_PCT: f64 = 5.0;

pub const FOUNDING_CAPITAL: f64 = 8000.0;

/// The three reporting periods. The first period's founding year is
/// reported separately (F1,200), so its profit grows capital but is not
/// counted against the period total.
pub fn canonical_targets() -> Vec<CalibrationTarget> {
    let mut first = CalibrationTarget::new("1397-1420", 1397, 1420, FOUNDING_CAPITAL, 152_820.0);
    first.uncounted_years = 1;
    vec![
        first,
        CalibrationTarget::new("1420-1435", 1420, 1435, FOUNDING_CAPITAL, 186_382.0),
        CalibrationTarget::new("1435-1450", 1435, 1450, FOUNDING_CAPITAL, 290_791.0),
    ]
}

/// Published model 2 rates (percent) by retention of profit.
const MODEL2_REPORTED: [(f64, [f64; 3]); 3] = [
    (0.025, [72.66, 91.13, 99.82]),
    (0.05, [63.90, 64.85, 63.09]),
    (0.10, [51.11, 40.69, 36.11]),
];

/// Published model 3 rates (percent) by retention of capital and deposit
/// multiple, depositor share one half.
const MODEL3_REPORTED: [(f64, f64, [f64; 3]); 9] = [
    (0.025, 1.0, [45.62, 53.04, 55.72]),
    (0.025, 3.0, [27.19, 31.61, 33.21]),
    (0.025, 7.0, [12.35, 14.35, 15.08]),
    (0.05, 1.0, [46.25, 53.50, 55.72]),
    (0.05, 3.0, [27.37, 31.66, 32.98]),
    (0.05, 7.0, [12.42, 14.37, 14.96]),
    (0.10, 1.0, [39.68, 36.29, 33.79]),
    (0.10, 3.0, [23.14, 21.17, 19.71]),
    (0.10, 7.0, [10.48, 9.59, 8.93]),
];

pub const REPORTED_SHARE: f64 = 0.5;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-9
}

fn reported_model2(f: f64) -> Option<[f64; 3]> {
    MODEL2_REPORTED
        .iter()
        .find(|(rf, _)| close(*rf, f))
        .map(|(_, v)| *v)
}

fn reported_model3(f: f64, k: f64, share: f64) -> Option<[f64; 3]> {
    if !close(share, REPORTED_SHARE) {
        return None;
    }
    MODEL3_REPORTED
        .iter()
        .find(|(rf, rk, _)| close(*rf, f) && close(*rk, k))
        .map(|(_, _, v)| *v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub label: String,
    pub retention: f64,
    pub deposit_multiple: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub period_label: String,
    /// Solved annual rates as fractions, one per cell.
    pub rates: Vec<f64>,
    /// Published rates as fractions, where known.
    pub reported: Vec<Option<f64>>,
    pub residual_pct: Vec<Option<f64>>,
    pub flagged: Vec<bool>,
    pub end_capital: Vec<f64>,
}

impl GridRow {
    /// Largest residual by magnitude, sign kept.
    pub fn worst_residual(&self) -> Option<f64> {
        self.residual_pct
            .iter()
            .flatten()
            .copied()
            .fold(None, |acc: Option<f64>, x| match acc {
                Some(a) if a.abs() >= x.abs() => Some(a),
                _ => Some(x),
            })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationGrid {
    pub model: u8,
    pub depositor_share: Option<f64>,
    pub cells: Vec<GridCell>,
    pub rows: Vec<GridRow>,
}

impl CalibrationGrid {
    pub fn rate(&self, row: usize, cell: usize) -> f64 {
        self.rows[row].rates[cell]
    }

    pub fn cell_index(&self, retention: f64, deposit_multiple: Option<f64>) -> Option<usize> {
        self.cells.iter().position(|c| {
            close(c.retention, retention)
                && match (c.deposit_multiple, deposit_multiple) {
                    (Some(a), Some(b)) => close(a, b),
                    (None, None) => true,
                    _ => false,
                }
        })
    }

    /// Labels of cells flagged in any period.
    pub fn flagged_cells(&self) -> Vec<&str> {
        self.cells
            .iter()
            .enumerate()
            .filter(|(i, _)| self.rows.iter().any(|r| r.flagged[*i]))
            .map(|(_, c)| c.label.as_str())
            .collect()
    }

    /// Rows are periods. Rates and residuals are in percent.
    pub fn table(&self, name: &str) -> TableDocument {
        let mut columns = vec![Column::new("period", ColumnKind::Text)];
        for c in &self.cells {
            columns.push(Column::new(
                &format!("rate_pct_{}", c.label),
                ColumnKind::Decimal(2),
            ));
        }
        for c in &self.cells {
            columns.push(Column::new(
                &format!("residual_pct_{}", c.label),
                ColumnKind::Decimal(2),
            ));
        }
        columns.push(Column::new("residual_pct", ColumnKind::Decimal(2)));
        columns.push(Column::new("flag", ColumnKind::Text));
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![Cell::Text(r.period_label.clone())];
                row.extend(r.rates.iter().map(|x| Cell::float(x * 100.0)));
                row.extend(
                    r.residual_pct
                        .iter()
                        .map(|x| x.map(Cell::float).unwrap_or(Cell::Text(String::new()))),
                );
                row.push(
                    r.worst_residual()
                        .map(Cell::float)
                        .unwrap_or(Cell::Text(String::new())),
                );
                let flags: Vec<&str> = self
                    .cells
                    .iter()
                    .zip(&r.flagged)
                    .filter(|(_, f)| **f)
                    .map(|(c, _)| c.label.as_str())
                    .collect();
                row.push(Cell::Text(flags.join(";")));
                row
            })
            .collect();
        TableDocument {
            name: name.to_string(),
            columns,
            rows,
        }
    }
}

fn residual(solved: f64, reported: Option<f64>) -> (Option<f64>, bool) {
    match reported {
        Some(p) => {
            let res = (solved - p) / p * 100.0;
            (Some(res), res.abs() > FLAG_THRESHOLD_PCT)
        }
        None => (None, false),
    }
}

struct CellRun {
    rates: Vec<f64>,
    end_capital: Vec<f64>,
}

/// Solves each period in turn, feeding the period's end capital forward.
fn chain<S, E>(targets: &[CalibrationTarget], solve: S, end: E) -> Result<CellRun, MediciError>
where
    S: Fn(&CalibrationTarget, f64) -> Result<f64, MediciError>,
    E: Fn(&CalibrationTarget, f64, f64) -> Result<f64, MediciError>,
{
    let mut capital = targets
        .first()
        .map(|t| t.starting_capital)
        .unwrap_or(FOUNDING_CAPITAL);
    let mut rates = Vec::with_capacity(targets.len());
    let mut ends = Vec::with_capacity(targets.len());
    for t in targets {
        let r = solve(t, capital)?;
        capital = end(t, capital, r)?;
        rates.push(r);
        ends.push(capital);
    }
    Ok(CellRun {
        rates,
        end_capital: ends,
    })
}

fn assemble(
    model: u8,
    share: Option<f64>,
    targets: &[CalibrationTarget],
    cells: Vec<GridCell>,
    runs: Vec<Result<CellRun, MediciError>>,
    reported: impl Fn(&GridCell) -> Option<[f64; 3]>,
) -> Result<CalibrationGrid, MediciError> {
    let runs: Vec<CellRun> = runs.into_iter().collect::<Result<_, _>>()?;
    let canonical = targets.len() == 3;
    let rows = targets
        .iter()
        .enumerate()
        .map(|(p, t)| {
            let mut row = GridRow {
                period_label: t.period_label.clone(),
                rates: Vec::new(),
                reported: Vec::new(),
                residual_pct: Vec::new(),
                flagged: Vec::new(),
                end_capital: Vec::new(),
            };
            for (cell, run) in cells.iter().zip(&runs) {
                let rep = canonical
                    .then(|| reported(cell))
                    .flatten()
                    .map(|v| v[p] / 100.0);
                let (res, flag) = residual(run.rates[p], rep);
                row.rates.push(run.rates[p]);
                row.reported.push(rep);
                row.residual_pct.push(res);
                row.flagged.push(flag);
                row.end_capital.push(run.end_capital[p]);
            }
            row
        })
        .collect();
    Ok(CalibrationGrid {
        model,
        depositor_share: share,
        cells,
        rows,
    })
}

/// Model 2 grid: one cell per retention-of-profit fraction.
pub fn calibrate_model2(
    targets: &[CalibrationTarget],
    retentions: &[f64],
    exec: Exec,
) -> Result<CalibrationGrid, MediciError> {
    let cells: Vec<GridCell> = retentions
        .iter()
        .map(|&f| GridCell {
            label: format!("f{f}"),
            retention: f,
            deposit_multiple: None,
        })
        .collect();
    let runs = par::map(exec, &cells, |c| {
        let f = c.retention;
        chain(
            targets,
            |t, cap| model2_required_rate(t, f, cap),
            |t, cap, r| Ok(model2_run(cap, t.years, 0, f, r)?.end_capital),
        )
    });
    assemble(2, None, targets, cells, runs, |c| {
        reported_model2(c.retention)
    })
}

/// Model 3 grid: the cross product of retentions and deposit multiples.
pub fn calibrate_model3(
    targets: &[CalibrationTarget],
    retentions: &[f64],
    multiples: &[f64],
    share: f64,
    exec: Exec,
) -> Result<CalibrationGrid, MediciError> {
    let cells: Vec<GridCell> = retentions
        .iter()
        .flat_map(|&f| {
            multiples.iter().map(move |&k| GridCell {
                label: format!("f{f}_k{k}"),
                retention: f,
                deposit_multiple: Some(k),
            })
        })
        .collect();
    let runs = par::map(exec, &cells, |c| {
        let (f, k) = (c.retention, c.deposit_multiple.unwrap_or(0.0));
        chain(
            targets,
            |t, cap| model3_required_rate(t, f, k, share, cap),
            |t, cap, r| Ok(model3_run(cap, t.years, 0, f, k, share, r)?.end_capital),
        )
    });
    assemble(3, Some(share), targets, cells, runs, |c| {
        reported_model3(c.retention, c.deposit_multiple.unwrap_or(0.0), share)
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model1Row {
    pub year: i32,
    pub capital: f64,
    pub earnings: f64,
    pub years: f64,
    pub multiple: f64,
    pub growth: f64,
    pub reported_growth: f64,
    pub residual_pct: f64,
}

/// The four notices with earnings: founding year plus six months, then
/// the three reporting periods.
pub fn calibrate_model1() -> Result<Vec<Model1Row>, MediciError> {
    let rows = [
        (1398, 1200.0, 1.5, 1.097653),
        (1420, 152_820.0, 23.0, 1.139365),
        (1435, 186_382.0, 15.0, 1.237004),
        (1450, 290_791.0, 15.0, 1.272971),
    ];
    rows.iter()
        .map(|&(year, earnings, years, reported)| {
            let growth = model1_growth(FOUNDING_CAPITAL, earnings, years)?;
            Ok(Model1Row {
                year,
                capital: FOUNDING_CAPITAL,
                earnings,
                years,
                multiple: model1_multiple(FOUNDING_CAPITAL, earnings)?,
                growth,
                reported_growth: reported,
                residual_pct: (growth - reported) / reported * 100.0,
            })
        })
        .collect()
}

pub fn model1_table(rows: &[Model1Row], name: &str) -> TableDocument {
    let columns = vec![
        Column::new("year", ColumnKind::Integer),
        Column::new("capital", ColumnKind::Decimal(0)),
        Column::new("earnings", ColumnKind::Decimal(0)),
        Column::new("years", ColumnKind::Decimal(1)),
        Column::new("multiple", ColumnKind::Decimal(5)),
        Column::new("growth", ColumnKind::Decimal(6)),
        Column::new("reported_growth", ColumnKind::Decimal(6)),
        Column::new("residual_pct", ColumnKind::Decimal(4)),
    ];
    let rows = rows
        .iter()
        .map(|r| {
            vec![
                Cell::Integer(r.year.into()),
                Cell::float(r.capital),
                Cell::float(r.earnings),
                Cell::float(r.years),
                Cell::float(r.multiple),
                Cell::float(r.growth),
                Cell::float(r.reported_growth),
                Cell::float(r.residual_pct),
            ]
        })
        .collect();
    TableDocument {
        name: name.to_string(),
        columns,
        rows,
    }
}
