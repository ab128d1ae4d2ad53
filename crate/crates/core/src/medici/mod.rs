//! Fifteenth-century bank calibration: loan dataset statistics, the three
//! earnings models and their rate solvers, and a seeded reconstruction of
//! the 53-loan sample from its published summaries.
//!
//! Amounts here are florins held as `f64`; these are estimates fitted to
//! rounded published figures, not bookkeeping.

use thiserror::Error;

pub mod calibrate;
pub mod dataset;
pub mod models;
pub mod reconstruct;

pub use calibrate::{
    calibrate_model1, calibrate_model2, calibrate_model3, canonical_targets, model1_table,
    CalibrationGrid, CalibrationTarget, GridCell, GridRow, Model1Row, FLAG_THRESHOLD_PCT,
    FOUNDING_CAPITAL, REPORTED_SHARE,
};
pub use dataset::{
    dataset_to_csv, duration_buckets, effective_yield, mean_rate, monthly_coincidence,
    parse_dataset, read_dataset, seasonality, summarize, transaction_yield, utilization,
    write_dataset, DatasetSummary, LoanDataset, LoanRecord, Season, Seasonality, BUCKET_BOUNDS,
};
pub use models::{
    model1_growth, model1_multiple, model2_distributions, model2_required_rate, model2_run,
    model3_distributions, model3_required_rate, model3_run, ModelRun, RATE_BRACKET,
};
pub use reconstruct::{reconstruct_dataset, Constraints, Reconstruction};

#[derive(Debug, Error)]
pub enum MediciError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("loan {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("all monthly counts are zero")]
    AllZero,
    #[error("capital must be positive, got {0}")]
    NonPositiveCapital(f64),
    #[error("years must be positive, got {0}")]
    NonPositiveYears(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no rate in [{lo}, {hi}] reaches the target {target}")]
    NoBracket { lo: f64, hi: f64, target: f64 },
    #[error("unsatisfiable: {constraint} ({detail})")]
    Unsatisfiable { constraint: String, detail: String },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
