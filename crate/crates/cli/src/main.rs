//! `circuitforge {ledger|medici|policy|venture} <subcommand> [flags]`
//!
//! Exit codes: 0 success, 1 environment or IO failure, 2 validation or
//! usage error. Every run that writes to `--out` also writes a manifest
//! recording the subcommand, resolved configuration, seed, tool version and
//! SHA-256 digests of inputs and outputs.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rust_decimal::prelude::ToPrimitive;
use rust_decimal::Decimal;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use circuitforge::dataio::{
    render_chart, series_to_csv, table_to_csv, Cell, ChartError, ChartKind, ChartSpec, Column,
    ColumnKind, Series, SeriesError, TableDocument, TableError, Unit,
};
use circuitforge::ledger::{run_scenario, Scenario, ScenarioError};
use circuitforge::medici::{
    calibrate_model1, calibrate_model2, calibrate_model3, canonical_targets, dataset_to_csv,
    model1_table, parse_dataset, reconstruct_dataset, summarize, CalibrationGrid, Constraints,
    DatasetSummary, MediciError, Season, REPORTED_SHARE,
};
use circuitforge::par::Exec;
use circuitforge::policy::{
    allocate_principal, normalize_principal_flow, run_policy_scenario, run_venture_portfolio,
    uplift_pct, AllocationConfig, PolicyError, PolicyScenario, VenturePortfolio,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(
    name = "circuitforge",
    version,
    about = "Monetary-circuit simulation toolkit"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    group: Group,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Output directory, or a single `.csv`/`.svg` file. Stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized steps; always echoed to stderr.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// More log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Svg,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Double-entry scenario replay.
    #[command(subcommand)]
    Ledger(LedgerCmd),
    /// Loan-book statistics, reconstruction and earnings calibration.
    #[command(subcommand)]
    Medici(MediciCmd),
    /// Principal-flow series and allocation scenarios.
    #[command(subcommand)]
    Policy(PolicyCmd),
    /// At-risk venture portfolios.
    #[command(subcommand)]
    Venture(VentureCmd),
}

#[derive(Subcommand, Debug)]
enum LedgerCmd {
    /// Replays a scenario and emits balances after every step.
    Replay { scenario: PathBuf },
}

#[derive(Subcommand, Debug)]
enum MediciCmd {
    /// Summary statistics of a loan dataset.
    Stats { loans: PathBuf },
    /// Seeded dataset matching the published summaries.
    Reconstruct {
        /// Constraint JSON; the 53-loan sample when absent.
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Rates required by each model to meet reported earnings.
    Calibrate {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        model: u8,
        /// Retention fractions, comma separated.
        #[arg(long, value_delimiter = ',')]
        retention: Vec<f64>,
        /// Deposit multiples of capital (model 3), comma separated.
        #[arg(long, value_delimiter = ',')]
        deposits: Vec<f64>,
        /// Share of deposit-funded interest paid to depositors (model 3).
        #[arg(long, default_value_t = REPORTED_SHARE)]
        share: f64,
    },
}

#[derive(Subcommand, Debug)]
enum PolicyCmd {
    /// Annual principal flow from a loan stock and its average maturity.
    Normalize {
        #[arg(long)]
        stock: PathBuf,
        #[arg(long)]
        maturity: PathBuf,
        #[arg(long, value_enum, default_value_t = MaturityUnit::Months)]
        maturity_unit: MaturityUnit,
    },
    /// Splits a principal-flow series among recipients.
    Allocate {
        #[arg(long)]
        flow: PathBuf,
        /// Allocation JSON; half to local and state, half federal when absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Receipts as a percentage of tax revenue.
    Uplift {
        #[arg(long)]
        receipts: Decimal,
        #[arg(long)]
        tax: Decimal,
    },
    /// Period-by-period allocation scenario on the ledger.
    Run {
        #[arg(long)]
        scenario: PathBuf,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum MaturityUnit {
    Months,
    Days,
}

#[derive(Subcommand, Debug)]
enum VentureCmd {
    Run {
        #[arg(long)]
        portfolio: PathBuf,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
enum Fail {
    Io(String),
    Invalid(String),
}

impl Fail {
    fn code(&self) -> u8 {
        match self {
            Fail::Io(_) => 1,
            Fail::Invalid(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            Fail::Io(m) | Fail::Invalid(m) => m,
        }
    }
}

impl From<TableError> for Fail {
    fn from(e: TableError) -> Self {
        match e {
            TableError::IoFailure { .. } => Fail::Io(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<ChartError> for Fail {
    fn from(e: ChartError) -> Self {
        match e {
            ChartError::Io { .. } => Fail::Io(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<SeriesError> for Fail {
    fn from(e: SeriesError) -> Self {
        match e {
            SeriesError::Io { .. } => Fail::Io(e.to_string()),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<MediciError> for Fail {
    fn from(e: MediciError) -> Self {
        match e {
            MediciError::Io(_) => Fail::Io(e.to_string()),
            MediciError::Csv(ref c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => {
                Fail::Io(e.to_string())
            }
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<PolicyError> for Fail {
    fn from(e: PolicyError) -> Self {
        match e {
            PolicyError::Series(s) => s.into(),
            _ => Fail::Invalid(e.to_string()),
        }
    }
}

impl From<ScenarioError> for Fail {
    fn from(e: ScenarioError) -> Self {
        Fail::Invalid(e.to_string())
    }
}

#[derive(Serialize)]
struct FileDigest {
    path: String,
    sha256: String,
}

/// Reproducibility record written next to the outputs. Holds nothing that
/// varies between identical runs: no timestamps, no output location, no
/// thread count.
#[derive(Serialize)]
struct RunManifest {
    tool: &'static str,
    version: &'static str,
    subcommand: String,
    config: Value,
    seed: u64,
    format: Format,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Inputs are read through here so the manifest sees every byte used.
struct Run {
    common: Common,
    subcommand: String,
    inputs: Vec<FileDigest>,
}

impl Run {
    fn read(&mut self, path: &Path) -> Result<Vec<u8>, Fail> {
        let bytes =
            fs::read(path).map_err(|e| Fail::Io(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn read_text(&mut self, path: &Path) -> Result<String, Fail> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes)
            .map_err(|_| Fail::Invalid(format!("{} is not UTF-8", path.display())))
    }

    fn read_json<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, Fail> {
        let text = self.read_text(path)?;
        serde_json::from_str(&text).map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))
    }

    fn exec(&self) -> Exec {
        match self.common.jobs {
            Some(1) => Exec::Sequential,
            _ => Exec::default(),
        }
    }

    /// Writes the single artifact of this run (or prints it) and the
    /// manifest alongside.
    fn emit(self, stem: &str, body: &str, config: Value) -> Result<(), Fail> {
        let Some(out) = &self.common.out else {
            std::io::stdout()
                .write_all(body.as_bytes())
                .map_err(|e| Fail::Io(format!("stdout: {e}")))?;
            return Ok(());
        };
        let file_mode = matches!(
            out.extension().and_then(|e| e.to_str()),
            Some("csv") | Some("svg")
        );
        let (artifact, manifest_path) = if file_mode {
            let mut m = out.clone().into_os_string();
            m.push(".manifest.json");
            (out.clone(), PathBuf::from(m))
        } else {
            (
                out.join(format!("{stem}.{}", self.common.format.ext())),
                out.join("manifest.json"),
            )
        };
        if let Some(dir) = artifact.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)
                .map_err(|e| Fail::Io(format!("cannot create {}: {e}", dir.display())))?;
        }
        write_file(&artifact, body.as_bytes())?;
        let manifest = RunManifest {
            tool: "circuitforge",
            version: VERSION,
            subcommand: self.subcommand,
            config,
            seed: self.common.seed,
            format: self.common.format,
            inputs: self.inputs,
            outputs: vec![FileDigest {
                path: artifact
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default(),
                sha256: sha256_hex(body.as_bytes()),
            }],
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        text.push('\n');
        write_file(&manifest_path, text.as_bytes())?;
        log::info!(
            "wrote {} and {}",
            artifact.display(),
            manifest_path.display()
        );
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Fail> {
    fs::write(path, bytes).map_err(|e| Fail::Io(format!("cannot write {}: {e}", path.display())))
}

fn render(
    format: Format,
    table: impl FnOnce() -> TableDocument,
    chart: impl FnOnce() -> ChartSpec,
) -> Result<String, Fail> {
    Ok(match format {
        Format::Csv => table_to_csv(&table())?,
        Format::Svg => render_chart(&chart())?,
    })
}

fn dec(x: Decimal) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn series_points(s: &Series) -> Vec<(f64, f64)> {
    s.points()
        .iter()
        .map(|(d, v)| {
            let year = f64::from(chrono::Datelike::year(d))
                + f64::from(chrono::Datelike::ordinal0(d)) / 365.0;
            (year, dec(*v))
        })
        .collect()
}

fn ledger_replay(mut run: Run, scenario: &Path) -> Result<(), Fail> {
    let s: Scenario = run.read_json(scenario)?;
    let outcome = run_scenario(&s)?;
    let body = render(
        run.common.format,
        || outcome.table(&s.name),
        || {
            let pts = outcome
                .money_supply
                .iter()
                .enumerate()
                .map(|(i, m)| ((i + 1) as f64, dec(m.to_decimal())))
                .collect();
            ChartSpec::new(ChartKind::Line, &s.name, "step", "money supply")
                .with_series("money_supply", pts)
        },
    )?;
    run.emit("balances", &body, json!({ "scenario": s.name }))
}

fn summary_table(s: &DatasetSummary) -> TableDocument {
    let mut doc = TableDocument::new(
        "summary",
        vec![
            Column::new("metric", ColumnKind::Text),
            Column::new("value", ColumnKind::Text),
        ],
    );
    let mut push = |k: String, v: String| doc.rows.push(vec![Cell::Text(k), Cell::Text(v)]);
    push("loans".into(), s.loans.to_string());
    for (name, n) in ["bucket_short", "bucket_medium", "bucket_long"]
        .iter()
        .zip(s.bucket_counts)
    {
        push(name.to_string(), n.to_string());
    }
    for (q, season) in Season::ALL.iter().enumerate() {
        let tag = format!("{season:?}").to_lowercase();
        push(format!("starts_{tag}"), s.seasonality.starts[q].to_string());
    }
    for (q, season) in Season::ALL.iter().enumerate() {
        let tag = format!("{season:?}").to_lowercase();
        push(format!("ends_{tag}"), s.seasonality.ends[q].to_string());
    }
    for (m, c) in s.monthly_coincidence.iter().enumerate() {
        push(format!("coincidence_{:02}", m + 1), c.to_string());
    }
    push(
        "mean_nominal_rate_pct".into(),
        format!("{:.2}", s.mean_nominal_rate * 100.0),
    );
    push("utilization".into(), format!("{:.4}", s.utilization));
    push(
        "effective_yield".into(),
        format!("{:.4}", s.effective_yield),
    );
    doc
}

fn coincidence_chart(title: &str, s: &DatasetSummary) -> ChartSpec {
    let pts = s
        .monthly_coincidence
        .iter()
        .enumerate()
        .map(|(m, &c)| ((m + 1) as f64, f64::from(c)))
        .collect();
    ChartSpec::new(ChartKind::Line, title, "month", "loans outstanding")
        .with_series("coincidence", pts)
}

fn medici_stats(mut run: Run, loans: &Path) -> Result<(), Fail> {
    let text = run.read(loans)?;
    let ds = parse_dataset(text.as_slice())?;
    let s = summarize(&ds)?;
    eprintln!(
        "utilization {:.4}, effective yield {:.4}",
        s.utilization, s.effective_yield
    );
    let body = render(
        run.common.format,
        || summary_table(&s),
        || coincidence_chart("Monthly coincidence", &s),
    )?;
    run.emit("stats", &body, json!({}))
}

fn medici_reconstruct(mut run: Run, constraints: Option<&Path>) -> Result<(), Fail> {
    let c: Constraints = match constraints {
        Some(p) => run.read_json(p)?,
        None => Constraints::canonical(),
    };
    let r = reconstruct_dataset(&c, run.common.seed, run.exec())?;
    eprintln!(
        "restart {} solved after {} nodes; utilization {:.4}",
        r.restart, r.moves, r.summary.utilization
    );
    let body = match run.common.format {
        Format::Csv => dataset_to_csv(&r.dataset)?,
        Format::Svg => render_chart(&coincidence_chart("Reconstructed coincidence", &r.summary))?,
    };
    let config = serde_json::to_value(&c).expect("constraints serialize");
    run.emit("loans", &body, config)
}

fn grid_chart(grid: &CalibrationGrid) -> ChartSpec {
    let mut spec = ChartSpec::new(
        ChartKind::Line,
        &format!("Model {} required rates", grid.model),
        "period",
        "rate (%)",
    );
    for (j, cell) in grid.cells.iter().enumerate() {
        let pts = grid
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| ((i + 1) as f64, r.rates[j] * 100.0))
            .collect();
        spec = spec.with_series(&cell.label, pts);
    }
    spec
}

fn medici_calibrate(
    run: Run,
    model: u8,
    retention: &[f64],
    deposits: &[f64],
    share: f64,
) -> Result<(), Fail> {
    let exec = run.exec();
    let targets = canonical_targets();
    let (body, config) = match model {
        1 => {
            let rows = calibrate_model1()?;
            let body = render(
                run.common.format,
                || model1_table(&rows, "model1"),
                || {
                    let pts = rows.iter().map(|r| (f64::from(r.year), r.growth)).collect();
                    ChartSpec::new(ChartKind::Line, "Model 1 growth", "year", "growth factor")
                        .with_series("growth", pts)
                },
            )?;
            (body, json!({ "model": 1 }))
        }
        _ => {
            let retention = if retention.is_empty() {
                vec![0.025, 0.05, 0.10]
            } else {
                retention.to_vec()
            };
            let grid = if model == 2 {
                if !deposits.is_empty() {
                    return Err(Fail::Invalid("--deposits applies to model 3 only".into()));
                }
                calibrate_model2(&targets, &retention, exec)?
            } else {
                let deposits = if deposits.is_empty() {
                    vec![1.0, 3.0, 7.0]
                } else {
                    deposits.to_vec()
                };
                calibrate_model3(&targets, &retention, &deposits, share, exec)?
            };
            let flagged = grid.flagged_cells();
            if flagged.is_empty() {
                eprintln!(
                    "all published cells within {}%",
                    circuitforge::medici::FLAG_THRESHOLD_PCT
                );
            } else {
                eprintln!("flagged: {}", flagged.join(", "));
            }
            let body = render(
                run.common.format,
                || grid.table(&format!("model{model}")),
                || grid_chart(&grid),
            )?;
            let config = json!({
                "model": model,
                "retention": retention,
                "deposits": grid.cells.iter().filter_map(|c| c.deposit_multiple).collect::<Vec<_>>(),
                "share": grid.depositor_share,
            });
            (body, config)
        }
    };
    run.emit(&format!("model{model}"), &body, config)
}

fn load_series(run: &mut Run, path: &Path, unit: Unit) -> Result<Series, Fail> {
    let text = run.read_text(path)?;
    let read = circuitforge::dataio::parse_series(&text, unit)
        .map_err(|e| Fail::Invalid(format!("{}: {e}", path.display())))?;
    if read.skipped > 0 {
        eprintln!(
            "{}: skipped {} rows without a value",
            path.display(),
            read.skipped
        );
    }
    Ok(read.series)
}

fn policy_normalize(
    mut run: Run,
    stock: &Path,
    maturity: &Path,
    unit: MaturityUnit,
) -> Result<(), Fail> {
    let s = load_series(&mut run, stock, Unit::CurrencyBillions)?;
    let m_unit = match unit {
        MaturityUnit::Months => Unit::Months,
        MaturityUnit::Days => Unit::Days,
    };
    let m = load_series(&mut run, maturity, m_unit)?;
    let exact = normalize_principal_flow(&s, &m)?;
    let rounded = exact
        .points()
        .iter()
        .map(|(d, v)| (*d, v.round_dp(4)))
        .collect();
    let flow = Series::new(exact.unit, rounded)?;
    if let (Some(ms), Some(mm), Some(mf)) = (s.median(), m.median(), flow.median()) {
        eprintln!(
            "median stock {}, median maturity {}, median flow {}",
            ms.round_dp(2),
            mm.round_dp(2),
            mf.round_dp(2)
        );
    }
    let body = match run.common.format {
        Format::Csv => series_to_csv(&flow),
        Format::Svg => render_chart(
            &ChartSpec::new(ChartKind::Line, "Principal flow", "year", "per year")
                .with_series("flow", series_points(&flow)),
        )?,
    };
    run.emit("flow", &body, json!({ "maturity_unit": unit }))
}

fn policy_allocate(mut run: Run, flow: &Path, config: Option<&Path>) -> Result<(), Fail> {
    let cfg: AllocationConfig = match config {
        Some(p) => run.read_json(p)?,
        None => AllocationConfig::default(),
    };
    let f = load_series(&mut run, flow, Unit::CurrencyBillionsPerYear)?;
    let a = allocate_principal(&f, &cfg)?;
    let body = render(
        run.common.format,
        || {
            let mut cols = vec![Column::new("DATE", ColumnKind::Text)];
            for (name, _) in a.recipients() {
                cols.push(Column::new(name, ColumnKind::Decimal(4)));
            }
            let mut doc = TableDocument::new("allocation", cols);
            for (i, (d, _)) in f.points().iter().enumerate() {
                let mut row = vec![Cell::Text(d.format("%Y-%m-%d").to_string())];
                row.extend(
                    a.recipients()
                        .iter()
                        .map(|(_, s)| Cell::Decimal(s.points()[i].1)),
                );
                doc.rows.push(row);
            }
            doc
        },
        || {
            let mut spec =
                ChartSpec::new(ChartKind::Line, "Allocated principal", "year", "per year");
            for (name, s) in a.recipients() {
                spec = spec.with_series(name, series_points(s));
            }
            spec
        },
    )?;
    let config = serde_json::to_value(&cfg).expect("config serializes");
    run.emit("allocation", &body, config)
}

fn policy_uplift(run: Run, receipts: Decimal, tax: Decimal) -> Result<(), Fail> {
    if run.common.format == Format::Svg {
        return Err(Fail::Invalid(
            "uplift has no chart form; use --format csv".into(),
        ));
    }
    let pct = uplift_pct(receipts, tax)
        .ok_or_else(|| Fail::Invalid("tax revenue must be nonzero".into()))?;
    let mut doc = TableDocument::new(
        "uplift",
        vec![
            Column::new("receipts", ColumnKind::Text),
            Column::new("tax", ColumnKind::Text),
            Column::new("uplift_pct", ColumnKind::Decimal(2)),
        ],
    );
    doc.rows.push(vec![
        Cell::Text(receipts.to_string()),
        Cell::Text(tax.to_string()),
        Cell::Decimal(pct),
    ]);
    let body = table_to_csv(&doc)?;
    run.emit(
        "uplift",
        &body,
        json!({ "receipts": receipts.to_string(), "tax": tax.to_string() }),
    )
}

fn policy_run(mut run: Run, scenario: &Path) -> Result<(), Fail> {
    let s: PolicyScenario = run.read_json(scenario)?;
    let report = run_policy_scenario(&s)?;
    let body = render(
        run.common.format,
        || report.table(&s.name),
        || {
            let pts = report
                .rows
                .iter()
                .map(|r| (r.period as f64, dec(r.money_supply.to_decimal())))
                .collect();
            let gov = report
                .rows
                .iter()
                .map(|r| (r.period as f64, dec(r.cumulative_receipts.to_decimal())))
                .collect();
            ChartSpec::new(ChartKind::Line, &s.name, "period", "amount")
                .with_series("money_supply", pts)
                .with_series("government_receipts", gov)
        },
    )?;
    run.emit("report", &body, json!({ "scenario": s.name }))
}

fn venture_run(mut run: Run, portfolio: &Path) -> Result<(), Fail> {
    let p: VenturePortfolio = run.read_json(portfolio)?;
    let report = run_venture_portfolio(&p)?;
    eprintln!(
        "permanent money created {}, writedowns {}, reserves {} -> {}",
        report.permanent_creation, report.writedowns, report.reserves_before, report.reserves_after
    );
    let body = render(
        run.common.format,
        || report.table(&p.name),
        || {
            let pts = report
                .rows
                .iter()
                .map(|r| {
                    (
                        dec(r.invested.to_decimal()),
                        dec(r.equity_booked.to_decimal()),
                    )
                })
                .collect();
            ChartSpec::new(ChartKind::Scatter, &p.name, "invested", "equity booked")
                .with_series("loans", pts)
        },
    )?;
    run.emit("venture", &body, json!({ "portfolio": p.name }))
}

fn dispatch(cli: Cli) -> Result<(), Fail> {
    let subcommand = match &cli.group {
        Group::Ledger(LedgerCmd::Replay { .. }) => "ledger replay",
        Group::Medici(MediciCmd::Stats { .. }) => "medici stats",
        Group::Medici(MediciCmd::Reconstruct { .. }) => "medici reconstruct",
        Group::Medici(MediciCmd::Calibrate { .. }) => "medici calibrate",
        Group::Policy(PolicyCmd::Normalize { .. }) => "policy normalize",
        Group::Policy(PolicyCmd::Allocate { .. }) => "policy allocate",
        Group::Policy(PolicyCmd::Uplift { .. }) => "policy uplift",
        Group::Policy(PolicyCmd::Run { .. }) => "policy run",
        Group::Venture(VentureCmd::Run { .. }) => "venture run",
    };
    let run = Run {
        common: cli.common.clone(),
        subcommand: subcommand.to_string(),
        inputs: Vec::new(),
    };
    match &cli.group {
        Group::Ledger(LedgerCmd::Replay { scenario }) => ledger_replay(run, scenario),
        Group::Medici(MediciCmd::Stats { loans }) => medici_stats(run, loans),
        Group::Medici(MediciCmd::Reconstruct { constraints }) => {
            medici_reconstruct(run, constraints.as_deref())
        }
        Group::Medici(MediciCmd::Calibrate {
            model,
            retention,
            deposits,
            share,
        }) => medici_calibrate(run, *model, retention, deposits, *share),
        Group::Policy(PolicyCmd::Normalize {
            stock,
            maturity,
            maturity_unit,
        }) => policy_normalize(run, stock, maturity, *maturity_unit),
        Group::Policy(PolicyCmd::Allocate { flow, config }) => {
            policy_allocate(run, flow, config.as_deref())
        }
        Group::Policy(PolicyCmd::Uplift { receipts, tax }) => policy_uplift(run, *receipts, *tax),
        Group::Policy(PolicyCmd::Run { scenario }) => policy_run(run, scenario),
        Group::Venture(VentureCmd::Run { portfolio }) => venture_run(run, portfolio),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.common.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    if let Some(j) = cli.common.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(2);
        }
        #[cfg(feature = "parallel")]
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    eprintln!("seed: {}", cli.common.seed);
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
