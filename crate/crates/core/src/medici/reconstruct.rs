//! Seeded reconstruction of a loan dataset from its summary statistics.
//!
//! The summaries only see a loan's start month and how many months it
//! spans, so the search runs over counts of those shapes per duration
//! class. Bucket sizes, monthly coincidence and seasonal start/end counts
//! are all linear in the counts, which makes the search a small integer
//! program. Each restart minimises a random objective drawn from its own
//! ChaCha stream, so seeds pick different solutions; the lowest-numbered
//! restart that finds one wins. Dates are drawn afterwards among those
//! that realise each shape, then rates are drawn to hit the mean.

use chrono::{Datelike, Duration, NaiveDate};
use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOptions, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{season_index, summarize, DatasetSummary, DURATION_RANGE};
use super::{LoanDataset, LoanRecord, MediciError, BUCKET_BOUNDS};
use crate::par::{self, Exec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraints {
    pub loans: usize,
    pub bucket_counts: [usize; 3],
    pub starts: [usize; 4],
    pub ends: [usize; 4],
    pub monthly_coincidence: [u32; 12],
    pub mean_rate: f64,
    pub rate_tolerance: f64,
    /// Lowest and highest rate in the sample; both are used.
    pub rate_range: (f64, f64),
    pub first_year: i32,
    pub last_year: i32,
    /// Branch-and-bound nodes shared across all restarts.
    pub budget: u64,
    pub restarts: u64,
}

impl Constraints {
    /// The 53-loan sample.
    pub fn canonical() -> Self {
        Constraints {
            loans: 53,
            bucket_counts: [39, 9, 5],
            starts: [15, 11, 13, 14],
            ends: [18, 9, 12, 14],
            monthly_coincidence: [16, 13, 11, 5, 5, 10, 10, 12, 12, 8, 9, 13],
            mean_rate: 0.1507,
            rate_tolerance: 0.001,
            rate_range: (0.077, 0.288),
            first_year: 1400,
            last_year: 1452,
            budget: 1_000_000,
            restarts: 8,
        }
    }

    fn unsat(constraint: &str, detail: String) -> MediciError {
        MediciError::Unsatisfiable {
            constraint: constraint.to_string(),
            detail,
        }
    }

    /// Contradictions that no search can resolve.
    pub fn check(&self) -> Result<(), MediciError> {
        let n = self.loans;
        if n == 0 {
            return Err(Self::unsat("loans", "no loans requested".into()));
        }
        let b: usize = self.bucket_counts.iter().sum();
        if b != n {
            return Err(Self::unsat(
                "bucket_counts",
                format!("buckets hold {b} loans, dataset has {n}"),
            ));
        }
        for (name, v) in [("starts", &self.starts), ("ends", &self.ends)] {
            let s: usize = v.iter().sum();
            if s != n {
                return Err(Self::unsat(
                    name,
                    format!("seasons hold {s} loans, dataset has {n}"),
                ));
            }
        }
        let total: u32 = self.monthly_coincidence.iter().sum();
        // Every loan touches at least one month, at most eight (200 days).
        if (total as usize) < n || total as usize > 8 * n {
            return Err(Self::unsat(
                "monthly_coincidence",
                format!("{total} loan-months cannot come from {n} loans"),
            ));
        }
        if let Some(m) = self
            .monthly_coincidence
            .iter()
            .position(|&c| c as usize > n)
        {
            return Err(Self::unsat(
                "monthly_coincidence",
                format!("month {} needs more loans than exist", m + 1),
            ));
        }
        let (lo, hi) = self.rate_range;
        if !(0.0..=hi).contains(&lo)
            || self.mean_rate < lo
            || self.mean_rate > hi
            || (n == 1 && lo != hi && (self.mean_rate - lo).abs() > self.rate_tolerance)
        {
            return Err(Self::unsat(
                "mean_rate",
                format!(
                    "mean {} incompatible with range [{lo}, {hi}]",
                    self.mean_rate
                ),
            ));
        }
        if usable_years(self).is_empty() {
            return Err(Self::unsat(
                "years",
                format!(
                    "{}..={} has no two consecutive non-leap years",
                    self.first_year, self.last_year
                ),
            ));
        }
        Ok(())
    }

    /// Whether `s` meets every constraint.
    pub fn satisfied_by(&self, s: &DatasetSummary) -> bool {
        s.loans == self.loans
            && s.bucket_counts == self.bucket_counts
            && s.seasonality.starts == self.starts
            && s.seasonality.ends == self.ends
            && s.monthly_coincidence == self.monthly_coincidence
            && (s.mean_nominal_rate - self.mean_rate).abs() <= self.rate_tolerance
    }
}

#[derive(Clone, Debug)]
pub struct Reconstruction {
    pub dataset: LoanDataset,
    pub summary: DatasetSummary,
    pub restart: u64,
    pub moves: u64,
}

fn bucket_range(b: usize) -> (i64, i64) {
    match b {
        0 => (DURATION_RANGE.0, BUCKET_BOUNDS[0]),
        1 => (BUCKET_BOUNDS[0] + 1, BUCKET_BOUNDS[1]),
        _ => (BUCKET_BOUNDS[1] + 1, DURATION_RANGE.1),
    }
}

fn is_leap(y: i32) -> bool {
    NaiveDate::from_ymd_opt(y, 2, 29).is_some()
}

/// Months between the start and end month of a loan.
fn span(start: NaiveDate, end: NaiveDate) -> u32 {
    ((end.year() - start.year()) * 12 + end.month0() as i32 - start.month0() as i32) as u32
}

/// A loan reduced to what the summaries see: start month and how many
/// month boundaries it crosses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Shape {
    month: u32,
    span: u32,
}

impl Shape {
    fn mask(self) -> u16 {
        (0..=self.span).fold(0, |m, k| m | 1 << ((self.month + k) % 12))
    }

    fn start_season(self) -> usize {
        season_index(self.month)
    }

    fn end_season(self) -> usize {
        season_index((self.month + self.span) % 12)
    }
}

/// Reference year pair used to decide which shapes a bucket admits;
/// realised loans use years with the same (non-leap) calendar.
const REFERENCE_YEAR: i32 = 1401;

/// Days in `month0` of `year` as start dates.
fn month_days(year: i32, month0: u32) -> impl Iterator<Item = NaiveDate> {
    let first = NaiveDate::from_ymd_opt(year, month0 + 1, 1).expect("valid month");
    first.iter_days().take_while(move |d| d.month0() == month0)
}

/// Shapes reachable by some loan of bucket `b`.
fn feasible_shapes(b: usize) -> Vec<Shape> {
    let (lo, hi) = bucket_range(b);
    let mut out = Vec::new();
    for month in 0..12 {
        let mut spans: Vec<u32> = month_days(REFERENCE_YEAR, month)
            .flat_map(|d| (lo..=hi).map(move |n| span(d, d + Duration::days(n))))
            .collect();
        spans.sort_unstable();
        spans.dedup();
        out.extend(spans.into_iter().map(|span| Shape { month, span }));
    }
    out
}

/// Counter layout: twelve months, four start seasons, four end seasons.
const COUNTERS: usize = 20;
const GROUPS: [(&str, std::ops::Range<usize>); 3] = [
    ("monthly_coincidence", 0..12),
    ("starts", 12..16),
    ("ends", 16..20),
];

fn contribution(s: Shape) -> [f64; COUNTERS] {
    let mut v = [0.0; COUNTERS];
    let mask = s.mask();
    for (m, x) in v.iter_mut().take(12).enumerate() {
        *x = f64::from(mask >> m & 1);
    }
    v[12 + s.start_season()] = 1.0;
    v[16 + s.end_season()] = 1.0;
    v
}

fn target_counts(c: &Constraints) -> [f64; COUNTERS] {
    let mut v = [0.0; COUNTERS];
    for (m, &x) in c.monthly_coincidence.iter().enumerate() {
        v[m] = f64::from(x);
    }
    for q in 0..4 {
        v[12 + q] = c.starts[q] as f64;
        v[16 + q] = c.ends[q] as f64;
    }
    v
}

struct Success {
    buckets: Vec<usize>,
    shapes: Vec<Shape>,
    rng: ChaCha8Rng,
    restart: u64,
    moves: u64,
}

/// One integer count per (bucket, shape). Bucket totals and all twenty
/// counters are equalities; with `slack` each counter may miss its target
/// at unit cost instead.
struct Model {
    problem: Problem,
    vars: Vec<(usize, Shape, Variable)>,
    slacks: Vec<Variable>,
}

fn build_model(
    c: &Constraints,
    table: &[Vec<Shape>; 3],
    mut weight: impl FnMut() -> f64,
    slack: bool,
) -> Model {
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut vars = Vec::new();
    for (b, shapes) in table.iter().enumerate() {
        let cap = c.bucket_counts[b] as i32;
        let mut total = LinearExpr::empty();
        for &s in shapes {
            let v = problem.add_integer_var(weight(), (0, cap));
            total.add(v, 1.0);
            vars.push((b, s, v));
        }
        problem.add_constraint(total, ComparisonOp::Eq, f64::from(cap));
    }
    let rows: Vec<[f64; COUNTERS]> = vars.iter().map(|&(_, s, _)| contribution(s)).collect();
    let mut slacks = Vec::new();
    for (i, t) in target_counts(c).into_iter().enumerate() {
        let mut e = LinearExpr::empty();
        for (row, &(_, _, v)) in rows.iter().zip(&vars) {
            if row[i] != 0.0 {
                e.add(v, row[i]);
            }
        }
        if slack {
            let over = problem.add_var(1.0, (0.0, f64::INFINITY));
            let under = problem.add_var(1.0, (0.0, f64::INFINITY));
            e.add(over, -1.0);
            e.add(under, 1.0);
            slacks.push(over);
            slacks.push(under);
        }
        problem.add_constraint(e, ComparisonOp::Eq, t);
    }
    Model {
        problem,
        vars,
        slacks,
    }
}

fn options(nodes: u64) -> SolveOptions {
    let mut o = SolveOptions::default();
    o.node_limit = Some(nodes);
    o
}

/// One restart: minimise a random linear objective over the exact
/// constraints, so each restart lands on a different vertex.
fn search(
    c: &Constraints,
    table: &[Vec<Shape>; 3],
    seed: u64,
    restart: u64,
    budget: u64,
) -> Option<Success> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart);
    let model = build_model(c, table, || rng.gen::<f64>(), false);
    let outcome = model.problem.solve_with(options(budget)).ok()?;
    let moves = outcome.stats().nodes_solved;
    let sol = outcome.into_solution().ok()?;
    let mut buckets = Vec::with_capacity(c.loans);
    let mut shapes = Vec::with_capacity(c.loans);
    for &(b, s, v) in &model.vars {
        let k = sol.var_value(v).round() as usize;
        buckets.extend(std::iter::repeat_n(b, k));
        shapes.extend(std::iter::repeat_n(s, k));
    }
    Some(Success {
        buckets,
        shapes,
        rng,
        restart,
        moves,
    })
}

/// Names the constraint group that misses by the most when every counter
/// may be violated, with the total miss.
fn diagnose(c: &Constraints, table: &[Vec<Shape>; 3], budget: u64) -> (&'static str, i64) {
    let model = build_model(c, table, || 0.0, true);
    let Some(sol) = model
        .problem
        .solve_with(options(budget))
        .ok()
        .and_then(|o| o.into_solution().ok())
    else {
        return (GROUPS[0].0, -1);
    };
    let miss = |r: &std::ops::Range<usize>| -> i64 {
        r.clone()
            .map(|i| {
                let v = sol.var_value(model.slacks[2 * i]) + sol.var_value(model.slacks[2 * i + 1]);
                v.round() as i64
            })
            .sum()
    };
    GROUPS
        .iter()
        .map(|(name, r)| (*name, miss(r)))
        .max_by_key(|&(_, m)| m)
        .expect("three groups")
}

/// Years whose calendar, and the next year's, match the reference pair.
fn usable_years(c: &Constraints) -> Vec<i32> {
    (c.first_year..=c.last_year)
        .filter(|&y| !is_leap(y) && !is_leap(y + 1))
        .collect()
}

/// Picks concrete dates for a shape: a year, then uniformly among the
/// (start, duration) pairs in the bucket that produce the shape.
fn realise(rng: &mut ChaCha8Rng, years: &[i32], b: usize, s: Shape) -> (NaiveDate, i64) {
    let (lo, hi) = bucket_range(b);
    let year = years[rng.gen_range(0..years.len())];
    let options: Vec<(NaiveDate, i64)> = month_days(year, s.month)
        .flat_map(|d| (lo..=hi).map(move |n| (d, n)))
        .filter(|&(d, n)| span(d, d + Duration::days(n)) == s.span)
        .collect();
    options[rng.gen_range(0..options.len())]
}

/// Rates in [lo, hi] with the sample's extremes present, rounded to a
/// hundredth of a percent, averaging exactly `mean` up to that rounding.
fn draw_rates(rng: &mut ChaCha8Rng, c: &Constraints) -> Vec<f64> {
    let n = c.loans;
    let (lo, hi) = c.rate_range;
    if n == 1 {
        return vec![c.mean_rate];
    }
    let mut rates = vec![lo, hi];
    for _ in 2..n {
        // Triangular over [lo, mean + (mean - lo)] keeps most loans near the mean.
        let top = (2.0 * c.mean_rate - lo).min(hi);
        let x = (rng.gen_range(lo..=top) + rng.gen_range(lo..=top)) / 2.0;
        rates.push(x);
    }
    let target = c.mean_rate * n as f64;
    for _ in 0..100 {
        let gap = target - rates.iter().sum::<f64>();
        if gap.abs() < 1e-12 {
            break;
        }
        let free = rates.len() - 2;
        for r in rates.iter_mut().skip(2) {
            *r = (*r + gap / free as f64).clamp(lo, hi);
        }
    }
    let round = |x: f64| (x * 10_000.0).round() / 10_000.0;
    for r in rates.iter_mut() {
        *r = round(*r);
    }
    if n > 2 {
        let gap = round(target - rates.iter().sum::<f64>());
        // Put the rounding remainder on the free loan with the most room.
        let j = (2..n)
            .max_by(|&a, &b| {
                let room = |x: f64| (x - lo).min(hi - x);
                room(rates[a]).total_cmp(&room(rates[b]))
            })
            .expect("n > 2");
        rates[j] = round((rates[j] + gap).clamp(lo, hi));
    }
    rates
}

/// Searches for a dataset meeting `c`, deterministically from `seed`.
pub fn reconstruct_dataset(
    c: &Constraints,
    seed: u64,
    exec: Exec,
) -> Result<Reconstruction, MediciError> {
    c.check()?;
    let restarts = c.restarts.max(1);
    let per = c.budget / restarts;
    let table = [feasible_shapes(0), feasible_shapes(1), feasible_shapes(2)];
    let found = par::find_map_first(exec, restarts, |i| search(c, &table, seed, i, per));
    let Some(mut win) = found else {
        let (constraint, residual) = diagnose(c, &table, per);
        return Err(Constraints::unsat(
            constraint,
            format!(
                "closest assignment misses by {residual} (L1 residual) after {} restarts of {per} nodes",
                restarts
            ),
        ));
    };
    let years = usable_years(c);
    let mut dated: Vec<(NaiveDate, i64)> = win
        .buckets
        .iter()
        .zip(&win.shapes)
        .map(|(&b, &s)| realise(&mut win.rng, &years, b, s))
        .collect();
    dated.sort();
    let rates = draw_rates(&mut win.rng, c);
    let width = c.loans.to_string().len().max(2);
    let records = dated
        .iter()
        .zip(rates)
        .enumerate()
        .map(|(i, (&(start, days), r))| {
            LoanRecord::new(
                format!("L{:0width$}", i + 1),
                start,
                start + Duration::days(days),
                r,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let dataset = LoanDataset { records };
    let summary = summarize(&dataset)?;
    if !c.satisfied_by(&summary) {
        return Err(Constraints::unsat(
            "self-check",
            "reconstruction does not reproduce its constraints".into(),
        ));
    }
    Ok(Reconstruction {
        dataset,
        summary,
        restart: win.restart,
        moves: win.moves,
    })
}
