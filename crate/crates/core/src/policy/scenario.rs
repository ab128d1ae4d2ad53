//! Period-by-period policy scenario on the ledger.
//!
//! Each period: originate that period's cohorts, collect level principal
//! instalments on earlier loans, then governments respend a share `s` of the
//! period's receipts to households. Loans the allocation rule may not touch
//! are repaid under ordinary cancellation.

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use super::{BorrowerType, Eligibility, PolicyError};
use crate::dataio::{Cell, Column, ColumnKind, TableDocument};
use crate::ledger::loan::{CAPITAL, EQUITY, GOVERNMENTS};
use crate::ledger::{
    AccountKind, CancellationPolicy, Disbursement, Ledger, LoanKind, LoanSpec, MoneyEvent, Posting,
    Repayment, Sector,
};
use crate::money::{Amount, Currency, Money};

pub const HOUSEHOLDS: &str = "households:deposit";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Cohort {
    /// Origination period, 1-based.
    pub period: usize,
    #[serde(default = "one")]
    pub count: usize,
    pub principal: Amount,
    /// Number of level principal instalments, one per period.
    pub term_periods: usize,
    #[serde(default = "commercial")]
    pub kind: LoanKind,
    #[serde(default = "end_borrower")]
    pub borrower_type: BorrowerType,
    /// Intermediary loans stacked upstream of each final loan.
    #[serde(default)]
    pub chain_depth: usize,
}

fn one() -> usize {
    1
}

fn commercial() -> LoanKind {
    LoanKind::Commercial
}

fn end_borrower() -> BorrowerType {
    BorrowerType::EndBusinessBorrower
}

fn default_respend() -> Decimal {
    Decimal::ONE
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolicyScenario {
    pub name: String,
    #[serde(default)]
    pub currency: Currency,
    pub periods: usize,
    pub policy: CancellationPolicy,
    /// Government respend propensity in [0,1].
    #[serde(default = "default_respend")]
    pub respend: Decimal,
    #[serde(default)]
    pub bank_capital: Amount,
    pub cohorts: Vec<Cohort>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolicyRow {
    pub period: usize,
    pub money_supply: Money,
    pub principal_repaid: Money,
    pub government_receipts: Money,
    pub cumulative_receipts: Money,
    pub respent: Money,
    /// Indexed like [`Sector::ALL`].
    pub sector_equity: [Money; 7],
}

#[derive(Clone, Debug)]
pub struct PolicyReport {
    pub baseline_money_supply: Money,
    pub rows: Vec<PolicyRow>,
    pub ledger: Ledger,
}

impl PolicyReport {
    pub fn table(&self, name: &str) -> TableDocument {
        let mut columns = vec![
            Column::new("period", ColumnKind::Integer),
            Column::new("money_supply", ColumnKind::Decimal(2)),
            Column::new("principal_repaid", ColumnKind::Decimal(2)),
            Column::new("government_receipts", ColumnKind::Decimal(2)),
            Column::new("cumulative_receipts", ColumnKind::Decimal(2)),
            Column::new("respent", ColumnKind::Decimal(2)),
        ];
        for s in Sector::ALL {
            columns.push(Column::new(
                &format!("equity_{}", s.tag()),
                ColumnKind::Decimal(2),
            ));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![
                    Cell::Integer(r.period as i64),
                    Cell::Decimal(r.money_supply.to_decimal()),
                    Cell::Decimal(r.principal_repaid.to_decimal()),
                    Cell::Decimal(r.government_receipts.to_decimal()),
                    Cell::Decimal(r.cumulative_receipts.to_decimal()),
                    Cell::Decimal(r.respent.to_decimal()),
                ];
                row.extend(
                    r.sector_equity
                        .iter()
                        .map(|m| Cell::Decimal(m.to_decimal())),
                );
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

struct Scheduled {
    id: String,
    instalment: Money,
    first_due: usize,
    mode: Repayment,
}

fn government_balances(ledger: &Ledger) -> [i64; 3] {
    GOVERNMENTS.map(|(g, _)| ledger.balance_or_zero(&format!("{g}:deposit")).cents())
}

pub fn run_policy_scenario(s: &PolicyScenario) -> Result<PolicyReport, PolicyError> {
    if s.respend < Decimal::ZERO || s.respend > Decimal::ONE {
        return Err(PolicyError::InvalidScenario(format!(
            "respend {} outside [0,1]",
            s.respend
        )));
    }
    if s.policy == CancellationPolicy::VentureRetain {
        return Err(PolicyError::InvalidScenario(
            "venture retention is run through the venture portfolio".into(),
        ));
    }
    if let Some(c) = s
        .cohorts
        .iter()
        .find(|c| c.period == 0 || c.period > s.periods || c.term_periods == 0)
    {
        return Err(PolicyError::InvalidScenario(format!(
            "cohort at period {} with term {} does not fit 1..={}",
            c.period, c.term_periods, s.periods
        )));
    }
    let at = |period: usize| move |source| PolicyError::Ledger { period, source };
    let cur = s.currency;
    let mut ledger = Ledger::new(cur, s.policy.clone()).map_err(at(0))?;
    ledger
        .open_account(CAPITAL, AccountKind::Asset, Sector::Bank, false)
        .map_err(at(0))?;
    ledger
        .open_account(EQUITY, AccountKind::Equity, Sector::Bank, false)
        .map_err(at(0))?;
    ledger
        .open_account(HOUSEHOLDS, AccountKind::Asset, Sector::Depositor, true)
        .map_err(at(0))?;
    ledger
        .open_account(
            "households:equity",
            AccountKind::Equity,
            Sector::Depositor,
            false,
        )
        .map_err(at(0))?;
    let capital = s.bank_capital.in_currency(cur);
    if capital.is_positive() {
        ledger
            .commit(
                "Initial capital",
                MoneyEvent::Transfer,
                vec![
                    Posting::debit(CAPITAL, capital),
                    Posting::credit(EQUITY, capital),
                ],
            )
            .map_err(at(0))?;
    }
    let include_consumer = match &s.policy {
        CancellationPolicy::AllocateToGovernment(cfg) => Some(cfg.include_consumer),
        _ => None,
    };

    let baseline = ledger.money_supply();
    let mut schedule: Vec<Scheduled> = Vec::new();
    let mut rows = Vec::with_capacity(s.periods);
    let mut cumulative = Money::zero(cur);
    let mut seq = 0usize;
    for period in 1..=s.periods {
        for c in s.cohorts.iter().filter(|c| c.period == period) {
            for _ in 0..c.count {
                seq += 1;
                let principal = c.principal.in_currency(cur);
                let mut parent = None;
                let mut originated = Vec::new();
                for depth in (0..=c.chain_depth).rev() {
                    let final_link = depth == 0;
                    let id = if final_link {
                        format!("P{period}-{seq}")
                    } else {
                        format!("P{period}-{seq}-up{depth}")
                    };
                    let mut spec = LoanSpec::new(&id, &format!("firm{seq}x{depth}"), principal);
                    spec.disbursement = Disbursement::Deposit;
                    spec.kind = c.kind;
                    spec.borrower_type = if final_link {
                        c.borrower_type
                    } else {
                        BorrowerType::Intermediary
                    };
                    spec.chain_parent = parent.take();
                    spec.term_days = (c.term_periods * 365) as u32;
                    ledger.originate_loan(spec).map_err(at(period))?;
                    parent = Some(id.clone());
                    originated.push(id);
                }
                for id in originated {
                    let mode = match include_consumer {
                        Some(inc)
                            if ledger.eligibility(&id, inc).map_err(at(period))?
                                != Eligibility::Eligible =>
                        {
                            Repayment::ForceCancel
                        }
                        _ => Repayment::PerPolicy,
                    };
                    schedule.push(Scheduled {
                        id,
                        instalment: principal
                            .mul_ratio(Decimal::ONE / Decimal::from(c.term_periods)),
                        first_due: period + 1,
                        mode,
                    });
                }
            }
        }
        // Eligibility is fixed at origination, so later chain links do not
        // change the treatment of loans already on the books.
        let gov_before = government_balances(&ledger);
        let mut repaid = Money::zero(cur);
        for item in schedule.iter().filter(|x| x.first_due <= period) {
            let outstanding = ledger.loan(&item.id).map_err(at(period))?.outstanding;
            if !outstanding.is_positive() {
                continue;
            }
            let pay = if item.instalment.is_positive() {
                item.instalment.min(outstanding)
            } else {
                outstanding
            };
            ledger.repay(&item.id, pay, item.mode).map_err(at(period))?;
            repaid = repaid.checked_add(pay).expect("same currency");
        }
        let gov_after = government_balances(&ledger);
        let mut receipts = Money::zero(cur);
        let mut respent = Money::zero(cur);
        for (i, (g, _)) in GOVERNMENTS.iter().enumerate() {
            let inflow = Money::from_cents(gov_after[i] - gov_before[i], cur);
            receipts = receipts.checked_add(inflow).expect("same currency");
            let spend = inflow.mul_ratio(s.respend);
            if spend.is_positive() {
                ledger
                    .transfer(
                        &format!("{g}:deposit"),
                        HOUSEHOLDS,
                        spend,
                        "Government respend",
                    )
                    .map_err(at(period))?;
                respent = respent.checked_add(spend).expect("same currency");
            }
        }
        cumulative = cumulative.checked_add(receipts).expect("same currency");
        let row = PolicyRow {
            period,
            money_supply: ledger.money_supply(),
            principal_repaid: repaid,
            government_receipts: receipts,
            cumulative_receipts: cumulative,
            respent,
            sector_equity: Sector::ALL.map(|sec| ledger.sector_equity(sec)),
        };
        rows.push(row);
    }
    Ok(PolicyReport {
        baseline_money_supply: baseline,
        rows,
        ledger,
    })
}
