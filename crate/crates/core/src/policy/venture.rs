//! Venture portfolio: at-risk loans resolved by equity conversion or haircut.
//!
//! The venture spends its loan proceeds into the wider economy, so that
//! money stays in circulation whatever happens to the venture. Resolution
//! only decides how the bank books the loss or the equity.

use serde::{Deserialize, Serialize};

use super::PolicyError;
use crate::dataio::{Cell, Column, ColumnKind, TableDocument};
use crate::ledger::loan::{CAPITAL, EQUITY};
use crate::ledger::{
    AccountKind, CancellationPolicy, Disbursement, Ledger, LoanKind, LoanSpec, MoneyEvent, Posting,
    Sector,
};
use crate::money::{Amount, Currency, Money};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Resolution {
    ConvertedAtBook,
    Haircut { writedown: Amount },
    FullLoss,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VentureOutcome {
    pub loan_id: String,
    pub invested: Amount,
    pub resolution: Resolution,
}

impl VentureOutcome {
    pub fn writedown(&self) -> Amount {
        match self.resolution {
            Resolution::ConvertedAtBook => Amount(0),
            Resolution::Haircut { writedown } => writedown,
            Resolution::FullLoss => self.invested,
        }
    }

    /// Equity booked at resolution.
    pub fn realized_equity_value(&self) -> Amount {
        Amount(self.invested.0 - self.writedown().0)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VenturePortfolio {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub currency: Currency,
    #[serde(default)]
    pub bank_capital: Amount,
    pub outcomes: Vec<VentureOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VentureRow {
    pub loan_id: String,
    pub invested: Money,
    pub equity_booked: Money,
    pub writedown: Money,
}

#[derive(Clone, Debug)]
pub struct VentureReport {
    /// Money-supply increase over the portfolio's life.
    pub permanent_creation: Money,
    pub equity_booked: Money,
    pub writedowns: Money,
    pub reserves_before: Money,
    pub reserves_after: Money,
    pub rows: Vec<VentureRow>,
    pub ledger: Ledger,
}

impl VentureReport {
    pub fn table(&self, name: &str) -> TableDocument {
        let columns = vec![
            Column::new("loan_id", ColumnKind::Text),
            Column::new("invested", ColumnKind::Decimal(2)),
            Column::new("equity_booked", ColumnKind::Decimal(2)),
            Column::new("writedown", ColumnKind::Decimal(2)),
        ];
        let mut rows: Vec<Vec<Cell>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    Cell::Text(r.loan_id.clone()),
                    Cell::Decimal(r.invested.to_decimal()),
                    Cell::Decimal(r.equity_booked.to_decimal()),
                    Cell::Decimal(r.writedown.to_decimal()),
                ]
            })
            .collect();
        let invested: i64 = self.rows.iter().map(|r| r.invested.cents()).sum();
        rows.push(vec![
            Cell::Text("total".into()),
            Cell::Decimal(
                Money::from_cents(invested, self.permanent_creation.currency()).to_decimal(),
            ),
            Cell::Decimal(self.equity_booked.to_decimal()),
            Cell::Decimal(self.writedowns.to_decimal()),
        ]);
        TableDocument {
            name: name.to_string(),
            columns,
            rows,
        }
    }
}

fn sum(a: Money, b: Money) -> Money {
    a.checked_add(b).expect("same currency")
}

pub fn run_venture_portfolio(p: &VenturePortfolio) -> Result<VentureReport, PolicyError> {
    let cur = p.currency;
    let at = |i: usize| move |source| PolicyError::Ledger { period: i, source };
    let mut ledger = Ledger::new(cur, CancellationPolicy::VentureRetain).map_err(at(0))?;
    for (id, kind, sector, money) in [
        (CAPITAL, AccountKind::Asset, Sector::Bank, false),
        (EQUITY, AccountKind::Equity, Sector::Bank, false),
        (
            "world:deposit",
            AccountKind::Asset,
            Sector::ExternalWorld,
            true,
        ),
        (
            "world:equity",
            AccountKind::Equity,
            Sector::ExternalWorld,
            false,
        ),
    ] {
        ledger
            .open_account(id, kind, sector, money)
            .map_err(at(0))?;
    }
    let capital = p.bank_capital.in_currency(cur);
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
    let reserves_before = ledger.balance_or_zero(CAPITAL);
    let supply_before = ledger.money_supply();
    let zero = Money::zero(cur);
    let (mut equity_booked, mut writedowns) = (zero, zero);
    let mut rows = Vec::with_capacity(p.outcomes.len());
    for (i, o) in p.outcomes.iter().enumerate() {
        let step = i + 1;
        let invested = o.invested.in_currency(cur);
        let w = o.writedown().in_currency(cur);
        if w.is_negative() || w.cents() > invested.cents() {
            return Err(PolicyError::InvalidScenario(format!(
                "{}: writedown {w} outside [0, {invested}]",
                o.loan_id
            )));
        }
        let entity = format!("venture_{}", o.loan_id.replace(':', "_"));
        let mut spec = LoanSpec::new(&o.loan_id, &entity, invested);
        spec.kind = LoanKind::AtRiskVenture;
        spec.disbursement = Disbursement::Deposit;
        ledger.originate_loan(spec).map_err(at(step))?;
        ledger
            .transfer(
                &format!("{entity}:deposit"),
                "world:deposit",
                invested,
                "Venture spending",
            )
            .map_err(at(step))?;
        let value = o.realized_equity_value().in_currency(cur);
        match o.resolution {
            Resolution::FullLoss => ledger.haircut(&o.loan_id, invested).map_err(at(step))?,
            _ => ledger
                .convert_to_equity(&o.loan_id, value)
                .map_err(at(step))?,
        }
        equity_booked = sum(equity_booked, value);
        writedowns = sum(writedowns, w);
        rows.push(VentureRow {
            loan_id: o.loan_id.clone(),
            invested,
            equity_booked: value,
            writedown: w,
        });
    }
    let permanent_creation = ledger
        .money_supply()
        .checked_sub(supply_before)
        .expect("same currency");
    Ok(VentureReport {
        permanent_creation,
        equity_booked,
        writedowns,
        reserves_before,
        reserves_after: ledger.balance_or_zero(CAPITAL),
        rows,
        ledger,
    })
}
