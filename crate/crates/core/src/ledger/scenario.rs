//! JSON scenarios: an account chart plus a list of ledger steps, replayed
//! into a per-step balance table.
//!
//! ```json
//! { "name": "demo", "policy": {"type": "retain_to_bank"},
//!   "accounts": [{"id": "bank:capital", "kind": "asset", "sector": "bank"}],
//!   "steps": [{"op": "pay_interest", "loan": "L1", "amount": "0.38"}] }
//! ```

use std::collections::BTreeMap;

use chrono::NaiveDate;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    AccountKind, CancellationPolicy, Ledger, LedgerConfig, LedgerError, LoanSpec, MoneyEvent,
    Posting, Sector, Side,
};
use crate::dataio::{Cell, Column, ColumnKind, TableDocument};
use crate::money::{Amount, Currency, Money};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub currency: Currency,
    #[serde(default)]
    pub start_date: Option<NaiveDate>,
    #[serde(default)]
    pub policy: CancellationPolicy,
    #[serde(default)]
    pub config: LedgerConfig,
    #[serde(default)]
    pub accounts: Vec<AccountDecl>,
    pub steps: Vec<StepEntry>,
    /// Accounts shown in the balance table; all accounts when empty.
    #[serde(default)]
    pub columns: Vec<String>,
    /// Final balances the run must reach.
    #[serde(default)]
    pub expect: BTreeMap<String, Amount>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccountDecl {
    pub id: String,
    pub kind: AccountKind,
    pub sector: Sector,
    #[serde(default)]
    pub money: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PostingDecl {
    pub account: String,
    pub side: Side,
    pub amount: Amount,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StepEntry {
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default)]
    pub date: Option<NaiveDate>,
    #[serde(flatten)]
    pub op: Step,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Step {
    Post {
        #[serde(default)]
        memo: String,
        postings: Vec<PostingDecl>,
    },
    Originate {
        loan: LoanSpec,
    },
    BookInterest {
        loan: String,
        days: u32,
    },
    PayInterest {
        loan: String,
        amount: Amount,
    },
    PayPrincipal {
        loan: String,
        amount: Amount,
    },
    ConvertToEquity {
        loan: String,
        equity_value: Amount,
    },
    Haircut {
        loan: String,
        writedown: Amount,
    },
    Transfer {
        from: String,
        to: String,
        amount: Amount,
    },
    Exchange {
        give: String,
        take: String,
        amount: Amount,
    },
    ClosePeriod,
}

impl Step {
    fn default_label(&self) -> String {
        match self {
            Step::Post { memo, .. } if !memo.is_empty() => memo.clone(),
            Step::Post { .. } => "Posting".into(),
            Step::Originate { loan } => format!("Loan origination {}", loan.id),
            Step::BookInterest { loan, .. } => format!("Interest {loan}"),
            Step::PayInterest { loan, .. } => format!("Interest payment {loan}"),
            Step::PayPrincipal { loan, .. } => format!("Payment of loan balance {loan}"),
            Step::ConvertToEquity { loan, .. } => format!("Equity conversion {loan}"),
            Step::Haircut { loan, .. } => format!("Haircut {loan}"),
            Step::Transfer { .. } => "Transfer".into(),
            Step::Exchange { .. } => "Exchange".into(),
            Step::ClosePeriod => "Period close".into(),
        }
    }
}

#[derive(Debug, Error)]
#[error("step {index} ({label}): {source}")]
pub struct StepError {
    /// 1-based step number; 0 for setup.
    pub index: usize,
    pub label: String,
    #[source]
    pub source: LedgerError,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Step(#[from] StepError),
    #[error("expected {account} = {expected}, got {actual}")]
    Expectation {
        account: String,
        expected: Money,
        actual: Money,
    },
}

#[derive(Debug)]
pub struct ReplayOutcome {
    pub ledger: Ledger,
    pub labels: Vec<String>,
    /// Balances after each step, keyed by account id.
    pub snapshots: Vec<IndexMap<String, Money>>,
    pub money_supply: Vec<Money>,
    pub columns: Vec<String>,
}

impl ReplayOutcome {
    /// One row per step, one column per account, then `money_supply`.
    pub fn table(&self, name: &str) -> TableDocument {
        let mut columns = vec![
            Column::new("step", ColumnKind::Integer),
            Column::new("label", ColumnKind::Text),
        ];
        columns.extend(
            self.columns
                .iter()
                .map(|c| Column::new(c, ColumnKind::Decimal(2))),
        );
        columns.push(Column::new("money_supply", ColumnKind::Decimal(2)));
        let rows = self
            .snapshots
            .iter()
            .enumerate()
            .map(|(i, snap)| {
                let mut row = vec![
                    Cell::Integer(i as i64 + 1),
                    Cell::Text(self.labels[i].clone()),
                ];
                row.extend(self.columns.iter().map(|c| {
                    Cell::Decimal(
                        snap.get(c)
                            .copied()
                            .unwrap_or(self.ledger.zero())
                            .to_decimal(),
                    )
                }));
                row.push(Cell::Decimal(self.money_supply[i].to_decimal()));
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

pub fn run_scenario(s: &Scenario) -> Result<ReplayOutcome, ScenarioError> {
    let setup_err = |source| StepError {
        index: 0,
        label: "setup".into(),
        source,
    };
    let mut ledger =
        Ledger::with_config(s.currency, s.policy.clone(), s.config).map_err(setup_err)?;
    if let Some(d) = s.start_date {
        ledger.advance_to(d).map_err(setup_err)?;
    }
    for a in &s.accounts {
        ledger
            .open_account(&a.id, a.kind, a.sector, a.money)
            .map_err(setup_err)?;
    }
    let mut labels = Vec::with_capacity(s.steps.len());
    let mut snapshots = Vec::with_capacity(s.steps.len());
    let mut money_supply = Vec::with_capacity(s.steps.len());
    for (i, entry) in s.steps.iter().enumerate() {
        let label = entry
            .label
            .clone()
            .unwrap_or_else(|| entry.op.default_label());
        apply_step(&mut ledger, entry).map_err(|source| StepError {
            index: i + 1,
            label: label.clone(),
            source,
        })?;
        labels.push(label);
        snapshots.push(
            ledger
                .accounts()
                .map(|a| (a.id.clone(), a.balance))
                .collect(),
        );
        money_supply.push(ledger.money_supply());
    }
    for (account, expected) in &s.expect {
        let expected = expected.in_currency(s.currency);
        let actual = ledger.balance_or_zero(account);
        if actual != expected {
            return Err(ScenarioError::Expectation {
                account: account.clone(),
                expected,
                actual,
            });
        }
    }
    let columns = if s.columns.is_empty() {
        ledger.accounts().map(|a| a.id.clone()).collect()
    } else {
        s.columns.clone()
    };
    Ok(ReplayOutcome {
        ledger,
        labels,
        snapshots,
        money_supply,
        columns,
    })
}

fn apply_step(ledger: &mut Ledger, entry: &StepEntry) -> Result<(), LedgerError> {
    if let Some(d) = entry.date {
        ledger.advance_to(d)?;
    }
    let c = ledger.currency();
    match &entry.op {
        Step::Post { memo, postings } => {
            let postings = postings
                .iter()
                .map(|p| Posting {
                    account_id: p.account.clone(),
                    side: p.side,
                    amount: p.amount.in_currency(c),
                })
                .collect();
            let memo = if memo.is_empty() {
                entry.label.clone().unwrap_or_default()
            } else {
                memo.clone()
            };
            ledger.commit(&memo, MoneyEvent::Transfer, postings)?;
        }
        Step::Originate { loan } => {
            ledger.originate_loan(loan.clone())?;
        }
        Step::BookInterest { loan, days } => {
            ledger.book_interest(loan, *days)?;
        }
        Step::PayInterest { loan, amount } => ledger.pay_interest(loan, amount.in_currency(c))?,
        Step::PayPrincipal { loan, amount } => ledger.pay_principal(loan, amount.in_currency(c))?,
        Step::ConvertToEquity { loan, equity_value } => {
            ledger.convert_to_equity(loan, equity_value.in_currency(c))?
        }
        Step::Haircut { loan, writedown } => ledger.haircut(loan, writedown.in_currency(c))?,
        Step::Transfer { from, to, amount } => {
            let memo = entry.label.clone().unwrap_or_else(|| "Transfer".into());
            ledger.transfer(from, to, amount.in_currency(c), &memo)?
        }
        Step::Exchange { give, take, amount } => {
            let memo = entry.label.clone().unwrap_or_else(|| "Exchange".into());
            ledger.exchange(give, take, amount.in_currency(c), &memo)?
        }
        Step::ClosePeriod => {
            ledger.close_period()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "name": "mini",
        "policy": {"type": "cancel"},
        "accounts": [
            {"id": "bank:capital", "kind": "asset", "sector": "bank"},
            {"id": "bank:equity", "kind": "equity", "sector": "bank"}
        ],
        "steps": [
            {"op": "post", "label": "Initial", "postings": [
                {"account": "bank:capital", "side": "debit", "amount": 100},
                {"account": "bank:equity", "side": "credit", "amount": "100.00"}]},
            {"op": "originate", "loan": {"id": "L1", "borrower": "b", "principal": "50",
                "disbursement": "deposit", "annual_rate": "0.12"}},
            {"op": "book_interest", "loan": "L1", "days": 30},
            {"op": "pay_interest", "loan": "L1", "amount": "0.50"},
            {"op": "pay_principal", "loan": "L1", "amount": "49.50"}
        ],
        "expect": {"bank:income": "0.50"}
    }"#;

    #[test]
    fn parses_and_runs() {
        let s: Scenario = serde_json::from_str(DOC).unwrap();
        let out = run_scenario(&s).unwrap();
        assert_eq!(out.snapshots.len(), 5);
        assert_eq!(out.labels[0], "Initial");
        assert_eq!(out.labels[1], "Loan origination L1");
        let t = out.table("mini");
        assert_eq!(t.rows.len(), 5);
        assert_eq!(t.columns.last().unwrap().name, "money_supply");
    }

    #[test]
    fn failing_step_is_named() {
        let mut s: Scenario = serde_json::from_str(DOC).unwrap();
        s.steps[4].op = Step::PayPrincipal {
            loan: "L1".into(),
            amount: Amount(999_999),
        };
        match run_scenario(&s) {
            Err(ScenarioError::Step(e)) => {
                assert_eq!(e.index, 5);
                assert!(e.to_string().contains("step 5"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unmet_expectation_is_reported() {
        let mut s: Scenario = serde_json::from_str(DOC).unwrap();
        s.expect.insert("bank:capital".into(), Amount(1));
        assert!(matches!(
            run_scenario(&s),
            Err(ScenarioError::Expectation { .. })
        ));
    }
}
